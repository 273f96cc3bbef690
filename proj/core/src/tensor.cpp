#include "gwlab/tensor.hpp"

#include <cmath>

namespace gwlab {

namespace {

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
    if (!a.same_shape(b)) {
        throw InvalidShape(std::string(op) + ": shape mismatch (" +
                           std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                           " vs " + std::to_string(b.rows) + "x" +
                           std::to_string(b.cols) + ")");
    }
}

}  // namespace

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows) throw InvalidShape("matmul: inner dims differ");
    Tensor2 out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            double* orow = out.data.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.cols) throw InvalidShape("matmul_nt: inner dims differ");
    Tensor2 out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j)
            out.at(i, j) = dot(a.row(i), b.row(j));
    return out;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows) throw InvalidShape("matmul_tn: inner dims differ");
    Tensor2 out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + k * a.cols;
        const double* brow = b.data.data() + k * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = out.data.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

void add_inplace(Tensor2& a, const Tensor2& b, double scale) {
    require_same_shape(a, b, "add_inplace");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += scale * b.data[i];
}

Tensor2 hadamard(const Tensor2& a, const Tensor2& b) {
    require_same_shape(a, b, "hadamard");
    Tensor2 out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    return out;
}

Tensor2 tanh_map(const Tensor2& a) {
    Tensor2 out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = std::tanh(a.data[i]);
    return out;
}

Tensor2 tanh_backward(const Tensor2& y, const Tensor2& g) {
    require_same_shape(y, g, "tanh_backward");
    Tensor2 out(y.rows, y.cols);
    for (std::size_t i = 0; i < y.data.size(); ++i)
        out.data[i] = g.data[i] * (1.0 - y.data[i] * y.data[i]);
    return out;
}

Vec mean_rows(const Tensor2& a) {
    if (a.rows == 0) throw InvalidShape("mean_rows: empty");
    Vec out(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) axpy(out, a.row(i), 1.0);
    const double inv = 1.0 / static_cast<double>(a.rows);
    for (double& x : out) x *= inv;
    return out;
}

Vec vecmat(const Vec& v, const Tensor2& w) {
    if (v.size() != w.rows) throw InvalidShape("vecmat: dims differ");
    Vec out(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double vr = v[r];
        if (vr == 0.0) continue;
        axpy(out, w.row(r), vr);
    }
    return out;
}

Vec vecmat_nt(const Vec& v, const Tensor2& w) {
    if (v.size() != w.cols) throw InvalidShape("vecmat_nt: dims differ");
    Vec out(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) out[r] = dot(w.row(r), v);
    return out;
}

void add_outer(Tensor2& w, std::span<const double> u, std::span<const double> v,
               double scale) {
    if (u.size() != w.rows || v.size() != w.cols)
        throw InvalidShape("add_outer: dims differ");
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double ur = scale * u[r];
        if (ur == 0.0) continue;
        double* row = w.data.data() + r * w.cols;
        for (std::size_t c = 0; c < w.cols; ++c) row[c] += ur * v[c];
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(std::span<double> y, std::span<const double> x, double a) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

Vec vec_hadamard(std::span<const double> a, std::span<const double> b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Vec vec_tanh(const Vec& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    return out;
}

Vec vec_tanh_backward(const Vec& y, const Vec& g) {
    Vec out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = g[i] * (1.0 - y[i] * y[i]);
    return out;
}

Vec vec_sigmoid(const Vec& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = v[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
    }
    return out;
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void require_finite(std::span<const double> v, const std::string& what) {
    if (!all_finite(v)) throw NumericalFailure(what + ": non-finite value");
}

}  // namespace gwlab
