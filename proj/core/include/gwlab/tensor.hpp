#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gwlab/errors.hpp"

namespace gwlab {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. All kernel math is 64-bit; checkpoints
/// downcast to 32-bit on disk.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    Vec row_vec(std::size_t r) const {
        return Vec(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                   data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
};

// ---- matrix ops ------------------------------------------------------------

Tensor2 matmul(const Tensor2& a, const Tensor2& b);     // (m,k)x(k,n)
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);  // a * b^T : (m,k)x(n,k)
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);  // a^T * b : (k,m)x(k,n)

void add_inplace(Tensor2& a, const Tensor2& b, double scale = 1.0);
Tensor2 hadamard(const Tensor2& a, const Tensor2& b);
Tensor2 tanh_map(const Tensor2& a);
/// dL/dx given y = tanh(x) and g = dL/dy.
Tensor2 tanh_backward(const Tensor2& y, const Tensor2& g);

Vec mean_rows(const Tensor2& a);

// ---- vector ops ------------------------------------------------------------

Vec vecmat(const Vec& v, const Tensor2& w);     // (1,r)x(r,c) -> c
Vec vecmat_nt(const Vec& v, const Tensor2& w);  // (1,c)x(r,c)^T -> r
/// w += scale * outer(u, v); u indexes rows.
void add_outer(Tensor2& w, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(std::span<double> y, std::span<const double> x, double a);  // y += a*x
Vec vec_hadamard(std::span<const double> a, std::span<const double> b);
Vec vec_tanh(const Vec& v);
Vec vec_tanh_backward(const Vec& y, const Vec& g);
Vec vec_sigmoid(const Vec& v);

bool all_finite(std::span<const double> v);
void require_finite(std::span<const double> v, const std::string& what);

}  // namespace gwlab
