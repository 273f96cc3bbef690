#include "gwlab/numkernel.hpp"

#include <algorithm>
#include <cmath>

namespace gwlab {

Vec softmax(const Vec& v) {
    if (v.empty()) throw InvalidShape("softmax: empty input");
    const double m = *std::max_element(v.begin(), v.end());
    Vec out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double cross_entropy(const Vec& p, std::size_t label) {
    if (label >= p.size())
        throw InvalidLabel("cross_entropy: label " + std::to_string(label) +
                           " out of range for " + std::to_string(p.size()) +
                           " classes");
    return -std::log(std::max(p[label], kProbFloor));
}

Vec cross_entropy_grad(const Vec& p, std::size_t label) {
    if (label >= p.size()) throw InvalidLabel("cross_entropy_grad: label out of range");
    Vec g(p.size(), 0.0);
    g[label] = -1.0 / std::max(p[label], kProbFloor);
    return g;
}

Vec softmax_backward(const Vec& y, const Vec& g) {
    if (y.size() != g.size()) throw InvalidShape("softmax_backward: dims differ");
    double gy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) gy += g[i] * y[i];
    Vec out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * (g[i] - gy);
    return out;
}

Vec ce_softmax_logits_grad(const Vec& p, std::size_t label) {
    if (label >= p.size()) throw InvalidLabel("ce_softmax_logits_grad: label out of range");
    Vec g = p;
    g[label] -= 1.0;
    return g;
}

// ---- ParamSet ----------------------------------------------------------------

Tensor2& ParamSet::add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (index_.count(name))
        throw InvalidShape("ParamSet: duplicate parameter '" + name + "'");
    index_.emplace(name, items_.size());
    items_.emplace_back(name, Tensor2(rows, cols));
    return items_.back().second;
}

Tensor2& ParamSet::at(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        throw InvalidShape("ParamSet: unknown parameter '" + std::string(name) + "'");
    return items_[it->second].second;
}

const Tensor2& ParamSet::at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        throw InvalidShape("ParamSet: unknown parameter '" + std::string(name) + "'");
    return items_[it->second].second;
}

bool ParamSet::has(std::string_view name) const {
    return index_.count(std::string(name)) != 0;
}

std::size_t ParamSet::value_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.size();
    return n;
}

ParamSet ParamSet::zeros_like(const ParamSet& other) {
    ParamSet out;
    for (const auto& [name, t] : other.items_) out.add(name, t.rows, t.cols);
    return out;
}

void ParamSet::fill_zero() {
    for (auto& [name, t] : items_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

void ParamSet::accumulate(const ParamSet& other, double scale) {
    if (!same_layout(other)) throw InvalidShape("ParamSet::accumulate: layout mismatch");
    for (std::size_t i = 0; i < items_.size(); ++i) {
        auto& dst = items_[i].second.data;
        const auto& src = other.items_[i].second.data;
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
    }
}

void ParamSet::init_uniform(Rng& rng, double range) {
    for (auto& [name, t] : items_)
        for (double& x : t.data) x = rng.uniform(-range, range);
}

bool ParamSet::same_layout(const ParamSet& other) const {
    if (items_.size() != other.items_.size()) return false;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (items_[i].first != other.items_[i].first) return false;
        if (!items_[i].second.same_shape(other.items_[i].second)) return false;
    }
    return true;
}

// ---- optimizer ----------------------------------------------------------------

void optimizer_step(ParamSet& params, const GradSet& grads, OptimizerState& state) {
    if (!params.same_layout(grads))
        throw InvalidShape("optimizer_step: params/grads layout mismatch");
    if (state.step_count == 0 && state.m.tensor_count() == 0) {
        state.m = ParamSet::zeros_like(params);
        state.v = ParamSet::zeros_like(params);
    }
    if (!state.m.same_layout(params))
        throw InvalidShape("optimizer_step: moment buffers do not match params");

    state.step_count += 1;
    const double lr = state.learning_rate;

    if (state.kind == OptimKind::SGD) {
        auto g_it = grads.begin();
        for (auto& [name, p] : params) {
            const Tensor2& g = g_it->second;
            ++g_it;
            for (std::size_t i = 0; i < p.data.size(); ++i)
                p.data[i] -= lr * (g.data[i] + state.weight_decay * p.data[i]);
            require_finite(p.data, "optimizer_step(" + name + ")");
        }
        return;
    }

    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    auto g_it = grads.begin();
    for (auto& [name, p] : params) {
        const Tensor2& g = g_it->second;
        ++g_it;
        Tensor2& m = state.m.at(name);
        Tensor2& v = state.v.at(name);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
            p.data[i] -= lr * state.weight_decay * p.data[i];
        }
        require_finite(p.data, "optimizer_step(" + name + ")");
    }
}

// ---- grad check ----------------------------------------------------------------

double grad_check(const std::function<double(const ParamSet&)>& loss_fn,
                  const ParamSet& params, const GradSet& analytic, double h) {
    if (!params.same_layout(analytic))
        throw InvalidShape("grad_check: params/analytic layout mismatch");
    ParamSet work = params;
    double max_err = 0.0;
    auto a_it = analytic.begin();
    for (auto& [name, t] : work) {
        const Tensor2& a = a_it->second;
        ++a_it;
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            const double saved = t.data[i];
            t.data[i] = saved + h;
            const double lp = loss_fn(work);
            t.data[i] = saved - h;
            const double lm = loss_fn(work);
            t.data[i] = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw NumericalFailure("grad_check: non-finite loss at '" + name + "'");
            const double fd = (lp - lm) / (2.0 * h);
            const double err = std::abs(a.data[i] - fd) / (std::abs(fd) + 1e-8);
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace gwlab
