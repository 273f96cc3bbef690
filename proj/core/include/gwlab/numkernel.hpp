#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gwlab/rng.hpp"
#include "gwlab/tensor.hpp"

namespace gwlab {

// ---- probability primitives -------------------------------------------------

/// Stable softmax (max-subtracted). Throws InvalidShape on empty input.
Vec softmax(const Vec& v);

/// -log p[label] with probability floor 1e-12. Throws InvalidLabel when
/// label >= |p|.
double cross_entropy(const Vec& p, std::size_t label);

/// dL/dp for cross_entropy(p, label).
Vec cross_entropy_grad(const Vec& p, std::size_t label);

/// dL/dz given y = softmax(z) and g = dL/dy.
Vec softmax_backward(const Vec& y, const Vec& g);

/// Fused dL/dlogits for cross_entropy(softmax(z), label): p - onehot(label).
Vec ce_softmax_logits_grad(const Vec& p, std::size_t label);

inline constexpr double kProbFloor = 1e-12;

// ---- named parameter container ----------------------------------------------

/// Ordered name -> Tensor2 map. Order is insertion order and defines the
/// checkpoint manifest. Also used for gradients and optimizer moments.
class ParamSet {
public:
    Tensor2& add(const std::string& name, std::size_t rows, std::size_t cols);
    Tensor2& at(std::string_view name);
    const Tensor2& at(std::string_view name) const;
    bool has(std::string_view name) const;

    std::size_t tensor_count() const { return items_.size(); }
    std::size_t value_count() const;

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    static ParamSet zeros_like(const ParamSet& other);
    void fill_zero();
    /// Element-wise a += scale * b over matching names; shapes must agree.
    void accumulate(const ParamSet& other, double scale = 1.0);

    /// Uniform(-range, range) init of every element, deterministic per seed.
    void init_uniform(Rng& rng, double range);

    bool same_layout(const ParamSet& other) const;

private:
    std::vector<std::pair<std::string, Tensor2>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

using GradSet = ParamSet;

// ---- optimizer ---------------------------------------------------------------

enum class OptimKind { SGD, AdamW };

struct OptimizerState {
    OptimKind kind = OptimKind::AdamW;
    double learning_rate = 1e-2;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step_count = 0;
    ParamSet m;  // first moments, shaped on first step
    ParamSet v;  // second moments
};

/// One update over every tensor in `params` against the same-named gradient.
/// SGD: p -= lr*(g + wd*p). AdamW: decoupled weight decay with bias-corrected
/// moments. Throws InvalidShape on any layout mismatch.
void optimizer_step(ParamSet& params, const GradSet& grads, OptimizerState& state);

// ---- gradient verification ----------------------------------------------------

/// Central-difference check of `analytic` against loss_fn around `params`.
/// Returns max over coordinates of |a - fd| / (|fd| + 1e-8).
/// Throws NumericalFailure when loss_fn produces a non-finite value.
double grad_check(const std::function<double(const ParamSet&)>& loss_fn,
                  const ParamSet& params, const GradSet& analytic, double h = 1e-5);

}  // namespace gwlab
