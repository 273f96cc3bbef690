#include <doctest.h>

#include <cmath>

#include "gwlab/numkernel.hpp"

using namespace gwlab;

TEST_SUITE("numkernel") {

TEST_CASE("softmax symmetry and analytic values") {
    const Vec u = softmax({0.0, 0.0, 0.0});
    for (double x : u) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const Vec v = softmax({std::log(2.0), 0.0});
    CHECK(v[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax stays finite under large logits") {
    const Vec v = softmax({1000.0, 0.0});
    CHECK(all_finite(v));
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] >= 0.0);
    CHECK(v[1] < 1e-300);
}

TEST_CASE("softmax rejects empty input") {
    CHECK_THROWS_AS(softmax({}), InvalidShape);
}

TEST_CASE("softmax shift invariance and permutation equivariance") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Vec v(5);
        for (double& x : v) x = rng.uniform(-3.0, 3.0);
        const double c = rng.uniform(-10.0, 10.0);
        Vec shifted = v;
        for (double& x : shifted) x += c;
        const Vec a = softmax(v);
        const Vec b = softmax(shifted);
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
            CHECK(a[i] > 0.0);
            sum += a[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

        Vec reversed(v.rbegin(), v.rend());
        const Vec r = softmax(reversed);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(r[i] == doctest::Approx(a[a.size() - 1 - i]).epsilon(1e-12));
    }
}

TEST_CASE("cross entropy examples") {
    CHECK(cross_entropy({1.0, 0.0, 0.0}, 0) <= 1e-11);
    CHECK(cross_entropy({1.0 / 3, 1.0 / 3, 1.0 / 3}, 1) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    // Hand arithmetic: -ln 0.7685.
    CHECK(cross_entropy({0.7685, 0.2315}, 0) ==
          doctest::Approx(-std::log(0.7685)).epsilon(1e-12));
    CHECK(cross_entropy({0.7685, 0.2315}, 0) == doctest::Approx(0.2634).epsilon(1e-3));
}

TEST_CASE("cross entropy is nonnegative and zero only at certainty") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        Vec logits(4);
        for (double& x : logits) x = rng.uniform(-4.0, 4.0);
        const Vec p = softmax(logits);
        const std::size_t label = rng.index(4);
        CHECK(cross_entropy(p, label) >= 0.0);
        if (p[label] < 1.0) CHECK(cross_entropy(p, label) > 0.0);
    }
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, 2), InvalidLabel);
}

TEST_CASE("sgd step") {
    ParamSet p;
    p.add("w", 1, 1).at(0, 0) = 1.0;
    GradSet g = ParamSet::zeros_like(p);
    g.at("w").at(0, 0) = 1.0;
    OptimizerState st;
    st.kind = OptimKind::SGD;
    st.learning_rate = 0.1;
    optimizer_step(p, g, st);
    CHECK(p.at("w").at(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(st.step_count == 1);
}

TEST_CASE("adamw single step with bias correction") {
    ParamSet p;
    p.add("w", 1, 1).at(0, 0) = 0.0;
    GradSet g = ParamSet::zeros_like(p);
    g.at("w").at(0, 0) = 1.0;
    OptimizerState st;
    st.kind = OptimKind::AdamW;
    st.learning_rate = 0.1;
    st.weight_decay = 0.0;
    optimizer_step(p, g, st);
    // Bias-corrected m-hat = v-hat = 1, so the step is exactly -lr/(1+eps).
    CHECK(p.at("w").at(0, 0) == doctest::Approx(-0.1).epsilon(1e-7));
}

TEST_CASE("zero gradient is a fixed point without weight decay") {
    ParamSet p;
    auto& t = p.add("w", 2, 3);
    Rng rng(5);
    for (double& x : t.data) x = rng.uniform(-1.0, 1.0);
    const Vec before = t.data;
    GradSet g = ParamSet::zeros_like(p);
    OptimizerState st;
    st.weight_decay = 0.0;
    optimizer_step(p, g, st);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(p.at("w").data[i] == before[i]);
}

TEST_CASE("optimizer shape mismatch raises") {
    ParamSet p;
    p.add("w", 2, 2);
    GradSet g;
    g.add("w", 2, 3);
    OptimizerState st;
    CHECK_THROWS_AS(optimizer_step(p, g, st), InvalidShape);
}

TEST_CASE("optimizer is bitwise deterministic") {
    auto run = [] {
        ParamSet p;
        auto& t = p.add("w", 4, 4);
        Rng rng(17);
        for (double& x : t.data) x = rng.uniform(-1.0, 1.0);
        OptimizerState st;
        st.learning_rate = 0.05;
        st.weight_decay = 0.01;
        GradSet g = ParamSet::zeros_like(p);
        Rng grng(18);
        for (int step = 0; step < 25; ++step) {
            for (double& x : g.at("w").data) x = grng.uniform(-1.0, 1.0);
            optimizer_step(p, g, st);
        }
        return p.at("w").data;
    };
    const Vec a = run();
    const Vec b = run();
    CHECK(a == b);
}

TEST_CASE("grad_check accepts the quadratic gradient") {
    ParamSet p;
    auto& t = p.add("p", 1, 2);
    t.at(0, 0) = 1.0;
    t.at(0, 1) = 2.0;
    auto loss = [](const ParamSet& q) {
        const auto& v = q.at("p");
        return v.at(0, 0) * v.at(0, 0) + v.at(0, 1) * v.at(0, 1);
    };
    GradSet g = ParamSet::zeros_like(p);
    g.at("p").at(0, 0) = 2.0;
    g.at("p").at(0, 1) = 4.0;
    CHECK(grad_check(loss, p, g) <= 1e-9);
}

TEST_CASE("grad_check flags a wrong gradient") {
    ParamSet p;
    p.add("p", 1, 1).at(0, 0) = 0.7;
    auto loss = [](const ParamSet& q) { return std::sin(q.at("p").at(0, 0)); };
    GradSet g = ParamSet::zeros_like(p);
    g.at("p").at(0, 0) = 1.0;  // should be cos(0.7)
    CHECK(grad_check(loss, p, g) > 1e-2);
}

TEST_CASE("grad_check rejects non-finite losses") {
    ParamSet p;
    p.add("p", 1, 1).at(0, 0) = 0.0;
    auto loss = [](const ParamSet& q) { return std::log(q.at("p").at(0, 0) - 10.0); };
    GradSet g = ParamSet::zeros_like(p);
    CHECK_THROWS_AS(grad_check(loss, p, g), NumericalFailure);
}

}  // TEST_SUITE
