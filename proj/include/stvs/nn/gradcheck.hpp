#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stvs/core/random.hpp"
#include "stvs/nn/cnn.hpp"
#include "stvs/nn/layers.hpp"

namespace stvs::nn {

/// Result of comparing analytic gradients to central finite differences.
/// The error of one tensor is ||analytic - numeric|| / max(||analytic||,
/// ||numeric||, floor); the report keeps the largest over all tensors. The
/// floor turns the comparison absolute for tensors whose true gradient is
/// zero, such as a conv bias feeding a train-mode batch norm, where the
/// numeric estimate is pure rounding noise.
struct GradCheckReport {
    static constexpr double kNormFloor = 1e-6;
    double max_rel_error = 0.0;
    std::string worst;  ///< tensor with the largest error
    std::size_t checked = 0;

    bool passed(double tol) const noexcept { return max_rel_error <= tol; }

    void add(const std::string& name, const std::vector<double>& analytic, const std::vector<double>& numeric) {
        double d = 0.0, a = 0.0, n = 0.0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            d += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            a += analytic[i] * analytic[i];
            n += numeric[i] * numeric[i];
        }
        const double err = std::sqrt(d) / std::max({std::sqrt(a), std::sqrt(n), kNormFloor});
        checked += analytic.size();
        if (err >= max_rel_error) {
            max_rel_error = err;
            worst = name;
        }
    }
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Central differences of `loss` with respect to every entry of `x`.
inline std::vector<double> numeric_gradient(std::vector<double>& x, const std::function<double()>& loss,
                                            double h = kFiniteDifferenceStep) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double lp = loss();
        x[i] = keep - h;
        const double lm = loss();
        x[i] = keep;
        g[i] = (lp - lm) / (2.0 * h);
    }
    return g;
}

namespace detail {

inline void fill_uniform(std::vector<double>& v, Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (auto& x : v) x = rng.uniform(lo, hi);
}

/// Projection loss sum(y * r) with a fixed random r, the standard probe for
/// checking a layer's backward pass in isolation.
inline double project(const std::vector<double>& y, const std::vector<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
}

}  // namespace detail

inline GradCheckReport check_conv(int n, int in_c, int out_c, int h, int w, int k, int pad, std::uint64_t seed) {
    Rng rng(seed);
    Conv2d<double> conv(in_c, out_c, k, pad);
    detail::fill_uniform(conv.w, rng);
    detail::fill_uniform(conv.b, rng);
    Tensor<double> x(n, in_c, h, w), y;
    detail::fill_uniform(x.v, rng);
    conv.forward(x, y);
    std::vector<double> r(y.size());
    detail::fill_uniform(r, rng);
    Tensor<double> dy = y, dx;
    dy.v = r;
    conv.backward(dy, &dx);
    auto loss = [&] {
        Tensor<double> out;
        conv.forward(x, out);
        return detail::project(out.v, r);
    };
    GradCheckReport rep;
    const auto gw = conv.gw, gb = conv.gb;
    rep.add("conv.input", dx.v, numeric_gradient(x.v, loss));
    rep.add("conv.weight", gw, numeric_gradient(conv.w, loss));
    rep.add("conv.bias", gb, numeric_gradient(conv.b, loss));
    return rep;
}

inline GradCheckReport check_batchnorm(int n, int c, int h, int w, bool train, std::uint64_t seed) {
    Rng rng(seed);
    BatchNorm2d<double> bn(c);
    detail::fill_uniform(bn.gamma, rng, 0.5, 1.5);
    detail::fill_uniform(bn.beta, rng);
    detail::fill_uniform(bn.running_mean, rng, -0.2, 0.2);
    detail::fill_uniform(bn.running_var, rng, 0.5, 1.5);
    Tensor<double> x(n, c, h, w), y;
    detail::fill_uniform(x.v, rng, -2.0, 2.0);
    // Eval mode must not see running statistics drift between probes.
    const auto rm = bn.running_mean, rv = bn.running_var;
    bn.forward(x, y, train);
    std::vector<double> r(y.size());
    detail::fill_uniform(r, rng);
    Tensor<double> dy = y, dx;
    dy.v = r;
    bn.backward(dy, &dx);
    auto loss = [&] {
        bn.running_mean = rm;
        bn.running_var = rv;
        Tensor<double> out;
        bn.forward(x, out, train);
        return detail::project(out.v, r);
    };
    GradCheckReport rep;
    const auto gg = bn.ggamma, gbt = bn.gbeta;
    rep.add("bn.input", dx.v, numeric_gradient(x.v, loss));
    rep.add("bn.gamma", gg, numeric_gradient(bn.gamma, loss));
    rep.add("bn.beta", gbt, numeric_gradient(bn.beta, loss));
    return rep;
}

inline GradCheckReport check_relu(int n, int c, int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    Relu<double> relu;
    Tensor<double> x(n, c, h, w);
    detail::fill_uniform(x.v, rng);
    // Keep probes away from the kink at zero.
    for (auto& v : x.v)
        if (std::abs(v) < 1e-3) v = 1e-3;
    Tensor<double> y = x;
    relu.forward(y);
    std::vector<double> r(y.size());
    detail::fill_uniform(r, rng);
    Tensor<double> g = y;
    g.v = r;
    relu.backward(g);
    auto loss = [&] {
        Tensor<double> out = x;
        Relu<double> probe;
        probe.forward(out);
        return detail::project(out.v, r);
    };
    GradCheckReport rep;
    rep.add("relu.input", g.v, numeric_gradient(x.v, loss));
    return rep;
}

inline GradCheckReport check_time_pool(int n, int c, int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    TimePool<double> pool;
    Tensor<double> x(n, c, h, w), y;
    detail::fill_uniform(x.v, rng);
    pool.forward(x, y);
    std::vector<double> r(y.size());
    detail::fill_uniform(r, rng);
    Tensor<double> dy = y, dx;
    dy.v = r;
    pool.backward(dy, dx);
    auto loss = [&] {
        TimePool<double> probe;
        Tensor<double> out;
        probe.forward(x, out);
        return detail::project(out.v, r);
    };
    GradCheckReport rep;
    rep.add("pool.input", dx.v, numeric_gradient(x.v, loss));
    return rep;
}

inline GradCheckReport check_dense(int n, int in, int out, std::uint64_t seed) {
    Rng rng(seed);
    Dense<double> fc(in, out);
    detail::fill_uniform(fc.w, rng);
    detail::fill_uniform(fc.b, rng);
    Tensor<double> x(n, in, 1, 1);
    detail::fill_uniform(x.v, rng);
    RowMat<double> y;
    fc.forward(x, y);
    RowMat<double> r(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.uniform(-1.0, 1.0);
    Tensor<double> dx;
    fc.backward(r, &dx);
    auto loss = [&] {
        RowMat<double> o;
        fc.forward(x, o);
        return (o.array() * r.array()).sum();
    };
    GradCheckReport rep;
    const auto gw = fc.gw, gb = fc.gb;
    rep.add("dense.input", dx.v, numeric_gradient(x.v, loss));
    rep.add("dense.weight", gw, numeric_gradient(fc.w, loss));
    rep.add("dense.bias", gb, numeric_gradient(fc.b, loss));
    return rep;
}

inline GradCheckReport check_softmax_ce(int n, int classes, std::uint64_t seed) {
    Rng rng(seed);
    RowMat<double> z(n, classes);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.uniform(-3.0, 3.0);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    RowMat<double> g;
    softmax_cross_entropy<double>(z, y, &g);
    std::vector<double> zv(z.data(), z.data() + z.size());
    auto loss = [&] {
        const RowMat<double> zz = Eigen::Map<const RowMat<double>>(zv.data(), n, classes);
        return softmax_cross_entropy<double>(zz, y, nullptr);
    };
    GradCheckReport rep;
    rep.add("softmax_ce.logits", std::vector<double>(g.data(), g.data() + g.size()), numeric_gradient(zv, loss));
    return rep;
}

/// End-to-end check of the full classifier in train mode with cross-entropy
/// on random labels, over every parameter tensor and the input.
inline GradCheckReport check_model(const Architecture& arch, int batch, std::uint64_t seed) {
    Rng rng(seed);
    CnnClassifier<double> model(arch, seed);
    // A non-zero head so gradients reach every layer.
    for (auto& p : model.params())
        if (p.name.rfind("fc.", 0) == 0) detail::fill_uniform(*p.value, rng, -0.5, 0.5);
    for (auto& p : model.params())
        if (p.name.find(".beta") != std::string::npos || p.name.find(".bias") != std::string::npos)
            detail::fill_uniform(*p.value, rng, -0.1, 0.1);
    Tensor<double> x(batch, 1, arch.rows, arch.cols);
    detail::fill_uniform(x.v, rng);
    std::vector<int> y(static_cast<std::size_t>(batch));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);

    RowMat<double> g;
    model.zero_grad();
    softmax_cross_entropy<double>(model.forward(x, true), y, &g);
    model.backward(g, true);
    const auto input_grad = model.input_grad().v;
    std::vector<std::vector<double>> grads;
    for (auto& p : model.params()) grads.push_back(*p.grad);

    auto loss = [&] { return softmax_cross_entropy<double>(model.forward(x, true), y, nullptr); };
    GradCheckReport rep;
    auto ps = model.params();
    for (std::size_t k = 0; k < ps.size(); ++k) rep.add(ps[k].name, grads[k], numeric_gradient(*ps[k].value, loss));
    rep.add("input", input_grad, numeric_gradient(x.v, loss));
    return rep;
}

}  // namespace stvs::nn
