#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/random.hpp"
#include "stvs/nn/layers.hpp"
#include "stvs/nn/tensor.hpp"

namespace stvs::nn {

/// Shape of the classifier: input window rows x cols, four conv widths and a
/// square odd kernel. Conv blocks use same padding; blocks 2 and 4 are
/// followed by a 2x1 max-pool along time.
struct Architecture {
    int rows = 0;
    int cols = 0;
    std::array<int, 4> channels{16, 32, 64, 64};
    int kernel = 3;

    void validate() const {
        if (rows < 1 || cols < 1) throw ArgumentError("architecture needs a positive input size");
        for (int c : channels)
            if (c < 1) throw ArgumentError("conv channel counts must be positive");
        if (kernel < 1 || kernel % 2 == 0) throw ArgumentError("kernel size must be a positive odd number");
    }

    int pooled_cols() const noexcept {
        return TimePool<float>::out_w(TimePool<float>::out_w(cols));
    }
    int flat_features() const noexcept { return channels[3] * rows * pooled_cols(); }

    bool operator==(const Architecture&) const = default;
};

inline nlohmann::json to_json(const Architecture& a) {
    return {{"rows", a.rows},
            {"cols", a.cols},
            {"channels", a.channels},
            {"kernel", a.kernel},
            {"blocks", "conv-bn-relu x4, time max-pool 2x1 after blocks 2 and 4, dense, softmax"},
            {"classes", 2}};
}

inline Architecture architecture_from_json(const nlohmann::json& j) {
    Architecture a;
    a.rows = j.at("rows").get<int>();
    a.cols = j.at("cols").get<int>();
    a.channels = j.at("channels").get<std::array<int, 4>>();
    a.kernel = j.at("kernel").get<int>();
    a.validate();
    return a;
}

/// Four conv/batch-norm/ReLU blocks, a dense layer and a 2-way softmax.
/// Class 1 is "unstable". The dense head starts at zero, so an untrained
/// model outputs (0.5, 0.5).
template <typename T>
class CnnClassifier {
  public:
    static constexpr int kClasses = 2;
    static constexpr std::array<bool, 4> kPoolAfter{false, true, false, true};

    CnnClassifier() = default;
    CnnClassifier(Architecture arch, std::uint64_t seed) : arch_(arch) {
        arch_.validate();
        const int pad = arch_.kernel / 2;
        int in = 1;
        for (std::size_t i = 0; i < 4; ++i) {
            conv_[i] = Conv2d<T>(in, arch_.channels[i], arch_.kernel, pad);
            bn_[i] = BatchNorm2d<T>(arch_.channels[i]);
            in = arch_.channels[i];
        }
        fc_ = Dense<T>(arch_.flat_features(), kClasses);
        Rng rng(seed);
        for (auto& c : conv_) c.init(rng);
    }

    const Architecture& arch() const noexcept { return arch_; }

    /// Affine map applied to raw inputs before the first conv.
    T input_shift = T(0);
    T input_scale = T(1);

    /// Logits for a batch of single-channel windows.
    const RowMat<T>& forward(const Tensor<T>& x, bool train) {
        if (x.c != 1 || x.h != arch_.rows || x.w != arch_.cols)
            throw ArgumentError("input " + x.shape_string() + " does not match the architecture (1x" +
                                std::to_string(arch_.rows) + "x" + std::to_string(arch_.cols) + ")");
        input_ = x;
        for (auto& v : input_.v) v = (v - input_shift) * input_scale;
        const Tensor<T>* t = &input_;
        for (std::size_t i = 0; i < 4; ++i) {
            conv_[i].forward(*t, conv_out_[i]);
            bn_[i].forward(conv_out_[i], act_[i], train);
            relu_[i].forward(act_[i]);
            t = &act_[i];
            if (kPoolAfter[i]) {
                pool_[i].forward(act_[i], pool_out_[i]);
                t = &pool_out_[i];
            }
        }
        fc_.forward(*t, logits_);
        return logits_;
    }

    /// Back-propagates d(loss)/d(logits) from the last forward call. Parameter
    /// gradients accumulate; the gradient with respect to the raw input is
    /// available from input_grad() when `want_input` is set.
    void backward(const RowMat<T>& dlogits, bool want_input = false) {
        fc_.backward(dlogits, &g_);
        for (std::size_t k = 4; k-- > 0;) {
            if (kPoolAfter[k]) {
                pool_[k].backward(g_, g2_);
                std::swap(g_, g2_);
            }
            relu_[k].backward(g_);
            bn_[k].backward(g_, &g2_);
            const bool need_dx = k > 0 || want_input;
            conv_[k].backward(g2_, need_dx ? &g_ : nullptr);
        }
        if (want_input)
            for (auto& v : g_.v) v *= input_scale;
    }

    const Tensor<T>& input_grad() const noexcept { return g_; }

    void zero_grad() {
        for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), T(0));
    }

    /// Trainable tensors in layer order.
    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> ps;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::string l = "conv" + std::to_string(i + 1);
            auto& c = conv_[i];
            ps.push_back({l + ".weight", {c.out_channels(), c.in_channels(), c.kernel(), c.kernel()}, &c.w, &c.gw});
            ps.push_back({l + ".bias", {c.out_channels()}, &c.b, &c.gb});
            const std::string b = "bn" + std::to_string(i + 1);
            ps.push_back({b + ".gamma", {bn_[i].channels()}, &bn_[i].gamma, &bn_[i].ggamma});
            ps.push_back({b + ".beta", {bn_[i].channels()}, &bn_[i].beta, &bn_[i].gbeta});
        }
        ps.push_back({"fc.weight", {fc_.out_features(), fc_.in_features()}, &fc_.w, &fc_.gw});
        ps.push_back({"fc.bias", {fc_.out_features()}, &fc_.b, &fc_.gb});
        return ps;
    }

    /// Non-trainable state (batch-norm running statistics) in layer order.
    std::vector<ParamRef<T>> buffers() {
        std::vector<ParamRef<T>> bs;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::string b = "bn" + std::to_string(i + 1);
            bs.push_back({b + ".running_mean", {bn_[i].channels()}, &bn_[i].running_mean, nullptr});
            bs.push_back({b + ".running_var", {bn_[i].channels()}, &bn_[i].running_var, nullptr});
        }
        return bs;
    }

    /// Every tensor a checkpoint stores: parameters, then buffers.
    std::vector<ParamRef<T>> state() {
        auto s = params();
        for (auto& b : buffers()) s.push_back(b);
        return s;
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto& p : params()) n += p.value->size();
        return n;
    }

    /// Copies weights, buffers and input scaling from a model of the same
    /// architecture.
    void copy_state_from(CnnClassifier& other) {
        if (!(other.arch_ == arch_)) throw ArgumentError("cannot copy state between different architectures");
        auto dst = state(), src = other.state();
        for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i].value;
        input_shift = other.input_shift;
        input_scale = other.input_scale;
    }

  private:
    Architecture arch_;
    std::array<Conv2d<T>, 4> conv_;
    std::array<BatchNorm2d<T>, 4> bn_;
    std::array<Relu<T>, 4> relu_;
    std::array<TimePool<T>, 4> pool_;
    Dense<T> fc_;
    Tensor<T> input_, g_, g2_;
    std::array<Tensor<T>, 4> conv_out_, act_, pool_out_;
    RowMat<T> logits_;
};

}  // namespace stvs::nn
