#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/core/random.hpp"
#include "stvs/nn/tensor.hpp"

namespace stvs::nn {

/// Named view of one trainable tensor and its gradient accumulator.
template <typename T>
struct ParamRef {
    std::string name;
    std::vector<int> dims;
    std::vector<T>* value;
    std::vector<T>* grad;
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;

/// Stride-1 2-D cross-correlation with symmetric zero padding. Lowered to a
/// GEMM per sample through an im2col buffer.
template <typename T>
class Conv2d {
  public:
    Conv2d() = default;
    Conv2d(int in_c, int out_c, int k, int pad) : in_c_(in_c), out_c_(out_c), k_(k), pad_(pad) {
        if (in_c < 1 || out_c < 1 || k < 1 || pad < 0) throw ArgumentError("invalid convolution geometry");
        const auto nw = static_cast<std::size_t>(out_c) * in_c * k * k;
        w.assign(nw, T(0));
        gw.assign(nw, T(0));
        b.assign(static_cast<std::size_t>(out_c), T(0));
        gb.assign(static_cast<std::size_t>(out_c), T(0));
    }

    int in_channels() const noexcept { return in_c_; }
    int out_channels() const noexcept { return out_c_; }
    int kernel() const noexcept { return k_; }
    int padding() const noexcept { return pad_; }
    int out_h(int h) const noexcept { return h + 2 * pad_ - k_ + 1; }
    int out_w(int wd) const noexcept { return wd + 2 * pad_ - k_ + 1; }

    /// He-style uniform fan-in initialization; biases start at zero.
    void init(Rng& rng) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in_c_ * k_ * k_));
        for (auto& x : w) x = static_cast<T>(rng.uniform(-bound, bound));
        std::fill(b.begin(), b.end(), T(0));
    }

    void forward(const Tensor<T>& x, Tensor<T>& y) {
        if (x.c != in_c_) throw ArgumentError("conv input has " + std::to_string(x.c) + " channels, expected " +
                                              std::to_string(in_c_));
        const int ho = out_h(x.h), wo = out_w(x.w);
        if (ho < 1 || wo < 1) throw ArgumentError("conv input " + x.shape_string() + " smaller than the kernel");
        x_ = &x;
        y.resize(x.n, out_c_, ho, wo);
        const ConstRowMap<T> wm(w.data(), out_c_, in_c_ * k_ * k_);
        for (int i = 0; i < x.n; ++i) {
            im2col(x, i, ho, wo);
            RowMap<T> ym(y.sample(i), out_c_, ho * wo);
            ym.noalias() = wm * col_;
            for (int o = 0; o < out_c_; ++o) ym.row(o).array() += b[static_cast<std::size_t>(o)];
        }
    }

    /// Accumulates parameter gradients; writes the input gradient when `dx`
    /// is non-null. Uses the input seen by the last forward call.
    void backward(const Tensor<T>& dy, Tensor<T>* dx) {
        const Tensor<T>& x = *x_;
        const int ho = out_h(x.h), wo = out_w(x.w);
        const ConstRowMap<T> wm(w.data(), out_c_, in_c_ * k_ * k_);
        RowMap<T> gwm(gw.data(), out_c_, in_c_ * k_ * k_);
        if (dx) dx->resize(x.n, x.c, x.h, x.w);
        for (int i = 0; i < x.n; ++i) {
            const ConstRowMap<T> dym(dy.sample(i), out_c_, ho * wo);
            im2col(x, i, ho, wo);
            gwm.noalias() += dym * col_.transpose();
            // Plain loop: Eigen's vectorized sum peels by address alignment, which
            // would make the rounding depend on where the batch buffer landed.
            for (int o = 0; o < out_c_; ++o) {
                const T* row = dym.data() + static_cast<std::ptrdiff_t>(o) * ho * wo;
                T s = T(0);
                for (int j = 0; j < ho * wo; ++j) s += row[j];
                gb[static_cast<std::size_t>(o)] += s;
            }
            if (dx) {
                dcol_.noalias() = wm.transpose() * dym;
                col2im(*dx, i, ho, wo);
            }
        }
    }

    std::vector<T> w, b, gw, gb;

  private:
    void im2col(const Tensor<T>& x, int i, int ho, int wo) {
        col_.resize(in_c_ * k_ * k_, ho * wo);
        const T* src = x.sample(i);
        for (int c = 0; c < in_c_; ++c)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx) {
                    T* row = col_.data() + static_cast<std::ptrdiff_t>(((c * k_ + ky) * k_ + kx)) * ho * wo;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy + ky - pad_;
                        T* out = row + static_cast<std::ptrdiff_t>(oy) * wo;
                        if (iy < 0 || iy >= x.h) {
                            std::fill(out, out + wo, T(0));
                            continue;
                        }
                        const T* in = src + (static_cast<std::ptrdiff_t>(c) * x.h + iy) * x.w;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox + kx - pad_;
                            out[ox] = (ix >= 0 && ix < x.w) ? in[ix] : T(0);
                        }
                    }
                }
    }

    void col2im(Tensor<T>& dx, int i, int ho, int wo) const {
        T* dst = dx.sample(i);
        for (int c = 0; c < in_c_; ++c)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx) {
                    const T* row = dcol_.data() + static_cast<std::ptrdiff_t>(((c * k_ + ky) * k_ + kx)) * ho * wo;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy + ky - pad_;
                        if (iy < 0 || iy >= dx.h) continue;
                        T* out = dst + (static_cast<std::ptrdiff_t>(c) * dx.h + iy) * dx.w;
                        const T* in = row + static_cast<std::ptrdiff_t>(oy) * wo;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox + kx - pad_;
                            if (ix >= 0 && ix < dx.w) out[ix] += in[ox];
                        }
                    }
                }
    }

    int in_c_ = 0, out_c_ = 0, k_ = 1, pad_ = 0;
    const Tensor<T>* x_ = nullptr;
    RowMat<T> col_, dcol_;
};

/// Per-channel batch normalization over (N, H, W). Running statistics follow
/// r <- momentum * r + (1 - momentum) * batch, with the biased batch variance.
template <typename T>
class BatchNorm2d {
  public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels, double momentum = 0.9, double eps = 1e-5)
        : momentum_(momentum), eps_(eps) {
        if (channels < 1) throw ArgumentError("batch norm needs at least one channel");
        const auto c = static_cast<std::size_t>(channels);
        gamma.assign(c, T(1));
        beta.assign(c, T(0));
        ggamma.assign(c, T(0));
        gbeta.assign(c, T(0));
        running_mean.assign(c, T(0));
        running_var.assign(c, T(1));
    }

    int channels() const noexcept { return static_cast<int>(gamma.size()); }
    double eps() const noexcept { return eps_; }
    double momentum() const noexcept { return momentum_; }

    void forward(const Tensor<T>& x, Tensor<T>& y, bool train) {
        if (x.c != channels()) throw ArgumentError("batch norm channel mismatch");
        if (train && x.n < 2) throw ArgumentError("batch norm in train mode needs a batch of at least 2");
        y.resize(x.n, x.c, x.h, x.w);
        xhat_.resize(x.n, x.c, x.h, x.w);
        inv_std_.assign(gamma.size(), T(0));
        train_ = train;
        const std::size_t plane = x.plane();
        const double count = static_cast<double>(x.n) * static_cast<double>(plane);
        for (int ch = 0; ch < x.c; ++ch) {
            const auto c = static_cast<std::size_t>(ch);
            double mean, var;
            if (train) {
                double s = 0.0;
                for (int i = 0; i < x.n; ++i) {
                    const T* p = x.sample(i) + c * plane;
                    for (std::size_t k = 0; k < plane; ++k) s += static_cast<double>(p[k]);
                }
                mean = s / count;
                double ss = 0.0;
                for (int i = 0; i < x.n; ++i) {
                    const T* p = x.sample(i) + c * plane;
                    for (std::size_t k = 0; k < plane; ++k) {
                        const double d = static_cast<double>(p[k]) - mean;
                        ss += d * d;
                    }
                }
                var = ss / count;
                running_mean[c] = static_cast<T>(momentum_ * static_cast<double>(running_mean[c]) + (1.0 - momentum_) * mean);
                running_var[c] = static_cast<T>(momentum_ * static_cast<double>(running_var[c]) + (1.0 - momentum_) * var);
            } else {
                mean = static_cast<double>(running_mean[c]);
                var = static_cast<double>(running_var[c]);
            }
            const T inv = static_cast<T>(1.0 / std::sqrt(var + eps_));
            const T mu = static_cast<T>(mean);
            inv_std_[c] = inv;
            for (int i = 0; i < x.n; ++i) {
                const T* p = x.sample(i) + c * plane;
                T* xh = xhat_.sample(i) + c * plane;
                T* q = y.sample(i) + c * plane;
                for (std::size_t k = 0; k < plane; ++k) {
                    xh[k] = (p[k] - mu) * inv;
                    q[k] = gamma[c] * xh[k] + beta[c];
                }
            }
        }
    }

    void backward(const Tensor<T>& dy, Tensor<T>* dx) {
        const std::size_t plane = xhat_.plane();
        const double count = static_cast<double>(xhat_.n) * static_cast<double>(plane);
        if (dx) dx->resize(xhat_.n, xhat_.c, xhat_.h, xhat_.w);
        for (int ch = 0; ch < xhat_.c; ++ch) {
            const auto c = static_cast<std::size_t>(ch);
            double sum_dy = 0.0, sum_dy_xh = 0.0;
            for (int i = 0; i < xhat_.n; ++i) {
                const T* g = dy.sample(i) + c * plane;
                const T* xh = xhat_.sample(i) + c * plane;
                for (std::size_t k = 0; k < plane; ++k) {
                    sum_dy += static_cast<double>(g[k]);
                    sum_dy_xh += static_cast<double>(g[k]) * static_cast<double>(xh[k]);
                }
            }
            gbeta[c] += static_cast<T>(sum_dy);
            ggamma[c] += static_cast<T>(sum_dy_xh);
            if (!dx) continue;
            const T scale = gamma[c] * inv_std_[c];
            if (!train_) {
                for (int i = 0; i < xhat_.n; ++i) {
                    const T* g = dy.sample(i) + c * plane;
                    T* d = dx->sample(i) + c * plane;
                    for (std::size_t k = 0; k < plane; ++k) d[k] = scale * g[k];
                }
                continue;
            }
            const T m_dy = static_cast<T>(sum_dy / count), m_dyxh = static_cast<T>(sum_dy_xh / count);
            for (int i = 0; i < xhat_.n; ++i) {
                const T* g = dy.sample(i) + c * plane;
                const T* xh = xhat_.sample(i) + c * plane;
                T* d = dx->sample(i) + c * plane;
                for (std::size_t k = 0; k < plane; ++k) d[k] = scale * (g[k] - m_dy - xh[k] * m_dyxh);
            }
        }
    }

    std::vector<T> gamma, beta, ggamma, gbeta, running_mean, running_var;

  private:
    double momentum_ = 0.9, eps_ = 1e-5;
    bool train_ = false;
    Tensor<T> xhat_;
    std::vector<T> inv_std_;
};

/// Elementwise max(0, x), applied in place.
template <typename T>
class Relu {
  public:
    void forward(Tensor<T>& x) {
        mask_.resize(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            mask_[k] = x.v[k] > T(0);
            if (!mask_[k]) x.v[k] = T(0);
        }
    }
    void backward(Tensor<T>& dy) const {
        for (std::size_t k = 0; k < dy.size(); ++k)
            if (!mask_[k]) dy.v[k] = T(0);
    }

  private:
    std::vector<unsigned char> mask_;
};

/// Non-overlapping max-pool of width 2 along W (time). A width-1 input passes
/// through unchanged; an odd trailing column is dropped.
template <typename T>
class TimePool {
  public:
    static int out_w(int w) noexcept { return w >= 2 ? w / 2 : w; }

    void forward(const Tensor<T>& x, Tensor<T>& y) {
        const int wo = out_w(x.w);
        const int span = x.w >= 2 ? 2 : 1;
        in_shape_ = {x.n, x.c, x.h, x.w};
        y.resize(x.n, x.c, x.h, wo);
        arg_.resize(y.size());
        std::size_t o = 0;
        for (int i = 0; i < x.n; ++i)
            for (int c = 0; c < x.c; ++c)
                for (int r = 0; r < x.h; ++r) {
                    const std::size_t base = ((static_cast<std::size_t>(i) * x.c + c) * x.h + r) * x.w;
                    for (int t = 0; t < wo; ++t, ++o) {
                        std::size_t best = base + static_cast<std::size_t>(t) * span;
                        for (int s = 1; s < span; ++s)
                            if (x.v[best + 1] > x.v[best]) best = best + 1;
                        y.v[o] = x.v[best];
                        arg_[o] = best;
                    }
                }
    }

    void backward(const Tensor<T>& dy, Tensor<T>& dx) const {
        dx.resize(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
        for (std::size_t o = 0; o < dy.size(); ++o) dx.v[arg_[o]] += dy.v[o];
    }

  private:
    std::array<int, 4> in_shape_{};
    std::vector<std::size_t> arg_;
};

/// Fully connected layer on the flattened per-sample tensor.
template <typename T>
class Dense {
  public:
    Dense() = default;
    Dense(int in, int out) : in_(in), out_(out) {
        if (in < 1 || out < 1) throw ArgumentError("invalid dense layer size");
        w.assign(static_cast<std::size_t>(in) * out, T(0));
        gw.assign(w.size(), T(0));
        b.assign(static_cast<std::size_t>(out), T(0));
        gb.assign(b.size(), T(0));
    }

    int in_features() const noexcept { return in_; }
    int out_features() const noexcept { return out_; }

    /// x: n x in (flattened), returns logits n x out.
    void forward(const Tensor<T>& x, RowMat<T>& y) {
        if (static_cast<int>(x.per_sample()) != in_)
            throw ArgumentError("dense input has " + std::to_string(x.per_sample()) + " features, expected " +
                                std::to_string(in_));
        x_ = &x;
        const ConstRowMap<T> xm(x.v.data(), x.n, in_);
        const ConstRowMap<T> wm(w.data(), out_, in_);
        y.noalias() = xm * wm.transpose();
        for (int o = 0; o < out_; ++o) y.col(o).array() += b[static_cast<std::size_t>(o)];
    }

    void backward(const RowMat<T>& dy, Tensor<T>* dx) {
        const Tensor<T>& x = *x_;
        const ConstRowMap<T> xm(x.v.data(), x.n, in_);
        const ConstRowMap<T> wm(w.data(), out_, in_);
        RowMap<T> gwm(gw.data(), out_, in_);
        gwm.noalias() += dy.transpose() * xm;
        for (int o = 0; o < out_; ++o) gb[static_cast<std::size_t>(o)] += dy.col(o).sum();
        if (dx) {
            dx->resize(x.n, x.c, x.h, x.w);
            RowMap<T> dxm(dx->v.data(), x.n, in_);
            dxm.noalias() = dy * wm;
        }
    }

    std::vector<T> w, b, gw, gb;

  private:
    int in_ = 0, out_ = 0;
    const Tensor<T>* x_ = nullptr;
};

/// Row-wise softmax with max subtraction.
template <typename T>
RowMat<T> softmax(const RowMat<T>& logits) {
    RowMat<T> p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const T mx = logits.row(i).maxCoeff();
        T s = T(0);
        for (Eigen::Index j = 0; j < logits.cols(); ++j) s += p(i, j) = std::exp(logits(i, j) - mx);
        p.row(i) /= s;
    }
    return p;
}

/// Mean cross-entropy of softmax(logits) against integer labels; writes the
/// gradient (p - onehot) / n into `grad` when non-null.
template <typename T>
double softmax_cross_entropy(const RowMat<T>& logits, const std::vector<int>& labels, RowMat<T>* grad) {
    const auto n = logits.rows();
    if (n == 0 || static_cast<Eigen::Index>(labels.size()) != n)
        throw ArgumentError("cross-entropy needs one label per row");
    const RowMat<T> p = softmax(logits);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= logits.cols()) throw ArgumentError("label out of range");
        loss -= std::log(std::max(static_cast<double>(p(i, y)), std::numeric_limits<double>::min()));
    }
    if (grad) {
        *grad = p;
        for (Eigen::Index i = 0; i < n; ++i) (*grad)(i, labels[static_cast<std::size_t>(i)]) -= T(1);
        *grad /= static_cast<T>(n);
    }
    return loss / static_cast<double>(n);
}

}  // namespace stvs::nn
