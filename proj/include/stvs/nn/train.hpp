#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/hash.hpp"
#include "stvs/core/random.hpp"
#include "stvs/nn/cnn.hpp"

namespace stvs::nn {

/// Labeled single-channel windows stored contiguously in float32, one
/// rows x cols row-major block per sample. Labels are 0 (stable) / 1 (unstable).
struct WindowSet {
    int rows = 0;
    int cols = 0;
    std::vector<float> x;
    std::vector<int> y;
    std::vector<std::uint64_t> ids;  ///< sample ids, for provenance and disjointness checks

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
    std::size_t block() const noexcept { return static_cast<std::size_t>(rows) * cols; }

    const float* sample(std::size_t i) const noexcept { return x.data() + i * block(); }

    template <typename Derived>
    void add(const Eigen::MatrixBase<Derived>& m, int label, std::uint64_t id) {
        if (empty() && rows == 0 && cols == 0) {
            rows = static_cast<int>(m.rows());
            cols = static_cast<int>(m.cols());
        }
        if (m.rows() != rows || m.cols() != cols) throw ArgumentError("window shape differs from the set");
        if (label != 0 && label != 1) throw ArgumentError("labels must be 0 or 1");
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) x.push_back(static_cast<float>(m(r, c)));
        y.push_back(label);
        ids.push_back(id);
    }

    WindowSet subset(const std::vector<std::size_t>& idx) const {
        WindowSet s;
        s.rows = rows;
        s.cols = cols;
        s.x.reserve(idx.size() * block());
        for (std::size_t i : idx) {
            if (i >= size()) throw ArgumentError("subset index out of range");
            s.x.insert(s.x.end(), sample(i), sample(i) + block());
            s.y.push_back(y[i]);
            s.ids.push_back(ids[i]);
        }
        return s;
    }

    /// Keeps the first `n` time columns of every window.
    WindowSet leading_columns(int n) const {
        if (n < 1 || n > cols) throw ArgumentError("column prefix out of range");
        WindowSet s;
        s.rows = rows;
        s.cols = n;
        s.y = y;
        s.ids = ids;
        s.x.reserve(size() * static_cast<std::size_t>(rows) * n);
        for (std::size_t i = 0; i < size(); ++i)
            for (int r = 0; r < rows; ++r) {
                const float* row = sample(i) + static_cast<std::size_t>(r) * cols;
                s.x.insert(s.x.end(), row, row + n);
            }
        return s;
    }

    std::size_t positives() const noexcept { return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)); }

    std::string content_hash() const {
        ContentHash h;
        h.value(rows);
        h.value(cols);
        h.values(std::span<const float>(x));
        h.values(std::span<const int>(y));
        h.values(std::span<const std::uint64_t>(ids));
        return h.hex();
    }
};

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 50;
    std::uint64_t seed = 1;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 5;  ///< early stop after this many epochs without validation gain; 0 disables
    bool freeze_conv = false;       ///< fine-tune only the dense head
    double finetune_lr_scale = 0.1;
    int finetune_epochs = 15;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning rate must be > 0");
        if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
        if (epochs < 1) throw ArgumentError("epoch budget must be >= 1");
        if (patience < 0) throw ArgumentError("patience must be >= 0");
        if (!(finetune_lr_scale > 0.0)) throw ArgumentError("fine-tune learning-rate scale must be > 0");
        if (finetune_epochs < 0) throw ArgumentError("fine-tune epoch budget must be >= 0");
    }
};

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"adam_eps", c.adam_eps},
            {"patience", c.patience},
            {"freeze_conv", c.freeze_conv},
            {"finetune_lr_scale", c.finetune_lr_scale},
            {"finetune_epochs", c.finetune_epochs}};
}

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;       ///< mean training loss over the epoch
    double train_acc = 0.0;  ///< percent, from train-mode batch predictions
    double val_acc = -1.0;   ///< percent; -1 when no validation set
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int best_epoch = -1;
    double best_val_acc = -1.0;
    bool early_stopped = false;
};

inline nlohmann::json to_json(const TrainLog& log) {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& x : log.epochs)
        e.push_back({{"epoch", x.epoch}, {"loss", x.loss}, {"train_acc", x.train_acc}, {"val_acc", x.val_acc}});
    return {{"epochs", e},
            {"best_epoch", log.best_epoch},
            {"best_val_acc", log.best_val_acc},
            {"early_stopped", log.early_stopped}};
}

namespace detail {

template <typename T>
void fill_batch(const WindowSet& set, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                Tensor<T>& x, std::vector<int>& y) {
    x.resize(static_cast<int>(end - begin), 1, set.rows, set.cols);
    y.clear();
    T* dst = x.v.data();
    for (std::size_t k = begin; k < end; ++k) {
        const float* src = set.sample(idx[k]);
        for (std::size_t j = 0; j < set.block(); ++j) *dst++ = static_cast<T>(src[j]);
        y.push_back(set.y[idx[k]]);
    }
}

/// Batch boundaries; a trailing batch of one sample is merged into the
/// previous one because batch norm needs two samples in train mode.
inline std::vector<std::size_t> batch_bounds(std::size_t n, std::size_t batch) {
    std::vector<std::size_t> b{0};
    while (b.back() < n) b.push_back(std::min(n, b.back() + batch));
    if (b.size() > 2 && b[b.size() - 1] - b[b.size() - 2] == 1) b.erase(b.end() - 2);
    return b;
}

template <typename T>
class Optimizer {
  public:
    Optimizer(CnnClassifier<T>& model, const TrainConfig& cfg, double lr) : cfg_(cfg), lr_(lr) {
        for (auto& p : model.params()) {
            m_.emplace_back(p.value->size(), 0.0);
            v_.emplace_back(p.value->size(), 0.0);
        }
    }

    void step(CnnClassifier<T>& model) {
        ++t_;
        auto ps = model.params();
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_), bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (cfg_.freeze_conv && ps[k].name.rfind("fc.", 0) != 0) continue;
            auto& w = *ps[k].value;
            const auto& g = *ps[k].grad;
            if (cfg_.optimizer == OptimizerKind::sgd) {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= static_cast<T>(lr_ * static_cast<double>(g[i]));
                continue;
            }
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double gi = static_cast<double>(g[i]);
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
                const double upd = lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.adam_eps);
                w[i] -= static_cast<T>(upd);
            }
        }
    }

  private:
    TrainConfig cfg_;
    double lr_;
    int t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

inline void check_compatible(const Architecture& a, const WindowSet& s, const char* what) {
    if (s.rows != a.rows || s.cols != a.cols)
        throw ArgumentError(std::string(what) + " windows are " + std::to_string(s.rows) + "x" +
                            std::to_string(s.cols) + ", the model expects " + std::to_string(a.rows) + "x" +
                            std::to_string(a.cols));
}

}  // namespace detail

/// Eval-mode class-1 probabilities for every sample of `set`.
template <typename T>
std::vector<double> predict_proba(CnnClassifier<T>& model, const WindowSet& set, std::size_t batch = 256) {
    if (set.empty()) return {};
    detail::check_compatible(model.arch(), set, "evaluation");
    std::vector<std::size_t> idx(set.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> out;
    out.reserve(set.size());
    Tensor<T> x;
    std::vector<int> y;
    for (std::size_t b = 0; b < set.size(); b += batch) {
        const std::size_t e = std::min(set.size(), b + batch);
        detail::fill_batch(set, idx, b, e, x, y);
        const RowMat<T> p = softmax<T>(model.forward(x, false));
        for (Eigen::Index i = 0; i < p.rows(); ++i) out.push_back(static_cast<double>(p(i, 1)));
    }
    return out;
}

/// Hard labels (1 = unstable when p >= 0.5).
template <typename T>
std::vector<int> predict(CnnClassifier<T>& model, const WindowSet& set) {
    std::vector<int> out;
    for (double p : predict_proba(model, set)) out.push_back(p >= 0.5 ? 1 : 0);
    return out;
}

template <typename T>
double accuracy(CnnClassifier<T>& model, const WindowSet& set) {
    if (set.empty()) throw ArgumentError("accuracy of an empty set");
    const auto p = predict(model, set);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == set.y[i];
    return 100.0 * static_cast<double>(ok) / static_cast<double>(p.size());
}

/// Sets the input affine map so the training windows have zero mean and unit
/// standard deviation overall.
template <typename T>
void fit_input_scaling(CnnClassifier<T>& model, const WindowSet& set) {
    double s = 0.0, ss = 0.0;
    for (float v : set.x) {
        s += v;
        ss += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(set.x.size());
    const double mean = s / n;
    const double var = std::max(0.0, ss / n - mean * mean);
    model.input_shift = static_cast<T>(mean);
    model.input_scale = static_cast<T>(var > 0.0 ? 1.0 / std::sqrt(var) : 1.0);
}

namespace detail {

template <typename T>
TrainLog run_epochs(CnnClassifier<T>& model, const WindowSet& train_set, const WindowSet* val, const TrainConfig& cfg,
                    double lr, int epochs, bool early_stop) {
    Optimizer<T> opt(model, cfg, lr);
    TrainLog log;
    std::optional<CnnClassifier<T>> best;
    int since_best = 0;
    std::vector<std::size_t> idx(train_set.size());
    Tensor<T> x;
    std::vector<int> y;
    RowMat<T> grad;
    const auto bounds = batch_bounds(train_set.size(), static_cast<std::size_t>(cfg.batch_size));
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(idx.begin(), idx.end());
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
            fill_batch(train_set, idx, bounds[b], bounds[b + 1], x, y);
            model.zero_grad();
            const RowMat<T>& logits = model.forward(x, true);
            const double loss = softmax_cross_entropy<T>(logits, y, &grad);
            if (!std::isfinite(loss))
                throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch));
            for (Eigen::Index i = 0; i < logits.rows(); ++i)
                correct += (logits(i, 1) > logits(i, 0) ? 1 : 0) == y[static_cast<std::size_t>(i)];
            loss_sum += loss * static_cast<double>(y.size());
            model.backward(grad);
            opt.step(model);
        }
        EpochLog e;
        e.epoch = epoch;
        e.loss = loss_sum / static_cast<double>(train_set.size());
        e.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(train_set.size());
        if (val && !val->empty()) e.val_acc = accuracy(model, *val);
        log.epochs.push_back(e);
        if (!early_stop) continue;
        if (e.val_acc > log.best_val_acc) {
            log.best_val_acc = e.val_acc;
            log.best_epoch = epoch;
            best = model;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            log.early_stopped = true;
            break;
        }
    }
    if (best) model.copy_state_from(*best);
    if (!early_stop && !log.epochs.empty()) {
        log.best_epoch = log.epochs.back().epoch;
        log.best_val_acc = log.epochs.back().val_acc;
    }
    return log;
}

inline void check_trainable(const WindowSet& s) {
    if (s.empty()) throw ArgumentError("training set is empty");
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!std::all_of(s.sample(i), s.sample(i) + s.block(), [](float v) { return std::isfinite(v); }))
            throw ArgumentError("training window " + std::to_string(i) + " (id " + std::to_string(s.ids[i]) +
                                ") holds a non-finite value");
    const auto pos = s.positives();
    if (pos == 0 || pos == s.size())
        throw ArgumentError("training set holds a single class (" + std::to_string(pos) + " unstable of " +
                            std::to_string(s.size()) + ")");
}

}  // namespace detail

/// Mini-batch training from the model's current weights. Input scaling is
/// fitted on `train_set`. With a validation set, training stops after
/// `patience` epochs without a validation-accuracy gain and the best weights
/// are restored.
template <typename T>
TrainLog train(CnnClassifier<T>& model, const WindowSet& train_set, const WindowSet* val, const TrainConfig& cfg) {
    cfg.validate();
    detail::check_trainable(train_set);
    detail::check_compatible(model.arch(), train_set, "training");
    if (val && !val->empty()) detail::check_compatible(model.arch(), *val, "validation");
    fit_input_scaling(model, train_set);
    return detail::run_epochs(model, train_set, val, cfg, cfg.learning_rate, cfg.epochs, val && !val->empty());
}

/// Continues training a copy of `model` on target samples at
/// finetune_lr_scale x the base rate for finetune_epochs epochs, keeping the
/// source input scaling. With no target samples the copy is returned as is.
template <typename T>
CnnClassifier<T> fine_tune(const CnnClassifier<T>& model, const WindowSet& target, const TrainConfig& cfg,
                           TrainLog* log = nullptr) {
    cfg.validate();
    CnnClassifier<T> tuned = model;
    if (target.empty() || cfg.finetune_epochs == 0) return tuned;
    detail::check_trainable(target);
    detail::check_compatible(tuned.arch(), target, "fine-tuning");
    auto l = detail::run_epochs(tuned, target, nullptr, cfg, cfg.learning_rate * cfg.finetune_lr_scale,
                                cfg.finetune_epochs, false);
    if (log) *log = std::move(l);
    return tuned;
}

}  // namespace stvs::nn
