#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/random.hpp"
#include "stvs/harness/dataset.hpp"
#include "stvs/harness/metrics.hpp"
#include "stvs/harness/scenarios.hpp"
#include "stvs/nn/cnn.hpp"
#include "stvs/nn/train.hpp"

namespace stvs {

/// Conv widths and kernel of the classifier; the input size comes from the
/// data. The default is the full-size network.
struct ModelSpec {
    std::array<int, 4> channels{16, 32, 64, 64};
    int kernel = 3;

    nn::Architecture architecture(int rows, int cols) const {
        nn::Architecture a;
        a.rows = rows;
        a.cols = cols;
        a.channels = channels;
        a.kernel = kernel;
        a.validate();
        return a;
    }
};

/// Narrower network used by the desk-scale experiments so that a 5,000-sample
/// run trains in minutes on one core.
inline constexpr std::array<int, 4> kDeskChannels{8, 16, 32, 32};

// ---------------------------------------------------------------------------
// Splits

/// Sample indices per class, each shuffled by `seed`.
inline std::array<std::vector<std::size_t>, 2> shuffled_by_class(const std::vector<int>& labels, std::uint64_t seed) {
    std::array<std::vector<std::size_t>, 2> by;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ArgumentError("labels must be 0 or 1");
        by[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < 2; ++c) {
        Rng rng(derive_seed(seed, c));
        rng.shuffle(by[c].begin(), by[c].end());
    }
    return by;
}

/// Stratified split into parts of the given fractions (which must sum to 1).
/// Every part keeps the global class ratio up to rounding; the last part
/// takes the remainder. Indices within a part are in shuffled order.
inline std::vector<std::vector<std::size_t>> stratified_split(const std::vector<int>& labels,
                                                              const std::vector<double>& fractions,
                                                              std::uint64_t seed) {
    if (fractions.empty()) throw ArgumentError("no split fractions given");
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ArgumentError("split fractions must be >= 0");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
    const auto by = shuffled_by_class(labels, seed);
    std::vector<std::vector<std::size_t>> parts(fractions.size());
    for (const auto& cls : by) {
        double acc = 0.0;
        std::size_t begin = 0;
        for (std::size_t p = 0; p < fractions.size(); ++p) {
            acc += fractions[p];
            const std::size_t end = p + 1 == fractions.size()
                                        ? cls.size()
                                        : static_cast<std::size_t>(std::llround(acc * static_cast<double>(cls.size())));
            parts[p].insert(parts[p].end(), cls.begin() + static_cast<std::ptrdiff_t>(begin),
                            cls.begin() + static_cast<std::ptrdiff_t>(std::max(begin, end)));
            begin = std::max(begin, end);
        }
    }
    for (std::size_t p = 0; p < parts.size(); ++p) {
        Rng rng(derive_seed(seed, 100 + p));
        rng.shuffle(parts[p].begin(), parts[p].end());
    }
    return parts;
}

/// k stratified folds that partition the indices exactly. Each class is
/// dealt round-robin, continuing where the previous class stopped, so fold
/// sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_splits(const std::vector<int>& labels, std::size_t k,
                                                          std::uint64_t seed) {
    if (k < 2) throw ArgumentError("k-fold needs k >= 2");
    if (labels.size() < k) throw ArgumentError("dataset has fewer samples than folds");
    const auto by = shuffled_by_class(labels, seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t slot = 0;
    for (const auto& cls : by)
        for (std::size_t i : cls) folds[slot++ % k].push_back(i);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

// ---------------------------------------------------------------------------
// Training and evaluation

template <typename T>
MetricsReport evaluate(nn::CnnClassifier<T>& model, const nn::WindowSet& set) {
    return compute_metrics(nn::predict(model, set), set.y);
}

/// A freshly initialized classifier trained on `train_set` with early
/// stopping on `val`.
inline nn::CnnClassifier<float> train_classifier(const ModelSpec& spec, const nn::WindowSet& train_set,
                                                 const nn::WindowSet& val, const nn::TrainConfig& cfg,
                                                 nn::TrainLog* log = nullptr) {
    nn::CnnClassifier<float> model(spec.architecture(train_set.rows, train_set.cols), derive_seed(cfg.seed, 0x1417));
    auto l = nn::train(model, train_set, &val, cfg);
    if (log) *log = std::move(l);
    return model;
}

/// Trains on the training folds and returns predictions for the test fold.
using FoldTrainer = std::function<std::vector<int>(const nn::WindowSet& train, const nn::WindowSet& test,
                                                   std::size_t fold)>;

/// k-fold evaluation: every fold serves once as the test set. The report
/// averages the per-fold scores and carries each fold's report.
inline MetricsReport kfold_evaluate(const nn::WindowSet& data, std::size_t k, std::uint64_t seed,
                                    const FoldTrainer& trainer) {
    const auto folds = kfold_splits(data.y, k, seed);
    std::vector<MetricsReport> parts;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        const auto test = data.subset(folds[f]);
        parts.push_back(compute_metrics(trainer(data.subset(train_idx), test, f), test.y));
    }
    return average_metrics(parts);
}

/// The standard CNN fold trainer: a stratified 1/9 of the training folds is
/// held back for early stopping.
inline FoldTrainer cnn_fold_trainer(const ModelSpec& spec, const nn::TrainConfig& cfg) {
    return [spec, cfg](const nn::WindowSet& train, const nn::WindowSet& test, std::size_t fold) {
        auto c = cfg;
        c.seed = derive_seed(cfg.seed, 1000 + fold);
        const auto parts = stratified_split(train.y, {8.0 / 9.0, 1.0 / 9.0}, c.seed);
        auto model = train_classifier(spec, train.subset(parts[0]), train.subset(parts[1]), c);
        return nn::predict(model, test);
    };
}

// ---------------------------------------------------------------------------
// Source experiment: 60/20/20 split

struct SourceSplit {
    std::vector<std::size_t> train, val, test;
};

inline SourceSplit source_split(const LabeledDataset& ds, std::uint64_t seed) {
    auto parts = stratified_split(ds.labels(), {0.6, 0.2, 0.2}, seed);
    return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

struct SourceRun {
    nn::CnnClassifier<float> model;
    nn::TrainLog log;
    MetricsReport test;
};

inline SourceRun run_source_experiment(const LabeledDataset& ds, const SourceSplit& split, const ModelSpec& spec,
                                       const nn::TrainConfig& cfg) {
    SourceRun run;
    run.model = train_classifier(spec, ds.windows(split.train), ds.windows(split.val), cfg, &run.log);
    const auto test = ds.windows(split.test);
    run.test = evaluate(run.model, test);
    return run;
}

// ---------------------------------------------------------------------------
// Ablations

/// Seeded ordering of `pool` whose prefixes stay stratified: classes are
/// interleaved in proportion, so even a short prefix holds both labels.
inline std::vector<std::size_t> nested_order(const LabeledDataset& ds, const std::vector<std::size_t>& pool,
                                             std::uint64_t seed) {
    std::vector<int> y;
    for (std::size_t i : pool) y.push_back(ds.records.at(i).label);
    const auto by = shuffled_by_class(y, derive_seed(seed, 0x5123));
    std::vector<std::size_t> order;
    std::array<std::size_t, 2> used{0, 0};
    const double ratio = pool.empty() ? 0.0 : static_cast<double>(by[1].size()) / static_cast<double>(pool.size());
    while (order.size() < pool.size()) {
        // Take an unstable sample when the prefix has fewer than its share.
        const double want = ratio * static_cast<double>(order.size() + 1);
        const std::size_t c = (used[1] < by[1].size() && (static_cast<double>(used[1]) < want || used[0] == by[0].size()))
                                  ? 1
                                  : 0;
        order.push_back(pool[by[c][used[c]++]]);
    }
    return order;
}

struct SizeAblationRow {
    std::size_t size = 0;
    int epochs = 0;
    MetricsReport metrics;
};

/// One model per training-set size. Each training set is a prefix of the
/// same seeded ordering of split.train, so smaller sets are subsets of larger
/// ones; validation and test sets are shared by every row.
inline std::vector<SizeAblationRow> run_size_ablation(const LabeledDataset& ds, const SourceSplit& split,
                                                      const std::vector<std::size_t>& sizes, const ModelSpec& spec,
                                                      const nn::TrainConfig& cfg) {
    if (sizes.empty()) throw ArgumentError("no dataset sizes given");
    for (std::size_t s : sizes) {
        if (s == 0) throw ArgumentError("dataset size must be >= 1");
        if (s > split.train.size())
            throw ArgumentError("dataset size " + std::to_string(s) + " exceeds the " +
                                std::to_string(split.train.size()) + " training samples available");
    }
    const auto order = nested_order(ds, split.train, cfg.seed);
    const auto val = ds.windows(split.val), test = ds.windows(split.test);
    std::vector<SizeAblationRow> rows;
    for (std::size_t s : sizes) {
        const std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
        nn::TrainLog log;
        auto model = train_classifier(spec, ds.windows(idx), val, cfg, &log);
        rows.push_back({s, static_cast<int>(log.epochs.size()), evaluate(model, test)});
    }
    return rows;
}

struct WindowAblationRow {
    double t_w = 0.0;
    int cols = 0;
    int epochs = 0;
    MetricsReport metrics;
};

/// One model per window length, each trained on the leading columns of the
/// same stored windows (so every row sees identical trajectories).
inline std::vector<WindowAblationRow> run_window_ablation(const LabeledDataset& ds, const SourceSplit& split,
                                                          const std::vector<double>& lengths, const ModelSpec& spec,
                                                          const nn::TrainConfig& cfg) {
    if (lengths.empty()) throw ArgumentError("no window lengths given");
    const double dt = ds.spec.dt;
    const auto train = ds.windows(split.train), val = ds.windows(split.val), test = ds.windows(split.test);
    std::vector<WindowAblationRow> rows;
    for (double t_w : lengths) {
        const auto cols = static_cast<int>(std::llround(t_w / dt));
        if (cols < 1 || cols > ds.cols)
            throw ArgumentError("window length " + std::to_string(t_w) + " s outside (0, " +
                                std::to_string(ds.cols * dt) + "] s");
        nn::TrainLog log;
        auto model = train_classifier(spec, train.leading_columns(cols), val.leading_columns(cols), cfg, &log);
        rows.push_back({cols * dt, cols, static_cast<int>(log.epochs.size()),
                        evaluate(model, test.leading_columns(cols))});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Measurement noise

/// L_s and the partition of a dataset's topology. V_G are the generator
/// set-points, identical at every load level, so any solved point serves.
inline FeatureContext dataset_feature_context(const LabeledDataset& ds) {
    const auto grid = dataset_grid(ds.spec);
    if (grid.topology_id() != ds.topology_id) throw ArgumentError("dataset topology does not match its spec");
    return feature_context(grid, solve_power_flow(grid, 1.0));
}

/// Feature windows of the selected samples rebuilt from their load-bus
/// voltages with Gaussian measurement noise. Zero sigmas return the stored
/// clean windows unchanged.
inline nn::WindowSet noisy_windows(const LabeledDataset& ds, const std::vector<std::size_t>& idx, double sigma_mag,
                                   double sigma_ang_deg, std::uint64_t seed) {
    if (sigma_mag == 0.0 && sigma_ang_deg == 0.0) return ds.windows(idx);
    const auto ctx = dataset_feature_context(ds);
    nn::WindowSet w;
    for (std::size_t i : idx) {
        const auto& r = ds.records.at(i);
        w.add(features_from_load_voltage(ds.voltage_matrix(i), ctx, sigma_mag, sigma_ang_deg, derive_seed(seed, r.id)),
              r.label, r.id);
    }
    w.rows = ds.rows;
    w.cols = ds.cols;
    return w;
}

struct NoiseReport {
    double sigma_mag = 0.0;
    double sigma_ang_deg = 0.0;
    std::uint64_t seed = 0;
    MetricsReport clean;
    MetricsReport noisy;

    double accuracy_drop() const noexcept { return clean.accuracy - noisy.accuracy; }
};

/// Evaluates a clean-trained model on the clean and on noise-injected test
/// features.
inline NoiseReport run_noise_robustness(nn::CnnClassifier<float>& model, const LabeledDataset& ds,
                                        const std::vector<std::size_t>& test_idx, double sigma_mag,
                                        double sigma_ang_deg, std::uint64_t seed) {
    NoiseReport r;
    r.sigma_mag = sigma_mag;
    r.sigma_ang_deg = sigma_ang_deg;
    r.seed = seed;
    r.clean = evaluate(model, ds.windows(test_idx));
    r.noisy = evaluate(model, noisy_windows(ds, test_idx, sigma_mag, sigma_ang_deg, seed));
    return r;
}

// ---------------------------------------------------------------------------
// Transfer to changed topologies

struct TransferOptions {
    std::size_t finetune_count = 1000;
    std::size_t test_count = 500;
    DatasetSpec target_template;  ///< sampling ranges, window and seed for target sets
    unsigned jobs = 1;
    std::function<void(const std::string&)> log;
};

struct TransferRow {
    std::string name;
    char group = 'A';
    std::vector<LineId> lines;
    std::string topology_id;
    std::string dataset_hash;
    std::size_t finetune_samples = 0;
    std::size_t test_samples = 0;
    MetricsReport direct;
    MetricsReport fine_tuned;
    /// Accuracy of the fine-tuned model back on the source test set, a
    /// forgetting diagnostic; negative when no source set was given.
    double source_accuracy_after = -1.0;
};

/// Target dataset spec of one scenario; its seed depends on the scenario
/// name so targets draw independent conditions.
inline DatasetSpec target_spec(const TransferOptions& opts, const TopologyScenario& sc) {
    auto s = opts.target_template;
    s.outages = sc.lines;
    s.count = opts.finetune_count + opts.test_count;
    ContentHash h;
    h.text(sc.name);
    s.seed = derive_seed(opts.target_template.seed, h.digest());
    return s;
}

/// Fine-tune and test partition of a target dataset: a stratified
/// finetune_count / test_count split. Throws if the two share a sample id.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> transfer_partition(const LabeledDataset& target,
                                                                                        std::size_t finetune_count,
                                                                                        std::uint64_t seed) {
    if (finetune_count >= target.size()) throw ArgumentError("no target samples left for testing");
    const double f = static_cast<double>(finetune_count) / static_cast<double>(target.size());
    auto parts = stratified_split(target.labels(), {f, 1.0 - f}, seed);
    std::set<std::uint64_t> ft_ids;
    for (std::size_t i : parts[0]) ft_ids.insert(target.records[i].id);
    for (std::size_t i : parts[1])
        if (ft_ids.count(target.records[i].id)) throw Error("fine-tune and test sets share a sample");
    return {std::move(parts[0]), std::move(parts[1])};
}

/// Direct transfer and fine-tuning of `source` on each scenario. The source
/// model is never modified.
inline std::vector<TransferRow> run_transfer_suite(const nn::CnnClassifier<float>& source,
                                                   const std::vector<TopologyScenario>& scenarios,
                                                   const TransferOptions& opts, const nn::TrainConfig& cfg,
                                                   const nn::WindowSet* source_test = nullptr) {
    if (opts.test_count < 1) throw ArgumentError("transfer test set must hold at least one sample");
    std::vector<TransferRow> rows;
    for (const auto& sc : scenarios) {
        if (opts.log) opts.log("generating target set " + sc.name);
        const auto spec = target_spec(opts, sc);
        const auto target = generate_dataset(spec, {opts.jobs, {}});
        const auto [ft_idx, test_idx] = transfer_partition(target, opts.finetune_count, spec.seed);
        TransferRow row;
        row.name = sc.name;
        row.group = sc.group;
        row.lines = sc.lines;
        row.topology_id = target.topology_id;
        row.dataset_hash = target.content_hash();
        row.finetune_samples = ft_idx.size();
        row.test_samples = test_idx.size();
        const auto test = target.windows(test_idx);
        auto model = source;
        row.direct = evaluate(model, test);
        auto c = cfg;
        c.seed = derive_seed(cfg.seed, spec.seed);
        if (opts.log) opts.log("fine-tuning on " + sc.name);
        auto tuned = nn::fine_tune(model, target.windows(ft_idx), c);
        row.fine_tuned = evaluate(tuned, test);
        if (source_test && !source_test->empty()) row.source_accuracy_after = nn::accuracy(tuned, *source_test);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string fixed(double v, int prec = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

/// Renders rows of cells with every column padded to its widest entry.
inline std::string aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    std::ostringstream os;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) os << "  ";
            os << std::setw(static_cast<int>(width[c])) << (c == 0 ? std::left : std::right) << r[c];
        }
        os << '\n';
    }
    return os.str();
}

inline std::vector<std::string> metric_cells(const MetricsReport& m) {
    return {fixed(m.accuracy), fixed(m.precision), fixed(m.recall), fixed(m.f1)};
}

}  // namespace detail

inline std::string format_metrics(const std::string& title, const MetricsReport& m) {
    std::vector<std::vector<std::string>> rows{{"", "ACC", "Precision", "Recall", "F1"}};
    if (!m.folds.empty())
        for (std::size_t f = 0; f < m.folds.size(); ++f) {
            auto cells = detail::metric_cells(m.folds[f]);
            cells.insert(cells.begin(), "fold " + std::to_string(f + 1));
            rows.push_back(cells);
        }
    auto cells = detail::metric_cells(m);
    cells.insert(cells.begin(), m.folds.empty() ? title : "mean");
    rows.push_back(cells);
    std::string out = m.folds.empty() ? "" : title + "\n";
    out += detail::aligned(rows);
    out += "TP " + std::to_string(m.tp) + "  FP " + std::to_string(m.fp) + "  FN " + std::to_string(m.fn) + "  TN " +
           std::to_string(m.tn) + "\n";
    return out;
}

inline std::string format_size_ablation(const std::vector<SizeAblationRow>& rows) {
    std::vector<std::vector<std::string>> t{{"Training samples", "ACC", "Precision", "Recall", "F1", "Epochs"}};
    for (const auto& r : rows) {
        auto c = detail::metric_cells(r.metrics);
        c.insert(c.begin(), std::to_string(r.size));
        c.push_back(std::to_string(r.epochs));
        t.push_back(c);
    }
    return detail::aligned(t);
}

inline std::string format_window_ablation(const std::vector<WindowAblationRow>& rows) {
    std::vector<std::vector<std::string>> t{{"Window (s)", "Columns", "ACC", "Precision", "Recall", "F1", "Epochs"}};
    for (const auto& r : rows) {
        auto c = detail::metric_cells(r.metrics);
        c.insert(c.begin(), std::to_string(r.cols));
        c.insert(c.begin(), detail::fixed(r.t_w, 2));
        c.push_back(std::to_string(r.epochs));
        t.push_back(c);
    }
    return detail::aligned(t);
}

inline std::string format_noise(const NoiseReport& r) {
    std::vector<std::vector<std::string>> t{{"Test features", "ACC", "Precision", "Recall", "F1"}};
    auto c = detail::metric_cells(r.clean);
    c.insert(c.begin(), "clean");
    t.push_back(c);
    c = detail::metric_cells(r.noisy);
    c.insert(c.begin(), "noisy (" + detail::fixed(r.sigma_mag, 3) + " p.u., " + detail::fixed(r.sigma_ang_deg, 2) +
                            " deg)");
    t.push_back(c);
    return detail::aligned(t) + "accuracy drop " + detail::fixed(r.accuracy_drop()) + " points\n";
}

inline std::string lines_text(const std::vector<LineId>& lines) {
    std::string s;
    for (const auto& l : lines) s += (s.empty() ? "" : " & ") + line_name(l);
    return s;
}

inline std::string format_transfer(const std::vector<TransferRow>& rows) {
    std::string out;
    for (int block = 0; block < 2; ++block) {
        out += block == 0 ? "Direct transfer\n" : "Fine-tuned\n";
        std::vector<std::vector<std::string>> t{{"Topology", "Lines out", "ACC", "Precision", "Recall", "F1"}};
        for (const auto& r : rows) {
            auto c = detail::metric_cells(block == 0 ? r.direct : r.fine_tuned);
            c.insert(c.begin(), lines_text(r.lines));
            c.insert(c.begin(), r.name);
            t.push_back(c);
        }
        out += detail::aligned(t);
        if (block == 0) out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const SizeAblationRow& r) {
    return {{"size", r.size}, {"epochs", r.epochs}, {"metrics", to_json(r.metrics)}};
}

inline nlohmann::json to_json(const WindowAblationRow& r) {
    return {{"t_w", r.t_w}, {"cols", r.cols}, {"epochs", r.epochs}, {"metrics", to_json(r.metrics)}};
}

inline nlohmann::json to_json(const NoiseReport& r) {
    return {{"sigma_mag", r.sigma_mag},        {"sigma_ang_deg", r.sigma_ang_deg}, {"seed", r.seed},
            {"clean", to_json(r.clean)},        {"noisy", to_json(r.noisy)},
            {"accuracy_drop", r.accuracy_drop()}};
}

inline nlohmann::json to_json(const TransferRow& r) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : r.lines) lines.push_back(line_name(l));
    return {{"name", r.name},
            {"group", std::string(1, r.group)},
            {"lines", lines},
            {"topology_id", r.topology_id},
            {"dataset_hash", r.dataset_hash},
            {"finetune_samples", r.finetune_samples},
            {"test_samples", r.test_samples},
            {"direct", to_json(r.direct)},
            {"fine_tuned", to_json(r.fine_tuned)},
            {"source_accuracy_after", r.source_accuracy_after}};
}

template <typename Row>
nlohmann::json rows_json(const std::vector<Row>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows) a.push_back(to_json(r));
    return a;
}

}  // namespace stvs
