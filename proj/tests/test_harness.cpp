#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "stvs/harness/dataset.hpp"
#include "stvs/harness/experiments.hpp"
#include "stvs/harness/metrics.hpp"
#include "support/temp_dir.hpp"

namespace {

using testing_support::TempDir;

stvs::DatasetSpec small_spec(std::size_t count, std::uint64_t seed) {
    stvs::DatasetSpec s;
    s.count = count;
    s.seed = seed;
    return s;
}

// One small dataset shared by the generation tests.
const stvs::LabeledDataset& shared_set() {
    static const auto ds = stvs::generate_dataset(small_spec(16, 7));
    return ds;
}

std::vector<int> synthetic_labels(std::size_t n, double positive, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(positive);
    std::vector<int> y(n);
    for (auto& v : y) v = coin(rng) ? 1 : 0;
    return y;
}

double positive_share(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += labels[i] == 1;
    return 100.0 * static_cast<double>(pos) / static_cast<double>(idx.size());
}

// A dataset with records only, enough for the index-level helpers.
stvs::LabeledDataset records_only(const std::vector<int>& labels) {
    stvs::LabeledDataset ds;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        stvs::SampleRecord r;
        r.id = 1000 + i;
        r.label = labels[i];
        ds.records.push_back(r);
    }
    return ds;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, NinetyNinePercentEverywhere) {
    const auto m = stvs::metrics_from_counts(99, 1, 1, 99);
    EXPECT_DOUBLE_EQ(m.accuracy, 99.0);
    EXPECT_DOUBLE_EQ(m.precision, 99.0);
    EXPECT_DOUBLE_EQ(m.recall, 99.0);
    EXPECT_DOUBLE_EQ(m.f1, 99.0);
}

TEST(Metrics, AllPositivePredictionOnBalancedLabels) {
    std::vector<int> labels(100, 0);
    std::fill(labels.begin(), labels.begin() + 50, 1);
    const auto m = stvs::compute_metrics(std::vector<int>(100, 1), labels);
    EXPECT_DOUBLE_EQ(m.precision, 50.0);
    EXPECT_DOUBLE_EQ(m.recall, 100.0);
    EXPECT_DOUBLE_EQ(m.accuracy, 50.0);
    EXPECT_NEAR(m.f1, 66.67, 5e-3);
}

TEST(Metrics, RandomCountsMatchTheDefinitions) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> d(0, 500);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t tp = d(rng) + 1, fp = d(rng), fn = d(rng), tn = d(rng);
        const auto m = stvs::metrics_from_counts(tp, fp, fn, tn);
        const double n = static_cast<double>(tp + fp + fn + tn);
        const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
        EXPECT_NEAR(m.accuracy, 100.0 * static_cast<double>(tp + tn) / n, 1e-9);
        EXPECT_NEAR(m.precision, 100.0 * p, 1e-9);
        EXPECT_NEAR(m.recall, 100.0 * r, 1e-9);
        EXPECT_NEAR(m.f1, 100.0 * 2.0 * p * r / (p + r), 1e-9);
        EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-9);
        EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-9);
    }
}

TEST(Metrics, PredictionsAgreeWithCounts) {
    const std::vector<int> labels{1, 1, 0, 0, 1, 0};
    const std::vector<int> pred{1, 0, 1, 0, 1, 0};
    const auto m = stvs::compute_metrics(pred, labels);
    EXPECT_EQ(m.tp, 2u);
    EXPECT_EQ(m.fn, 1u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.tn, 2u);
}

TEST(Metrics, EmptyDenominators) {
    const auto none = stvs::metrics_from_counts(0, 0, 0, 10);
    EXPECT_DOUBLE_EQ(none.precision, 100.0);
    EXPECT_DOUBLE_EQ(none.recall, 100.0);
    const auto missed = stvs::metrics_from_counts(0, 0, 5, 5);
    EXPECT_DOUBLE_EQ(missed.precision, 100.0);
    EXPECT_DOUBLE_EQ(missed.recall, 0.0);
}

TEST(Metrics, InvalidInputs) {
    EXPECT_THROW(stvs::metrics_from_counts(0, 0, 0, 0), stvs::ArgumentError);
    EXPECT_THROW(stvs::compute_metrics({}, {}), stvs::ArgumentError);
    EXPECT_THROW(stvs::compute_metrics({1, 0}, {1}), stvs::ArgumentError);
}

TEST(Metrics, AverageKeepsFoldsAndSumsCounts) {
    const auto a = stvs::metrics_from_counts(10, 0, 0, 10);
    const auto b = stvs::metrics_from_counts(5, 5, 5, 5);
    const auto m = stvs::average_metrics({a, b});
    EXPECT_DOUBLE_EQ(m.accuracy, 75.0);
    EXPECT_EQ(m.tp, 15u);
    EXPECT_EQ(m.folds.size(), 2u);
    EXPECT_EQ(stvs::to_json(m)["folds"].size(), 2u);
    EXPECT_THROW(stvs::average_metrics({}), stvs::ArgumentError);
}

// ---------------------------------------------------------------------------
// Splits

TEST(Splits, StratifiedSplitPartitionsAndKeepsTheRatio) {
    const auto y = synthetic_labels(1000, 0.3, 3);
    const auto parts = stvs::stratified_split(y, {0.6, 0.2, 0.2}, 9);
    std::vector<std::size_t> all;
    for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(y.size());
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(all, expect);
    EXPECT_NEAR(static_cast<double>(parts[0].size()), 600.0, 2.0);
    std::vector<std::size_t> every(expect);
    const double global = positive_share(y, every);
    for (const auto& p : parts) EXPECT_NEAR(positive_share(y, p), global, 2.0);
}

TEST(Splits, StratifiedSplitIsSeeded) {
    const auto y = synthetic_labels(200, 0.5, 4);
    EXPECT_EQ(stvs::stratified_split(y, {0.5, 0.5}, 1), stvs::stratified_split(y, {0.5, 0.5}, 1));
    EXPECT_NE(stvs::stratified_split(y, {0.5, 0.5}, 1), stvs::stratified_split(y, {0.5, 0.5}, 2));
}

TEST(Splits, StratifiedSplitRejectsBadFractions) {
    const std::vector<int> y{0, 1, 0, 1};
    EXPECT_THROW(stvs::stratified_split(y, {0.5, 0.4}, 1), stvs::ArgumentError);
    EXPECT_THROW(stvs::stratified_split(y, {1.5, -0.5}, 1), stvs::ArgumentError);
    EXPECT_THROW(stvs::stratified_split(y, {}, 1), stvs::ArgumentError);
    EXPECT_THROW(stvs::stratified_split({0, 2}, {1.0}, 1), stvs::ArgumentError);
}

TEST(Splits, KFoldPartitionsExactly) {
    const auto y = synthetic_labels(1003, 0.25, 5);
    const auto folds = stvs::kfold_splits(y, 10, 17);
    ASSERT_EQ(folds.size(), 10u);
    std::vector<std::size_t> all;
    std::size_t lo = y.size(), hi = 0;
    for (const auto& f : folds) {
        all.insert(all.end(), f.begin(), f.end());
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
    }
    EXPECT_LE(hi - lo, 1u);
    std::sort(all.begin(), all.end());
    EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
    EXPECT_EQ(all.size(), y.size());
    std::vector<std::size_t> every(y.size());
    std::iota(every.begin(), every.end(), 0);
    const double global = positive_share(y, every);
    for (const auto& f : folds) EXPECT_NEAR(positive_share(y, f), global, 2.0);
}

TEST(Splits, LeaveOneOut) {
    const std::vector<int> y{0, 1, 1, 0, 1};
    const auto folds = stvs::kfold_splits(y, y.size(), 1);
    for (const auto& f : folds) EXPECT_EQ(f.size(), 1u);
    EXPECT_THROW(stvs::kfold_splits(y, 6, 1), stvs::ArgumentError);
    EXPECT_THROW(stvs::kfold_splits(y, 1, 1), stvs::ArgumentError);
}

TEST(KFoldEvaluate, PerfectStubScoresHundred) {
    stvs::nn::WindowSet data;
    data.rows = 1;
    data.cols = 1;
    for (int i = 0; i < 40; ++i) data.add(Eigen::MatrixXd::Constant(1, 1, i), i % 3 == 0 ? 1 : 0,
                                          static_cast<std::uint64_t>(i));
    std::vector<std::size_t> seen;
    const auto m = stvs::kfold_evaluate(data, 10, 3, [&](const auto& train, const auto& test, std::size_t) {
        EXPECT_EQ(train.size() + test.size(), data.size());
        for (auto id : test.ids) seen.push_back(id);
        return test.y;
    });
    EXPECT_DOUBLE_EQ(m.accuracy, 100.0);
    EXPECT_DOUBLE_EQ(m.f1, 100.0);
    EXPECT_EQ(m.folds.size(), 10u);
    EXPECT_EQ(m.total(), data.size());
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
    EXPECT_EQ(seen.size(), data.size());
}

TEST(NestedOrder, EveryPrefixStaysStratified) {
    const auto y = synthetic_labels(500, 0.3, 8);
    const auto ds = records_only(y);
    std::vector<std::size_t> pool(y.size());
    std::iota(pool.begin(), pool.end(), 0);
    const auto order = stvs::nested_order(ds, pool, 21);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, pool);
    const double ratio = positive_share(y, pool) / 100.0;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        pos += y[order[k]] == 1;
        EXPECT_LE(std::abs(static_cast<double>(pos) - ratio * static_cast<double>(k + 1)), 1.0) << "prefix " << k + 1;
    }
    EXPECT_EQ(order, stvs::nested_order(ds, pool, 21));
}

// ---------------------------------------------------------------------------
// Dataset generation

TEST(Dataset, HasTheRequestedShape) {
    const auto& ds = shared_set();
    EXPECT_EQ(ds.size(), 16u);
    EXPECT_EQ(ds.rows, 29);
    EXPECT_EQ(ds.cols, 80);
    EXPECT_EQ(ds.topology_id, "ne39");
    EXPECT_EQ(ds.features.size(), 16u * 29 * 80);
    EXPECT_EQ(ds.load_voltage.size(), ds.features.size());
    for (float v : ds.features) ASSERT_TRUE(std::isfinite(v));
}

TEST(Dataset, SamplingRangesAreRespected) {
    const auto& ds = shared_set();
    const auto buses = ds.load_buses;
    std::set<std::uint64_t> ids;
    for (const auto& r : ds.records) {
        EXPECT_GE(r.load_scale, 0.8);
        EXPECT_LE(r.load_scale, 1.2);
        EXPECT_GE(r.fault_duration, 0.1);
        EXPECT_LE(r.fault_duration, 0.4);
        EXPECT_TRUE(r.label == 0 || r.label == 1);
        EXPECT_NE(std::find(buses.begin(), buses.end(), r.fault_bus), buses.end()) << r.fault_bus;
        if (r.collapsed) {
            EXPECT_EQ(r.label, 1);
        }
        ids.insert(r.id);
    }
    EXPECT_EQ(ids.size(), ds.size());
}

TEST(Dataset, ThreadCountDoesNotChangeTheContent) {
    stvs::GenerateOptions opts;
    opts.jobs = 3;
    const auto threaded = stvs::generate_dataset(small_spec(16, 7), opts);
    EXPECT_EQ(threaded.content_hash(), shared_set().content_hash());
}

TEST(Dataset, SeedChangesTheContent) {
    EXPECT_NE(stvs::generate_dataset(small_spec(4, 8)).content_hash(),
              stvs::generate_dataset(small_spec(4, 9)).content_hash());
}

TEST(Dataset, StoredFeaturesMatchTheLoadVoltageRoute) {
    const auto& ds = shared_set();
    const auto ctx = stvs::dataset_feature_context(ds);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Eigen::MatrixXd f = stvs::features_from_load_voltage(ds.voltage_matrix(i), ctx, 0.0, 0.0, 1);
        EXPECT_LT((f - ds.feature_matrix(i)).cwiseAbs().maxCoeff(), 1e-3) << "sample " << i;
    }
}

TEST(Dataset, RejectionBalancingRaisesTheMinorityClass) {
    auto spec = small_spec(10, 7);
    spec.min_class_fraction = 0.4;
    const auto ds = stvs::generate_dataset(spec);
    ASSERT_EQ(ds.size(), 10u);
    const std::size_t unstable = ds.unstable_count();
    EXPECT_LE(ds.candidates, 40u);
    if (ds.warnings.empty()) {
        EXPECT_GE(unstable, 4u);
        EXPECT_GE(ds.size() - unstable, 4u);
    }
    auto plain = small_spec(10, 7);
    plain.min_class_fraction = 0.0;
    EXPECT_EQ(stvs::generate_dataset(plain).candidates, 10u);
}

TEST(Dataset, ExhaustedBudgetIsReported) {
    auto spec = small_spec(6, 7);
    spec.min_class_fraction = 0.49;
    spec.rejection_budget = 1.0;
    const auto ds = stvs::generate_dataset(spec);
    EXPECT_EQ(ds.size(), 6u);
    EXPECT_EQ(ds.candidates, 6u);
    const std::size_t unstable = ds.unstable_count();
    if (std::min(unstable, ds.size() - unstable) < 3) {
        ASSERT_EQ(ds.warnings.size(), 1u);
        EXPECT_NE(ds.warnings[0].find("rejection budget"), std::string::npos);
    }
}

TEST(Dataset, SaveLoadRoundTrip) {
    TempDir dir;
    const auto& ds = shared_set();
    stvs::save_dataset(dir.path(), ds);
    const auto back = stvs::load_dataset(dir.path());
    EXPECT_EQ(back.content_hash(), ds.content_hash());
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.load_voltage, ds.load_voltage);
    EXPECT_EQ(back.spec.seed, ds.spec.seed);
    EXPECT_EQ(back.load_buses, ds.load_buses);
}

TEST(Dataset, DamagedBlobIsRejected) {
    TempDir dir;
    stvs::save_dataset(dir.path(), shared_set());
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
        if (e.path().extension() == ".json") continue;
        std::fstream f(e.path(), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-4, std::ios::end);
        const char junk[4] = {1, 2, 3, 4};
        f.write(junk, 4);
    }
    EXPECT_THROW(stvs::load_dataset(dir.path()), stvs::IoError);
    EXPECT_THROW(stvs::load_dataset(dir.path() / "absent"), stvs::Error);
}

TEST(Dataset, InvalidSpecsAreRejected) {
    auto s = small_spec(0, 1);
    EXPECT_THROW(stvs::generate_dataset(s), stvs::ArgumentError);
    s = small_spec(4, 1);
    s.load_min = 1.3;
    EXPECT_THROW(stvs::generate_dataset(s), stvs::ArgumentError);
    s = small_spec(4, 1);
    s.min_class_fraction = 0.5;
    EXPECT_THROW(stvs::generate_dataset(s), stvs::ArgumentError);
    s = small_spec(4, 1);
    s.t_w = 6.0;
    EXPECT_THROW(stvs::generate_dataset(s), stvs::ArgumentError);
    EXPECT_THROW(stvs::fault_policy_from_string("nowhere"), stvs::ArgumentError);
}

TEST(Dataset, SpecJsonRoundTrip) {
    auto s = small_spec(12, 5);
    s.outages = {{2, 3}};
    s.noise_mag = 0.01;
    const auto back = stvs::dataset_spec_from_json(stvs::to_json(s));
    EXPECT_EQ(stvs::to_json(back), stvs::to_json(s));
}

// ---------------------------------------------------------------------------
// Experiments

TEST(SourceSplit, SixtyTwentyTwenty) {
    const auto ds = records_only(synthetic_labels(500, 0.7, 2));
    const auto sp = stvs::source_split(ds, 4);
    EXPECT_NEAR(static_cast<double>(sp.train.size()), 300.0, 2.0);
    EXPECT_NEAR(static_cast<double>(sp.val.size()), 100.0, 2.0);
    EXPECT_EQ(sp.train.size() + sp.val.size() + sp.test.size(), 500u);
    std::set<std::size_t> all(sp.train.begin(), sp.train.end());
    all.insert(sp.val.begin(), sp.val.end());
    all.insert(sp.test.begin(), sp.test.end());
    EXPECT_EQ(all.size(), 500u);
}

TEST(Ablation, ArgumentsAreChecked) {
    const auto& ds = shared_set();
    const auto sp = stvs::source_split(ds, 1);
    stvs::ModelSpec spec{stvs::kDeskChannels, 3};
    stvs::nn::TrainConfig cfg;
    EXPECT_THROW(stvs::run_size_ablation(ds, sp, {}, spec, cfg), stvs::ArgumentError);
    EXPECT_THROW(stvs::run_size_ablation(ds, sp, {sp.train.size() + 1}, spec, cfg), stvs::ArgumentError);
    EXPECT_THROW(stvs::run_size_ablation(ds, sp, {0}, spec, cfg), stvs::ArgumentError);
    EXPECT_THROW(stvs::run_window_ablation(ds, sp, {}, spec, cfg), stvs::ArgumentError);
    EXPECT_THROW(stvs::run_window_ablation(ds, sp, {0.9}, spec, cfg), stvs::ArgumentError);
}

TEST(Ablation, WindowRowsUseLeadingColumns) {
    const auto& ds = shared_set();
    const auto sp = stvs::source_split(ds, 1);
    stvs::nn::TrainConfig cfg;
    cfg.epochs = 1;
    const auto rows = stvs::run_window_ablation(ds, sp, {0.1, 0.2}, {stvs::kDeskChannels, 3}, cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].cols, 10);
    EXPECT_EQ(rows[1].cols, 20);
    EXPECT_EQ(rows[0].metrics.total(), sp.test.size());
    EXPECT_NE(stvs::format_window_ablation(rows).find("Columns"), std::string::npos);
}

TEST(Noise, ZeroSigmaReturnsTheStoredWindows) {
    const auto& ds = shared_set();
    const std::vector<std::size_t> idx{0, 3, 5};
    const auto clean = stvs::noisy_windows(ds, idx, 0.0, 0.0, 1);
    const auto stored = ds.windows(idx);
    EXPECT_EQ(clean.x, stored.x);
    EXPECT_EQ(clean.y, stored.y);
}

TEST(Noise, NoisyWindowsAreSeededAndDiffer) {
    const auto& ds = shared_set();
    const std::vector<std::size_t> idx{1, 2};
    const auto a = stvs::noisy_windows(ds, idx, 0.01, 0.5, 4);
    const auto b = stvs::noisy_windows(ds, idx, 0.01, 0.5, 4);
    EXPECT_EQ(a.x, b.x);
    EXPECT_NE(a.x, ds.windows(idx).x);
    EXPECT_NE(a.x, stvs::noisy_windows(ds, idx, 0.01, 0.5, 5).x);
    EXPECT_EQ(a.ids, ds.windows(idx).ids);
}

TEST(Transfer, PartitionIsDisjointAndStratified) {
    const auto ds = records_only(synthetic_labels(300, 0.4, 6));
    const auto [ft, test] = stvs::transfer_partition(ds, 200, 3);
    EXPECT_EQ(ft.size(), 200u);
    EXPECT_EQ(test.size(), 100u);
    std::set<std::uint64_t> ids;
    for (std::size_t i : ft) ids.insert(ds.records[i].id);
    for (std::size_t i : test) EXPECT_EQ(ids.count(ds.records[i].id), 0u);
    EXPECT_THROW(stvs::transfer_partition(ds, 300, 3), stvs::ArgumentError);
}

TEST(Transfer, TargetSeedsDifferByScenario) {
    stvs::TransferOptions opts;
    const auto& sc = stvs::topology_scenarios();
    const auto a = stvs::target_spec(opts, sc[0]);
    const auto b = stvs::target_spec(opts, sc[1]);
    EXPECT_NE(a.seed, b.seed);
    EXPECT_EQ(a.outages, sc[0].lines);
    EXPECT_EQ(a.count, 1500u);
}

TEST(Transfer, ZeroFineTuneEpochsMatchesDirect) {
    const stvs::ModelSpec spec{stvs::kDeskChannels, 3};
    const stvs::nn::CnnClassifier<float> source(spec.architecture(29, 80), 5);
    stvs::TransferOptions opts;
    opts.finetune_count = 4;
    opts.test_count = 6;
    opts.target_template = small_spec(1, 3);
    stvs::nn::TrainConfig cfg;
    cfg.finetune_epochs = 0;
    const auto src_test = shared_set().windows();
    const auto rows =
        stvs::run_transfer_suite(source, {stvs::topology_scenarios()[0]}, opts, cfg, &src_test);
    ASSERT_EQ(rows.size(), 1u);
    const auto& r = rows[0];
    EXPECT_EQ(r.name, "G1");
    EXPECT_EQ(r.finetune_samples + r.test_samples, 10u);
    EXPECT_NE(r.topology_id, "ne39");
    EXPECT_DOUBLE_EQ(r.direct.accuracy, r.fine_tuned.accuracy);
    EXPECT_EQ(r.direct.tp, r.fine_tuned.tp);
    EXPECT_EQ(r.direct.tn, r.fine_tuned.tn);
    auto model = source;
    EXPECT_DOUBLE_EQ(r.source_accuracy_after, stvs::nn::accuracy(model, src_test));
    EXPECT_NE(stvs::format_transfer(rows).find("Fine-tuned"), std::string::npos);
}
