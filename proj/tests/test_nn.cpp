#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stvs/nn/checkpoint.hpp"
#include "stvs/nn/cnn.hpp"
#include "stvs/nn/gradcheck.hpp"
#include "stvs/nn/train.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace nn = stvs::nn;

namespace {

constexpr std::array<int, 4> kTiny{4, 4, 6, 6};

/// Two Gaussian blobs of rows x cols windows, separated along every entry.
nn::WindowSet blobs(std::size_t count, int rows, int cols, std::uint64_t seed, double gap = 1.0) {
    stvs::Rng rng(seed);
    nn::WindowSet s;
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(i % 2);
        Eigen::MatrixXd m(rows, cols);
        for (auto& v : m.reshaped()) v = (label ? gap : -gap) + 0.5 * rng.normal();
        s.add(m, label, i);
    }
    return s;
}

nn::Architecture tiny(int rows, int cols) {
    nn::Architecture a;
    a.rows = rows;
    a.cols = cols;
    a.channels = kTiny;
    return a;
}

template <typename T>
std::vector<std::vector<T>> weights(nn::CnnClassifier<T>& m) {
    std::vector<std::vector<T>> out;
    for (auto& p : m.state()) out.push_back(*p.value);
    return out;
}

}  // namespace

// ---- layers ---------------------------------------------------------------

TEST(Conv2d, IdentityKernelCopiesInput) {
    nn::Conv2d<double> conv(1, 1, 1, 0);
    conv.w = {1.0};
    nn::Tensor<double> x(2, 1, 3, 5), y;
    stvs::Rng rng(1);
    for (auto& v : x.v) v = rng.normal();
    conv.forward(x, y);
    EXPECT_EQ(y.v, x.v);
}

TEST(Conv2d, OnesKernelOnConstantField) {
    nn::Conv2d<double> conv(1, 1, 3, 0);
    conv.w.assign(9, 1.0);
    nn::Tensor<double> x(1, 1, 5, 6), y;
    std::fill(x.v.begin(), x.v.end(), 2.5);
    conv.forward(x, y);
    ASSERT_EQ(y.h, 3);
    ASSERT_EQ(y.w, 4);
    for (double v : y.v) EXPECT_DOUBLE_EQ(v, 22.5);
}

TEST(Conv2d, MatchesDirectSummation) {
    stvs::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int in_c = 1 + static_cast<int>(rng.below(3)), out_c = 1 + static_cast<int>(rng.below(3));
        const int k = trial % 2 ? 3 : 1 + 2 * static_cast<int>(rng.below(2));
        const int pad = static_cast<int>(rng.below(static_cast<std::uint64_t>(k / 2 + 1)));
        const int h = 6, w = 6;
        nn::Conv2d<double> conv(in_c, out_c, k, pad);
        for (auto& v : conv.w) v = rng.normal();
        for (auto& v : conv.b) v = rng.normal();
        nn::Tensor<double> x(1, in_c, h, w), y;
        for (auto& v : x.v) v = rng.normal();
        conv.forward(x, y);
        const auto want = oracle::conv2d(x.v, in_c, h, w, conv.w, conv.b, out_c, k, pad);
        ASSERT_EQ(want.size(), y.v.size());
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(y.v[i], want[i], 1e-12);
    }
}

TEST(Conv2d, ShapeErrors) {
    nn::Conv2d<double> conv(2, 1, 3, 0);
    nn::Tensor<double> y;
    nn::Tensor<double> wrong_c(1, 1, 5, 5);
    EXPECT_THROW(conv.forward(wrong_c, y), stvs::ArgumentError);
    nn::Tensor<double> small(1, 2, 2, 5);
    EXPECT_THROW(conv.forward(small, y), stvs::ArgumentError);
    EXPECT_THROW(nn::Conv2d<double>(0, 1, 3, 0), stvs::ArgumentError);
}

TEST(BatchNorm, StandardizedInputPassesThrough) {
    nn::BatchNorm2d<double> bn(2);
    nn::Tensor<double> x(8, 2, 3, 4), y;
    stvs::Rng rng(3);
    for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);
    // Standardize each channel with its own biased statistics.
    for (int c = 0; c < 2; ++c) {
        double s = 0, ss = 0, n = 0;
        for (int i = 0; i < 8; ++i)
            for (std::size_t k = 0; k < x.plane(); ++k) s += x.sample(i)[c * x.plane() + k], n += 1;
        const double mean = s / n;
        for (int i = 0; i < 8; ++i)
            for (std::size_t k = 0; k < x.plane(); ++k) {
                auto& v = x.sample(i)[c * x.plane() + k];
                v -= mean;
                ss += v * v;
            }
        const double sd = std::sqrt(ss / n);
        for (int i = 0; i < 8; ++i)
            for (std::size_t k = 0; k < x.plane(); ++k) x.sample(i)[c * x.plane() + k] /= sd;
    }
    bn.forward(x, y, true);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.v[i], x.v[i], 1e-5);
}

TEST(BatchNorm, ConstantInputGivesBeta) {
    nn::BatchNorm2d<double> bn(3);
    bn.beta = {0.5, -1.0, 2.0};
    nn::Tensor<double> x(4, 3, 2, 2), y;
    std::fill(x.v.begin(), x.v.end(), 7.0);
    bn.forward(x, y, true);
    for (int i = 0; i < 4; ++i)
        for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(y.at(i, c, 1, 1), bn.beta[static_cast<std::size_t>(c)]);
}

TEST(BatchNorm, RunningStatisticsUseMomentum) {
    nn::BatchNorm2d<double> bn(1);
    nn::Tensor<double> x(2, 1, 1, 2), y;
    x.v = {1.0, 3.0, 5.0, 7.0};  // mean 4, biased variance 5
    bn.forward(x, y, true);
    EXPECT_NEAR(bn.running_mean[0], 0.1 * 4.0, 1e-15);
    EXPECT_NEAR(bn.running_var[0], 0.9 * 1.0 + 0.1 * 5.0, 1e-15);
    bn.forward(x, y, false);
    EXPECT_NEAR(y.v[0], (1.0 - 0.4) / std::sqrt(1.4 + 1e-5), 1e-12);
}

TEST(BatchNorm, TrainModeNeedsTwoSamples) {
    nn::BatchNorm2d<double> bn(1);
    nn::Tensor<double> x(1, 1, 2, 2), y;
    EXPECT_THROW(bn.forward(x, y, true), stvs::ArgumentError);
    EXPECT_NO_THROW(bn.forward(x, y, false));
}

TEST(TimePool, HalvesTimeAndRoutesGradientToTheMax) {
    nn::TimePool<double> pool;
    nn::Tensor<double> x(1, 1, 1, 5), y, dx;
    x.v = {1, 4, 3, 2, 9};
    pool.forward(x, y);
    EXPECT_EQ(y.v, (std::vector<double>{4, 3}));
    nn::Tensor<double> dy(1, 1, 1, 2);
    dy.v = {10, 20};
    pool.backward(dy, dx);
    EXPECT_EQ(dx.v, (std::vector<double>{0, 10, 20, 0, 0}));
    EXPECT_EQ(nn::TimePool<double>::out_w(1), 1);
}

TEST(Softmax, ClosedFormValues) {
    nn::RowMat<double> z(1, 2);
    z << std::numbers::ln2, 0.0;
    const auto p = nn::softmax<double>(z);
    EXPECT_NEAR(p(0, 0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(p(0, 1), 1.0 / 3.0, 1e-12);
}

TEST(Softmax, CrossEntropyGradientIsProbabilitiesMinusOneHot) {
    stvs::Rng rng(9);
    nn::RowMat<double> z(5, 2);
    for (auto& v : z.reshaped()) v = 3.0 * rng.normal();
    const std::vector<int> y{0, 1, 1, 0, 1};
    nn::RowMat<double> g;
    const double loss = nn::softmax_cross_entropy<double>(z, y, &g);
    const auto p = nn::softmax<double>(z);
    double want = 0.0;
    for (int i = 0; i < 5; ++i) {
        want -= std::log(p(i, y[static_cast<std::size_t>(i)]));
        for (int j = 0; j < 2; ++j)
            EXPECT_NEAR(g(i, j), (p(i, j) - (j == y[static_cast<std::size_t>(i)] ? 1.0 : 0.0)) / 5.0, 1e-12);
    }
    EXPECT_NEAR(loss, want / 5.0, 1e-12);
    EXPECT_THROW(nn::softmax_cross_entropy<double>(z, {0, 1}, nullptr), stvs::ArgumentError);
}

// ---- gradient checks ------------------------------------------------------

TEST(GradCheck, LayersOnRandomShapes) {
    stvs::Rng rng(2025);
    auto dim = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };
    for (int trial = 0; trial < 20; ++trial) {
        const auto seed = rng.next();
        const int n = dim(2, 4), c = dim(1, 3), h = dim(2, 5), w = dim(2, 6);
        const int k = 1 + 2 * dim(0, 1);
        SCOPED_TRACE("trial " + std::to_string(trial));
        const auto conv = nn::check_conv(n, c, dim(1, 3), h + 2, w + 2, k, dim(0, k / 2), seed);
        EXPECT_TRUE(conv.passed(1e-4)) << conv.worst << " " << conv.max_rel_error;
        const auto bn_train = nn::check_batchnorm(n, c, h, w, true, seed);
        EXPECT_TRUE(bn_train.passed(1e-4)) << bn_train.worst << " " << bn_train.max_rel_error;
        const auto bn_eval = nn::check_batchnorm(n, c, h, w, false, seed);
        EXPECT_TRUE(bn_eval.passed(1e-4)) << bn_eval.worst << " " << bn_eval.max_rel_error;
        const auto relu = nn::check_relu(n, c, h, w, seed);
        EXPECT_TRUE(relu.passed(1e-4)) << relu.worst << " " << relu.max_rel_error;
        const auto pool = nn::check_time_pool(n, c, h, w, seed);
        EXPECT_TRUE(pool.passed(1e-4)) << pool.worst << " " << pool.max_rel_error;
        const auto dense = nn::check_dense(n, dim(1, 30), dim(1, 4), seed);
        EXPECT_TRUE(dense.passed(1e-4)) << dense.worst << " " << dense.max_rel_error;
        const auto ce = nn::check_softmax_ce(n, 2, seed);
        EXPECT_TRUE(ce.passed(1e-4)) << ce.worst << " " << ce.max_rel_error;
    }
}

TEST(GradCheck, FullStackOnToyWindow) {
    nn::Architecture a = tiny(4, 8);
    a.channels = {2, 3, 3, 4};
    const auto rep = nn::check_model(a, 3, 17);
    EXPECT_GT(rep.checked, 100u);
    EXPECT_TRUE(rep.passed(1e-3)) << rep.worst << " " << rep.max_rel_error;
}

TEST(GradCheck, FullStackOnRandomShapes) {
    stvs::Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        nn::Architecture a;
        a.rows = 1 + static_cast<int>(rng.below(4));
        a.cols = 1 + static_cast<int>(rng.below(9));
        for (auto& c : a.channels) c = 1 + static_cast<int>(rng.below(3));
        a.kernel = trial % 3 == 0 ? 1 : 3;
        const auto rep = nn::check_model(a, 2 + static_cast<int>(rng.below(2)), rng.next());
        EXPECT_TRUE(rep.passed(1e-3)) << a.rows << "x" << a.cols << " " << rep.worst << " " << rep.max_rel_error;
    }
}

// ---- classifier -----------------------------------------------------------

TEST(Classifier, HasFourConvAndFourNormLayers) {
    nn::CnnClassifier<float> m(tiny(29, 80), 1);
    int conv = 0, bn = 0, fc = 0;
    for (auto& p : m.params()) {
        conv += p.name.ends_with(".weight") && p.name.starts_with("conv");
        bn += p.name.ends_with(".gamma");
        fc += p.name == "fc.weight";
    }
    EXPECT_EQ(conv, 4);
    EXPECT_EQ(bn, 4);
    EXPECT_EQ(fc, 1);
    EXPECT_EQ(m.arch().pooled_cols(), 20);
}

TEST(Classifier, ZeroHeadGivesEvenOdds) {
    nn::CnnClassifier<double> m(tiny(5, 10), 3);
    const auto set = blobs(6, 5, 10, 1);
    for (double p : nn::predict_proba(m, set)) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(Classifier, ProbabilitiesSumToOneAndEvalIsRepeatable) {
    nn::CnnClassifier<float> m(tiny(5, 10), 3);
    const auto set = blobs(40, 5, 10, 2);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    nn::train(m, set, nullptr, cfg);
    nn::Tensor<float> x(4, 1, 5, 10);
    std::copy(set.x.begin(), set.x.begin() + 200, x.v.begin());
    const nn::RowMat<float> a = nn::softmax<float>(m.forward(x, false));
    const nn::RowMat<float> b = nn::softmax<float>(m.forward(x, false));
    EXPECT_EQ(a, b);
    for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_NEAR(a.row(i).sum(), 1.0f, 1e-6f);
}

TEST(Classifier, WrongInputShapeIsRejected) {
    nn::CnnClassifier<float> m(tiny(5, 10), 3);
    nn::Tensor<float> x(2, 1, 5, 9);
    EXPECT_THROW(m.forward(x, false), stvs::ArgumentError);
    EXPECT_THROW(nn::predict(m, blobs(4, 4, 10, 1)), stvs::ArgumentError);
    nn::Architecture bad = tiny(5, 10);
    bad.kernel = 2;
    EXPECT_THROW(nn::CnnClassifier<float>(bad, 1), stvs::ArgumentError);
}

// ---- training -------------------------------------------------------------

TEST(Train, SeparableBlobsReachFullTrainAccuracy) {
    const auto set = blobs(200, 4, 8, 11);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 20;
    const auto log = nn::train(m, set, nullptr, cfg);
    EXPECT_LE(log.epochs.size(), 20u);
    EXPECT_DOUBLE_EQ(nn::accuracy(m, set), 100.0);
}

TEST(Train, FirstEpochLowersTheLoss) {
    const auto set = blobs(200, 4, 8, 12, 0.3);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    const auto log = nn::train(m, set, nullptr, cfg);
    ASSERT_EQ(log.epochs.size(), 2u);
    EXPECT_LT(log.epochs[1].loss, log.epochs[0].loss);
}

TEST(Train, SameSeedGivesIdenticalWeights) {
    const auto set = blobs(120, 4, 8, 13, 0.3);
    nn::TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 77;
    nn::CnnClassifier<float> a(tiny(4, 8), 5), b(tiny(4, 8), 5);
    nn::train(a, set, nullptr, cfg);
    nn::train(b, set, nullptr, cfg);
    EXPECT_EQ(weights(a), weights(b));
    cfg.seed = 78;
    nn::CnnClassifier<float> c(tiny(4, 8), 5);
    nn::train(c, set, nullptr, cfg);
    EXPECT_NE(weights(a), weights(c));
}

TEST(Train, FullBatchEqualsGradientDescent) {
    const auto set = blobs(10, 3, 6, 14, 0.5);
    nn::TrainConfig cfg;
    cfg.optimizer = nn::OptimizerKind::sgd;
    cfg.batch_size = 10;
    cfg.epochs = 4;
    cfg.learning_rate = 0.05;
    nn::CnnClassifier<double> trained(tiny(3, 6), 21), manual(tiny(3, 6), 21);
    // A non-zero head so every layer moves from the first step.
    stvs::Rng rng(5);
    for (auto& p : manual.params())
        if (p.name.starts_with("fc.")) nn::detail::fill_uniform(*p.value, rng, -0.3, 0.3);
    trained.copy_state_from(manual);
    nn::train(trained, set, nullptr, cfg);

    nn::fit_input_scaling(manual, set);
    nn::Tensor<double> x(10, 1, 3, 6);
    std::vector<int> y = set.y;
    for (std::size_t i = 0; i < set.x.size(); ++i) x.v[i] = set.x[i];
    nn::RowMat<double> g;
    for (int step = 0; step < cfg.epochs; ++step) {
        manual.zero_grad();
        nn::softmax_cross_entropy<double>(manual.forward(x, true), y, &g);
        manual.backward(g);
        for (auto& p : manual.params())
            for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] -= cfg.learning_rate * (*p.grad)[i];
    }
    const auto wa = weights(trained), wb = weights(manual);
    for (std::size_t t = 0; t < wa.size(); ++t)
        for (std::size_t i = 0; i < wa[t].size(); ++i) EXPECT_NEAR(wa[t][i], wb[t][i], 1e-10) << "tensor " << t;
}

TEST(Train, SingleClassIsRejected) {
    auto set = blobs(20, 4, 8, 15);
    std::fill(set.y.begin(), set.y.end(), 1);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    EXPECT_THROW(nn::train(m, set, nullptr, {}), stvs::ArgumentError);
    EXPECT_THROW(nn::train(m, nn::WindowSet{}, nullptr, {}), stvs::ArgumentError);
}

TEST(Train, NonFiniteInputIsRejected) {
    auto set = blobs(20, 4, 8, 16);
    set.x[3] = std::numeric_limits<float>::quiet_NaN();
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    try {
        nn::train(m, set, nullptr, {});
        FAIL() << "expected an error";
    } catch (const stvs::ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("window 0"), std::string::npos) << e.what();
    }
}

TEST(Train, DivergenceNamesTheEpoch) {
    const auto set = blobs(20, 4, 8, 16);
    // float weights overflow to infinity after the first steps
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.optimizer = nn::OptimizerKind::sgd;
    cfg.learning_rate = 1e38;
    cfg.epochs = 5;
    try {
        nn::train(m, set, nullptr, cfg);
        FAIL() << "expected divergence";
    } catch (const stvs::Error& e) {
        EXPECT_NE(std::string(e.what()).find("non-finite loss at epoch"), std::string::npos) << e.what();
    }
}

TEST(Train, InvalidConfigIsRejected) {
    nn::TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(cfg.validate(), stvs::ArgumentError);
    cfg = {};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), stvs::ArgumentError);
}

TEST(Train, EarlyStopRestoresTheBestEpoch) {
    const auto set = blobs(100, 4, 8, 17);
    const auto val = blobs(40, 4, 8, 18);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 30;
    cfg.patience = 2;
    const auto log = nn::train(m, set, &val, cfg);
    EXPECT_TRUE(log.early_stopped);
    EXPECT_DOUBLE_EQ(nn::accuracy(m, val), log.best_val_acc);
}

TEST(Train, BatchBoundsNeverLeaveASingleton) {
    EXPECT_EQ(nn::detail::batch_bounds(129, 64), (std::vector<std::size_t>{0, 64, 129}));
    EXPECT_EQ(nn::detail::batch_bounds(128, 64), (std::vector<std::size_t>{0, 64, 128}));
    EXPECT_EQ(nn::detail::batch_bounds(10, 64), (std::vector<std::size_t>{0, 10}));
}

// ---- fine-tuning and checkpoints ------------------------------------------

TEST(FineTune, NoTargetSamplesIsANoOp) {
    const auto set = blobs(60, 4, 8, 19);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    nn::train(m, set, nullptr, cfg);
    auto same = nn::fine_tune(m, nn::WindowSet{}, cfg);
    EXPECT_EQ(weights(same), weights(m));
}

TEST(FineTune, LeavesTheSourceModelUntouched) {
    const auto set = blobs(60, 4, 8, 20);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    nn::train(m, set, nullptr, cfg);
    const auto before = weights(m);
    auto tuned = nn::fine_tune(m, blobs(40, 4, 8, 21), cfg);
    EXPECT_EQ(weights(m), before);
    EXPECT_NE(weights(tuned), before);
    EXPECT_EQ(tuned.input_shift, m.input_shift);
}

TEST(FineTune, FrozenConvOnlyMovesTheHead) {
    const auto set = blobs(60, 4, 8, 22);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    nn::train(m, set, nullptr, cfg);
    cfg.freeze_conv = true;
    auto tuned = nn::fine_tune(m, blobs(40, 4, 8, 23), cfg);
    auto pa = m.params(), pb = tuned.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i].name.starts_with("fc."))
            EXPECT_NE(*pa[i].value, *pb[i].value) << pa[i].name;
        else
            EXPECT_EQ(*pa[i].value, *pb[i].value) << pa[i].name;
    }
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
    testing_support::TempDir dir("stvs-ckpt");
    const auto set = blobs(60, 4, 8, 24);
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    nn::train(m, set, nullptr, cfg);
    nn::save_checkpoint(dir / "m.ckpt", m, {{"note", "unit"}});
    auto loaded = nn::load_checkpoint<float>(dir / "m.ckpt");
    EXPECT_EQ(loaded.header["meta"]["note"], "unit");
    EXPECT_EQ(loaded.model.arch(), m.arch());
    EXPECT_EQ(nn::predict_proba(loaded.model, set), nn::predict_proba(m, set));
    EXPECT_EQ(weights(loaded.model), weights(m));
}

TEST(Checkpoint, DamagedFilesAreReported) {
    testing_support::TempDir dir("stvs-ckpt");
    nn::CnnClassifier<float> m(tiny(4, 8), 5);
    nn::save_checkpoint(dir / "m.ckpt", m);
    auto bytes = stvs::io::read_text(dir / "m.ckpt");
    stvs::io::atomic_write_text(dir / "short.ckpt", bytes.substr(0, bytes.size() - 10));
    EXPECT_THROW(nn::load_checkpoint<float>(dir / "short.ckpt"), stvs::Error);
    stvs::io::atomic_write_text(dir / "long.ckpt", bytes + "xx");
    EXPECT_THROW(nn::load_checkpoint<float>(dir / "long.ckpt"), stvs::IoError);
    stvs::io::atomic_write_text(dir / "junk.ckpt", "hello world");
    EXPECT_THROW(nn::load_checkpoint<float>(dir / "junk.ckpt"), stvs::IoError);
}

TEST(WindowSet, SubsetAndLeadingColumns) {
    const auto set = blobs(6, 2, 4, 25);
    const auto sub = set.subset({4, 1});
    EXPECT_EQ(sub.ids, (std::vector<std::uint64_t>{4, 1}));
    EXPECT_EQ(sub.y, (std::vector<int>{0, 1}));
    EXPECT_TRUE(std::equal(sub.sample(0), sub.sample(0) + 8, set.sample(4)));
    const auto lead = set.leading_columns(3);
    EXPECT_EQ(lead.cols, 3);
    EXPECT_EQ(lead.sample(2)[3], set.sample(2)[4]);
    EXPECT_THROW(set.leading_columns(5), stvs::ArgumentError);
    EXPECT_THROW(set.subset({6}), stvs::ArgumentError);
}
