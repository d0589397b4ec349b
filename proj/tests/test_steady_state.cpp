#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "stvs/grid/io.hpp"
#include "stvs/harness/scenarios.hpp"
#include "stvs/steady_state/load_matrix.hpp"
#include "stvs/steady_state/power_flow.hpp"
#include "support/oracles.hpp"

namespace {

const char* kTwoBus = R"({
  "name": "toy2", "base_mva": 100,
  "buses": [{"id": 1, "kind": "generator"}, {"id": 2, "kind": "load"}],
  "branches": [{"from": 1, "to": 2, "x": 0.2}],
  "generators": [{"bus": 1, "p_mech": 0.0, "inertia": 5.0, "xd_prime": 0.1}],
  "loads": [{"bus": 2, "p": 0.0, "q": 0.0, "motor_fraction": 0.0}]
})";

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

std::vector<stvs::GridModel> all_topologies() {
    const auto base = stvs::ne39();
    std::vector<stvs::GridModel> out{base};
    for (const auto& sc : stvs::topology_scenarios()) out.push_back(stvs::disconnect_lines(base, sc.lines));
    return out;
}

}  // namespace

TEST(PowerFlow, TwoBusWithoutDemandIsFlat) {
    const auto g = stvs::load_grid(kTwoBus);
    const auto op = stvs::solve_power_flow(g, 1.0);
    EXPECT_NEAR(std::abs(op.v[1]), 1.0, 1e-12);
    EXPECT_NEAR(std::arg(op.v[1]), 0.0, 1e-12);
    EXPECT_NEAR(op.p_inj.cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR(op.q_inj.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(PowerFlow, BaseCaseMatchesPublishedSolution) {
    const auto g = stvs::ne39();
    const auto t0 = std::chrono::steady_clock::now();
    const auto op = stvs::solve_power_flow(g, 1.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 1.0);
    EXPECT_LT(op.mismatch, 1e-8);
    EXPECT_LT(stvs::power_balance_error(g, op), 1e-8);

    const auto ref = oracle::ne39_reference(std::filesystem::path(STVS_SOURCE_DIR) / "tests/data/ne39_pf_reference.csv");
    ASSERT_EQ(ref.size(), 39u);
    const auto slack = static_cast<Eigen::Index>(g.bus_index(31));
    double ref_slack = 0.0;
    for (const auto& r : ref)
        if (r.bus == 31) ref_slack = r.va_deg;
    for (const auto& r : ref) {
        const auto k = static_cast<Eigen::Index>(g.bus_index(r.bus));
        const double vm = std::abs(op.v[k]);
        EXPECT_NEAR(vm, r.vm, 1e-3) << "bus " << r.bus;
        EXPECT_GE(vm, 0.9);
        EXPECT_LE(vm, 1.1);
        const double rel = (std::arg(op.v[k]) - std::arg(op.v[slack])) * 180.0 / std::numbers::pi;
        EXPECT_NEAR(rel, r.va_deg - ref_slack, 0.05) << "bus " << r.bus;
    }
}

TEST(PowerFlow, ExtremeLoadingDiverges) {
    EXPECT_THROW(stvs::solve_power_flow(stvs::ne39(), 50.0), stvs::ConvergenceError);
}

TEST(PowerFlow, NonPositiveScaleIsAnArgumentError) {
    EXPECT_THROW(stvs::solve_power_flow(stvs::ne39(), 0.0), stvs::ArgumentError);
    EXPECT_THROW(stvs::solve_power_flow(stvs::ne39(), -1.0), stvs::ArgumentError);
}

TEST(PowerFlow, BalancedAcrossTheLoadRangeAndTopologies) {
    for (const auto& g : all_topologies()) {
        for (double s : {0.8, 1.0, 1.2}) {
            SCOPED_TRACE(g.topology_id() + " @ " + std::to_string(s));
            const auto op = stvs::solve_power_flow(g, s);
            EXPECT_LT(stvs::power_balance_error(g, op), 1e-8);
        }
    }
}

TEST(ReactiveInjection, FlatStartOnLosslessPairIsZero) {
    const auto part = stvs::susceptance_partition(stvs::load_grid(kTwoBus));
    const Eigen::VectorXcd v = Eigen::VectorXcd::Ones(2);
    EXPECT_DOUBLE_EQ(stvs::reactive_injection(v, part, 0), 0.0);
    EXPECT_DOUBLE_EQ(stvs::reactive_injection(v, part, 1), 0.0);
    EXPECT_THROW(stvs::reactive_injection(v, part, 2), stvs::ArgumentError);
}

TEST(ReactiveInjection, MatchesDoubleLoopOnRandomGrids) {
    stvs::Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(9));
        const auto g = oracle::random_grid(rng, n, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1))));
        const auto part = stvs::susceptance_partition(g);
        oracle::Vec vm(static_cast<std::size_t>(n)), va(static_cast<std::size_t>(n));
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) {
            vm[static_cast<std::size_t>(i)] = rng.uniform(0.8, 1.1);
            va[static_cast<std::size_t>(i)] = rng.uniform(-0.5, 0.5);
            v[i] = std::polar(vm[static_cast<std::size_t>(i)], va[static_cast<std::size_t>(i)]);
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            const double want = oracle::reactive_injection(g, vm, va, i);
            EXPECT_NEAR(stvs::reactive_injection(v, part, i), want, 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(ReactiveInjection, AgreesWithReactiveDemandOnMagnitudeProfile) {
    // q_L uses magnitudes only, so the two routes agree once angle
    // differences are removed from the solved operating point.
    const auto g = stvs::ne39();
    const auto part = stvs::susceptance_partition(g);
    const auto op = stvs::solve_power_flow(g, 1.0);
    const Eigen::VectorXcd mags = op.v.cwiseAbs().cast<std::complex<double>>();
    const Eigen::VectorXd q = stvs::reactive_demand(op.v_load, part, op.v_gen);
    for (std::size_t r = 0; r < part.load_buses.size(); ++r) {
        const double qi = stvs::reactive_injection(mags, part, g.bus_index(part.load_buses[r]));
        EXPECT_NEAR(q[static_cast<Eigen::Index>(r)], qi, 1e-6) << "bus " << part.load_buses[r];
    }
}

TEST(LoadMatrix, TwoBusToyScalars) {
    const auto part = stvs::susceptance_partition(stvs::load_grid(kTwoBus));
    const auto lm = stvs::load_matrix(part, vec1(1.0));
    EXPECT_NEAR(lm.v_oc()[0], 1.0, 1e-15);
    EXPECT_NEAR(lm.ls()(0, 0), -1.25, 1e-15);
    const auto q = stvs::reactive_demand(vec1(0.9), part, vec1(1.0));
    EXPECT_NEAR(q[0], -0.45, 1e-15);
    EXPECT_NEAR(stvs::stability_index(lm, q), 0.36, 1e-15);
}

TEST(LoadMatrix, ScalarCaseIsQuarterVocSquaredTimesBll) {
    const auto part = stvs::susceptance_partition(stvs::load_grid(kTwoBus));
    const auto lm = stvs::load_matrix(part, vec1(1.07));
    EXPECT_NEAR(lm.ls()(0, 0), 0.25 * lm.v_oc()[0] * lm.v_oc()[0] * part.ll(0, 0), 1e-14);
}

TEST(LoadMatrix, MatchesDenseOracleOnBaseTopology) {
    const auto g = stvs::ne39();
    const auto part = stvs::susceptance_partition(g);
    const auto op = stvs::solve_power_flow(g, 1.0);
    const auto lm = stvs::load_matrix(part, op.v_gen);
    const auto vg = oracle::to_vec(op.v_gen);
    EXPECT_LT(oracle::rel_diff(lm.ls(), oracle::load_matrix(g, vg)), 1e-10);
    EXPECT_LT(oracle::rel_diff(lm.v_oc(), oracle::open_circuit(g, vg)), 1e-10);
    EXPECT_TRUE((lm.v_oc().array() > 0.0).all());
}

TEST(LoadMatrix, OracleAgreementOnRandomGrids) {
    stvs::Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(12));
        const int gens = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
        const auto g = oracle::random_grid(rng, n, gens);
        const auto part = stvs::susceptance_partition(g);
        Eigen::VectorXd vg(gens), vl(n - gens);
        for (auto& x : vg) x = rng.uniform(0.95, 1.1);
        for (auto& x : vl) x = rng.uniform(0.7, 1.1);
        const auto lm = stvs::load_matrix(part, vg);
        const auto q = stvs::reactive_demand(vl, part, vg);
        EXPECT_LT(oracle::rel_diff(lm.ls(), oracle::load_matrix(g, oracle::to_vec(vg))), 1e-10);
        EXPECT_LT(oracle::rel_diff(q, oracle::reactive_demand(g, oracle::to_vec(vl), oracle::to_vec(vg))), 1e-10);
        const double want = oracle::inf_norm(oracle::delta(g, oracle::to_vec(vl), oracle::to_vec(vg)));
        EXPECT_NEAR(stvs::stability_index(lm, q), want, 1e-9 * std::max(1.0, want));
    }
}

TEST(LoadMatrix, DisconnectedLoadSubnetworkIsSingular) {
    // Load bus 3 only touches load bus 2, so B_LL is the Laplacian of a
    // generator-free component.
    const auto g = stvs::load_grid(R"({
      "name": "iso", "base_mva": 100,
      "buses": [{"id": 1, "kind": "generator"}, {"id": 2, "kind": "load"}, {"id": 3, "kind": "load"}],
      "branches": [{"from": 1, "to": 2, "x": 0.2}, {"from": 2, "to": 3, "x": 0.1}],
      "generators": [{"bus": 1, "p_mech": 0.0, "inertia": 5.0, "xd_prime": 0.1}],
      "loads": [{"bus": 2, "p": 0.0, "q": 0.0}]
    })");
    auto part = stvs::susceptance_partition(g);
    EXPECT_NO_THROW(stvs::load_matrix(part, vec1(1.0)));
    part.ll.setZero();
    EXPECT_THROW(stvs::load_matrix(part, vec1(1.0)), stvs::SingularMatrixError);
    EXPECT_THROW(stvs::load_matrix(stvs::susceptance_partition(g), vec1(-1.0)), stvs::ArgumentError);
}

TEST(StabilityIndex, ZeroDemandGivesZero) {
    const auto part = stvs::susceptance_partition(stvs::ne39());
    const auto lm = stvs::load_matrix(part, Eigen::VectorXd::Ones(part.gen_count()));
    EXPECT_EQ(stvs::stability_index(lm, Eigen::VectorXd::Zero(lm.size())), 0.0);
    EXPECT_THROW(stvs::stability_index(lm, Eigen::VectorXd::Zero(3)), stvs::ArgumentError);
}

TEST(StabilityIndex, BaseOperatingPointIsInsideTheMargin) {
    const auto g = stvs::ne39();
    const auto part = stvs::susceptance_partition(g);
    const auto op = stvs::solve_power_flow(g, 1.0);
    const auto lm = stvs::load_matrix(part, op.v_gen);
    const double d = stvs::stability_index(lm, stvs::reactive_demand(op.v_load, part, op.v_gen));
    EXPECT_GT(d, 0.0);
    EXPECT_LT(d, 1.0);
}

class TopologyIdentities : public ::testing::TestWithParam<int> {};

TEST_P(TopologyIdentities, AnalyticIdentitiesHold) {
    const auto g = all_topologies()[static_cast<std::size_t>(GetParam())];
    SCOPED_TRACE(g.topology_id());
    const auto part = stvs::susceptance_partition(g);
    const auto op = stvs::solve_power_flow(g, 1.0);
    const auto lm = stvs::load_matrix(part, op.v_gen);

    EXPECT_LT((lm.ls() - lm.ls().transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(stvs::reactive_demand(lm.v_oc(), part, op.v_gen).cwiseAbs().maxCoeff(), 1e-12);

    for (double alpha : {0.9, 1.1, 1.37}) {
        const auto scaled = stvs::load_matrix(part, alpha * op.v_gen);
        const Eigen::ArrayXXd want = alpha * alpha * lm.ls().array();
        const Eigen::ArrayXXd got = scaled.ls().array();
        const Eigen::ArrayXXd err = (got - want).abs() / want.abs().max(1e-300);
        EXPECT_LT((want == 0.0).select(got.abs(), err).maxCoeff(), 1e-10);
        EXPECT_LT(((scaled.v_oc() - alpha * lm.v_oc()).array().abs() / (alpha * lm.v_oc()).array()).maxCoeff(), 1e-10);
    }

    const auto q = stvs::reactive_demand(op.v_load, part, op.v_gen);
    const double d = stvs::stability_index(lm, q);
    for (double alpha : {-3.0, -0.5, 0.25, 2.0, 1e3}) {
        EXPECT_NEAR(stvs::stability_index(lm, alpha * q), std::abs(alpha) * d, 1e-12 * std::abs(alpha) * d);
    }
}

INSTANTIATE_TEST_SUITE_P(BaseAndScenarios, TopologyIdentities, ::testing::Range(0, 13));
