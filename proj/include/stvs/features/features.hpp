#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/core/random.hpp"
#include "stvs/dynamics/simulate.hpp"
#include "stvs/grid/susceptance.hpp"
#include "stvs/steady_state/load_matrix.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace stvs {

enum class Stability { stable = 0, unstable = 1 };

inline const char* to_string(Stability s) noexcept { return s == Stability::unstable ? "unstable" : "stable"; }

struct StabilityLabel {
    Stability label = Stability::stable;
    int worst_bus = 0;   ///< bus with the longest sub-threshold dwell
    double dwell = 0.0;  ///< s
};

/// m x n block of Delta_t snapshots (rows follow the L ordering, columns are
/// consecutive time steps) plus where it came from.
struct FeatureWindow {
    Eigen::MatrixXd data;
    double t_start = 0.0;
    double t_w = 0.0;
    std::optional<Stability> label;
    std::string trajectory_id;
    std::string topology_id;

    Eigen::Index rows() const noexcept { return data.rows(); }
    Eigen::Index cols() const noexcept { return data.cols(); }
};

/// Everything feature construction needs from the pre-fault steady state of
/// one topology: the partition, the factored L_s and the fixed V_G.
struct FeatureContext {
    SusceptancePartition part;
    LoadMatrix lm;
    Eigen::VectorXd v_gen;
};

inline FeatureContext feature_context(const GridModel& grid, const OperatingPoint& op) {
    if (op.topology_id != grid.topology_id())
        throw ArgumentError("operating point does not belong to topology '" + grid.topology_id() + "'");
    auto part = susceptance_partition(grid);
    auto lm = load_matrix(part, op.v_gen);
    return {std::move(part), std::move(lm), op.v_gen};
}

/// Delta_t = L_s^{-1} q_L(V_L(t)) for one snapshot of load-bus magnitudes.
inline Eigen::VectorXd delta_snapshot(const LoadMatrix& lm, const Eigen::VectorXd& v_load,
                                      const SusceptancePartition& part, const Eigen::VectorXd& v_gen) {
    if (lm.topology_id() != part.topology_id)
        throw ArgumentError("load matrix built on '" + lm.topology_id() + "' used with partition of '" +
                            part.topology_id + "'");
    return lm.solve(reactive_demand(v_load, part, v_gen));
}

/// Stacks Delta_t for every recorded sample of `tr` into an m x N matrix.
inline Eigen::MatrixXd build_features(const VoltageTrajectory& tr, const LoadMatrix& lm,
                                      const SusceptancePartition& part, const Eigen::VectorXd& v_gen) {
    if (lm.topology_id() != part.topology_id)
        throw ArgumentError("load matrix and partition belong to different topologies");
    if (!tr.meta.topology_id.empty() && tr.meta.topology_id != lm.topology_id())
        throw ArgumentError("trajectory of topology '" + tr.meta.topology_id + "' cannot use the load matrix of '" +
                            lm.topology_id() + "'");
    if (v_gen.size() != part.gen_count()) throw ArgumentError("generator voltage vector has wrong length");
    const Eigen::Index m = part.load_count();
    Eigen::MatrixXd vl(m, tr.samples());
    for (Eigen::Index r = 0; r < m; ++r) {
        const int bus = part.load_buses[static_cast<std::size_t>(r)];
        vl.row(r) = tr.magnitude.col(tr.column_of(bus)).transpose();
    }
    const Eigen::VectorXd drive = part.lg * v_gen;
    Eigen::MatrixXd q = part.ll * vl;
    q.colwise() += drive;
    q = -(vl.array() * q.array()).matrix();
    lm.solve_in_place(q);
    return q;
}

/// Extends a feature matrix to `cols` columns by repeating its last column.
/// Used for collapsed runs, whose record stops early.
inline Eigen::MatrixXd hold_last(const Eigen::MatrixXd& f, Eigen::Index cols) {
    if (f.cols() == 0) throw ArgumentError("cannot extend an empty feature matrix");
    if (f.cols() >= cols) return f;
    Eigen::MatrixXd out(f.rows(), cols);
    out.leftCols(f.cols()) = f;
    for (Eigen::Index c = f.cols(); c < cols; ++c) out.col(c) = f.col(f.cols() - 1);
    return out;
}

/// Cuts the m x round(t_w/dt) block that starts at the step nearest t_start.
inline FeatureWindow extract_window(const Eigen::MatrixXd& features, double t_start, double t_w, double dt) {
    if (!(dt > 0.0)) throw ArgumentError("dt must be positive");
    if (!(t_w > 0.0)) throw ArgumentError("window length must be positive");
    if (!(t_start >= 0.0)) throw ArgumentError("window start must be non-negative");
    const auto start = static_cast<Eigen::Index>(std::llround(t_start / dt));
    const auto n = static_cast<Eigen::Index>(std::llround(t_w / dt));
    if (n < 1) throw ArgumentError("window shorter than one step");
    if (start + n > features.cols())
        throw ArgumentError("window [" + std::to_string(t_start) + ", " + std::to_string(t_start + t_w) +
                            "] s exceeds the trajectory end");
    FeatureWindow w;
    w.data = features.middleCols(start, n);
    w.t_start = static_cast<double>(start) * dt;
    w.t_w = static_cast<double>(n) * dt;
    return w;
}

/// Adds i.i.d. Gaussian measurement noise to every magnitude (p.u.) and angle
/// (given in degrees) sample. Magnitudes are clamped at zero.
inline VoltageTrajectory inject_pmu_noise(const VoltageTrajectory& tr, double sigma_mag, double sigma_ang_deg,
                                          std::uint64_t seed) {
    if (!(sigma_mag >= 0.0) || !(sigma_ang_deg >= 0.0)) throw ArgumentError("noise sigmas must be non-negative");
    VoltageTrajectory out = tr;
    if (sigma_mag == 0.0 && sigma_ang_deg == 0.0) return out;
    const double sigma_ang = sigma_ang_deg * std::numbers::pi / 180.0;
    Rng rng(seed);
    for (Eigen::Index k = 0; k < out.samples(); ++k)
        for (Eigen::Index b = 0; b < out.bus_count(); ++b) {
            const double dm = rng.normal(), da = rng.normal();
            if (sigma_mag > 0.0) out.magnitude(k, b) = std::max(0.0, out.magnitude(k, b) + sigma_mag * dm);
            if (sigma_ang > 0.0) out.angle(k, b) += sigma_ang * da;
        }
    return out;
}

/// Unstable iff some bus stays below `v_thresh` for longer than `dwell_thresh`
/// in one stretch. The unrecorded tail of a collapsed run counts as below, and
/// a collapsed run is unstable however early or late it stopped.
inline StabilityLabel label_trajectory(const VoltageTrajectory& tr, double v_thresh = 0.8,
                                       double dwell_thresh = 1.0) {
    if (!(dwell_thresh > 0.0)) throw ArgumentError("dwell threshold must be positive");
    const double clearing = tr.meta.fault.t_on + tr.meta.fault.duration;
    if (tr.horizon - clearing < dwell_thresh - 1e-9)
        throw ArgumentError("trajectory horizon " + std::to_string(tr.horizon) + " s leaves less than " +
                            std::to_string(dwell_thresh) + " s after fault clearing");
    const Eigen::Index total = tr.steps() + 1;
    const Eigen::Index missing = std::max<Eigen::Index>(0, total - tr.samples());
    const auto limit = static_cast<Eigen::Index>(std::llround(dwell_thresh / tr.dt));

    StabilityLabel lab;
    Eigen::Index best = -1, worst_col = 0;
    for (Eigen::Index b = 0; b < tr.bus_count(); ++b) {
        Eigen::Index run = 0, longest = 0;
        for (Eigen::Index k = 0; k < tr.samples(); ++k) {
            run = tr.magnitude(k, b) < v_thresh ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        if (missing > 0) longest = std::max(longest, run + missing);
        if (longest > best) {
            best = longest;
            worst_col = b;
        }
    }
    if (best < 0) {
        if (tr.meta.collapsed) lab.label = Stability::unstable;
        return lab;
    }
    lab.dwell = static_cast<double>(best) * tr.dt;
    lab.worst_bus = worst_col < static_cast<Eigen::Index>(tr.bus_ids.size())
                        ? tr.bus_ids[static_cast<std::size_t>(worst_col)]
                        : static_cast<int>(worst_col + 1);
    lab.label = best > limit || tr.meta.collapsed ? Stability::unstable : Stability::stable;
    return lab;
}

}  // namespace stvs
