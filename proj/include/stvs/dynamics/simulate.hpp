#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/dynamics/system.hpp"
#include "stvs/grid/model.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace stvs {

/// Three-phase fault as a large shunt admittance at one bus, cleared
/// without any topology change.
struct FaultSpec {
    int bus = 0;
    double t_on = 0.1;      ///< s
    double duration = 0.1;  ///< s
    double admittance = 1e4;  ///< p.u., conductive shunt

    void validate(const GridModel& grid) const {
        if (!(duration > 0.0)) throw ArgumentError("fault duration must be positive");
        if (!(t_on >= 0.0)) throw ArgumentError("fault t_on must be non-negative");
        if (!grid.has_bus(bus)) throw ArgumentError("fault bus " + std::to_string(bus) + " does not exist");
    }
};

struct TrajectoryMeta {
    std::string topology_id;
    double load_scale = 1.0;
    FaultSpec fault;
    std::uint64_t seed = 0;
    bool collapsed = false;  ///< network solve diverged; series truncated
};

/// Per-bus magnitude/angle record at a fixed step: sample k is time k*dt,
/// k = 0..steps. Rows are samples, columns buses in ascending id order.
struct VoltageTrajectory {
    double dt = 0.01;
    double horizon = 0.0;
    std::vector<int> bus_ids;
    Eigen::MatrixXd magnitude;
    Eigen::MatrixXd angle;
    TrajectoryMeta meta;

    Eigen::Index samples() const noexcept { return magnitude.rows(); }
    Eigen::Index bus_count() const noexcept { return magnitude.cols(); }
    /// Number of steps the record was meant to cover (horizon / dt).
    Eigen::Index steps() const noexcept { return static_cast<Eigen::Index>(std::llround(horizon / dt)); }
    double time(Eigen::Index k) const noexcept { return static_cast<double>(k) * dt; }

    Eigen::Index column_of(int bus_id) const {
        for (std::size_t i = 0; i < bus_ids.size(); ++i)
            if (bus_ids[i] == bus_id) return static_cast<Eigen::Index>(i);
        throw ArgumentError("bus " + std::to_string(bus_id) + " not in trajectory");
    }
};

struct SimulationStats {
    int factorizations = 0;
    long network_iterations = 0;
};

/// Fixed-step RK4 integration of the machine states with the network solved
/// at every stage. Fault application and clearing are snapped to the step
/// grid; a fault shorter than half a step therefore never appears.
inline VoltageTrajectory simulate(const dyn::DynamicModel& model, const dyn::DynamicState& init, const FaultSpec& fault,
                                  std::optional<Eigen::Index> fault_pos, double horizon, double dt,
                                  SimulationStats* stats = nullptr) {
    if (!(dt > 0.0 && dt <= 0.02)) throw ArgumentError("dt must lie in (0, 0.02] s");
    if (!(horizon >= fault.t_on + fault.duration + 2.0))
        throw ArgumentError("horizon must cover fault clearing plus 2 s");

    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    const auto on_step = static_cast<Eigen::Index>(std::llround(fault.t_on / dt));
    const auto off_step = static_cast<Eigen::Index>(std::llround((fault.t_on + fault.duration) / dt));
    const Eigen::Index n = model.bus_count();

    VoltageTrajectory tr;
    tr.dt = dt;
    tr.horizon = horizon;
    tr.magnitude.resize(steps + 1, n);
    tr.angle.resize(steps + 1, n);
    tr.meta.fault = fault;

    dyn::NetworkSolver solver(model);
    bool faulted = false;
    solver.set_fault(std::nullopt, 0.0);

    Eigen::VectorXd x = init.x, k1, k2, k3, k4, xs;
    Eigen::VectorXcd v = init.v, vs, v_prefault = init.v;
    long iterations = 0;

    auto stage = [&](const Eigen::VectorXd& xi, Eigen::VectorXd& dx) {
        vs = v;
        if (!solver.solve(xi, vs)) return false;
        iterations += solver.last_iterations();
        dyn::derivatives(model, xi, vs, dx);
        return true;
    };

    Eigen::Index recorded = 0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const bool want_fault = fault_pos && k >= on_step && k < off_step && fault.admittance != 0.0;
        if (want_fault != faulted) {
            solver.set_fault(want_fault ? fault_pos : std::nullopt, want_fault ? cplx(fault.admittance, 0.0) : 0.0);
            if (want_fault) v_prefault = v;
            // Restart from the pre-fault profile so Newton lands on the
            // high-voltage solution branch after clearing.
            else v = v_prefault;
            faulted = want_fault;
        }
        if (!solver.solve(x, v)) break;
        iterations += solver.last_iterations();
        tr.magnitude.row(k) = v.cwiseAbs().transpose();
        for (Eigen::Index b = 0; b < n; ++b) tr.angle(k, b) = std::arg(v[b]);
        recorded = k + 1;
        if (k == steps) break;

        dyn::derivatives(model, x, v, k1);
        xs = x + 0.5 * dt * k1;
        if (!stage(xs, k2)) break;
        xs = x + 0.5 * dt * k2;
        if (!stage(xs, k3)) break;
        xs = x + dt * k3;
        if (!stage(xs, k4)) break;
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) break;
    }
    if (recorded < steps + 1) {
        tr.meta.collapsed = true;
        tr.magnitude.conservativeResize(recorded, n);
        tr.angle.conservativeResize(recorded, n);
    }
    if (stats) {
        stats->factorizations = solver.factorizations();
        stats->network_iterations = iterations;
    }
    return tr;
}

/// Convenience overload: initializes the dynamic state from `op` on `grid`.
inline VoltageTrajectory simulate(const GridModel& grid, const OperatingPoint& op, const FaultSpec& fault,
                                  double horizon, double dt, dyn::SimSettings settings = {},
                                  SimulationStats* stats = nullptr) {
    fault.validate(grid);
    const auto [model, init] = dyn::init_dynamic_state(grid, op, settings);
    auto tr = simulate(model, init, fault, static_cast<Eigen::Index>(grid.bus_index(fault.bus)), horizon, dt, stats);
    for (const auto& b : grid.buses()) tr.bus_ids.push_back(b.id);
    tr.meta.topology_id = grid.topology_id();
    tr.meta.load_scale = op.load_scale;
    return tr;
}

/// Total bus-seconds spent below `threshold` (severity indicator). A collapsed
/// run saturates the indicator: every bus counts as below over the whole
/// record, since its voltages after the collapse are undefined.
inline double undervoltage_bus_seconds(const VoltageTrajectory& tr, double threshold = 0.8) {
    if (tr.meta.collapsed) return static_cast<double>((tr.steps() + 1) * tr.bus_count()) * tr.dt;
    return static_cast<double>((tr.magnitude.array() < threshold).count()) * tr.dt;
}

}  // namespace stvs
