#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/grid/model.hpp"
#include "stvs/grid/susceptance.hpp"

namespace stvs {

using cplx = std::complex<double>;

/// Full complex bus admittance matrix used by network solves: series
/// impedance r + jx, total line charging split between ends, and an
/// off-nominal tap on the `from` side.
inline Eigen::MatrixXcd admittance_matrix(const GridModel& grid) {
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : grid.branches()) {
        if (!br.connected()) continue;
        const auto f = static_cast<Eigen::Index>(grid.bus_index(br.from));
        const auto t = static_cast<Eigen::Index>(grid.bus_index(br.to));
        const cplx ys = 1.0 / cplx(br.r, br.x);
        const cplx ysh(0.0, br.charging / 2.0);
        const double tap = br.tap;
        y(f, f) += (ys + ysh) / (tap * tap);
        y(t, t) += ys + ysh;
        y(f, t) -= ys / tap;
        y(t, f) -= ys / tap;
    }
    return y;
}

/// Solved steady state. Per-bus vectors follow ascending bus id; `v_gen` and
/// `v_load` follow the susceptance partition's G and L orderings.
struct OperatingPoint {
    Eigen::VectorXcd v;       ///< complex bus voltages
    Eigen::VectorXd p_inj;    ///< net active injection per bus
    Eigen::VectorXd q_inj;    ///< net reactive injection per bus
    Eigen::VectorXd v_gen;    ///< |V| at generator buses (n)
    Eigen::VectorXd v_load;   ///< |V| at load buses (m)
    std::vector<cplx> gen_power;   ///< gross output per generator record
    std::vector<cplx> load_power;  ///< scaled demand per load record
    double load_scale = 1.0;
    double mismatch = 0.0;
    int iterations = 0;
    std::string topology_id;

    double vm(std::size_t bus_pos) const { return std::abs(v[static_cast<Eigen::Index>(bus_pos)]); }
    double va(std::size_t bus_pos) const { return std::arg(v[static_cast<Eigen::Index>(bus_pos)]); }
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 50;
};

/// Newton-Raphson AC power flow in polar form. Generator buses are PV (the
/// highest-numbered one is the slack, angle 0), load buses are PQ. Load
/// demands and non-slack generator schedules are multiplied by `load_scale`.
inline OperatingPoint solve_power_flow(const GridModel& grid, double load_scale, PowerFlowOptions opts = {}) {
    if (!(load_scale > 0.0) || !std::isfinite(load_scale)) throw ArgumentError("load_scale must be positive");
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    const Eigen::MatrixXcd y = admittance_matrix(grid);
    const Eigen::MatrixXd g = y.real(), b = y.imag();
    const int slack_id = grid.slack_bus();
    const auto slack = static_cast<Eigen::Index>(grid.bus_index(slack_id));

    Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(n), q_spec = Eigen::VectorXd::Zero(n);
    for (const auto& gen : grid.generators())
        p_spec[static_cast<Eigen::Index>(grid.bus_index(gen.bus))] += gen.p_mech * load_scale;
    for (const auto& l : grid.loads()) {
        const auto k = static_cast<Eigen::Index>(grid.bus_index(l.bus));
        p_spec[k] -= l.p * load_scale;
        q_spec[k] -= l.q * load_scale;
    }

    std::vector<Eigen::Index> pv, pq;
    Eigen::VectorXd vm = Eigen::VectorXd::Ones(n), va = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& bus = grid.buses()[static_cast<std::size_t>(k)];
        if (bus.kind == BusKind::generator) {
            vm[k] = bus.v_base;
            if (k != slack) pv.push_back(k);
        } else {
            pq.push_back(k);
        }
    }
    // Unknown ordering: angles of pv then pq buses, then magnitudes of pq buses.
    std::vector<Eigen::Index> ang = pv;
    ang.insert(ang.end(), pq.begin(), pq.end());
    const auto na = static_cast<Eigen::Index>(ang.size());
    const auto nm = static_cast<Eigen::Index>(pq.size());

    auto injections = [&](Eigen::VectorXd& p, Eigen::VectorXd& q) {
        p.setZero(n);
        q.setZero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < n; ++k) {
                if (g(i, k) == 0.0 && b(i, k) == 0.0) continue;
                const double t = va[i] - va[k];
                const double c = std::cos(t), s = std::sin(t);
                p[i] += vm[i] * vm[k] * (g(i, k) * c + b(i, k) * s);
                q[i] += vm[i] * vm[k] * (g(i, k) * s - b(i, k) * c);
            }
    };

    Eigen::VectorXd p, q, f(na + nm);
    auto mismatch = [&]() {
        injections(p, q);
        for (Eigen::Index r = 0; r < na; ++r) f[r] = p_spec[ang[static_cast<std::size_t>(r)]] - p[ang[static_cast<std::size_t>(r)]];
        for (Eigen::Index r = 0; r < nm; ++r) f[na + r] = q_spec[pq[static_cast<std::size_t>(r)]] - q[pq[static_cast<std::size_t>(r)]];
        return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    };

    double err = mismatch();
    int it = 0;
    for (; it < opts.max_iterations && !(err < opts.tolerance); ++it) {
        if (!std::isfinite(err)) break;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);
        std::vector<Eigen::Index> col_ang(static_cast<std::size_t>(n), -1), col_mag(static_cast<std::size_t>(n), -1);
        for (Eigen::Index r = 0; r < na; ++r) col_ang[static_cast<std::size_t>(ang[static_cast<std::size_t>(r)])] = r;
        for (Eigen::Index r = 0; r < nm; ++r) col_mag[static_cast<std::size_t>(pq[static_cast<std::size_t>(r)])] = na + r;

        auto fill = [&](Eigen::Index row, Eigen::Index i, bool active) {
            for (Eigen::Index k = 0; k < n; ++k) {
                const double t = va[i] - va[k];
                const double c = std::cos(t), s = std::sin(t);
                const auto ca = col_ang[static_cast<std::size_t>(k)], cm = col_mag[static_cast<std::size_t>(k)];
                if (k != i) {
                    if (g(i, k) == 0.0 && b(i, k) == 0.0) continue;
                    const double dth = active ? vm[i] * vm[k] * (g(i, k) * s - b(i, k) * c)
                                              : -vm[i] * vm[k] * (g(i, k) * c + b(i, k) * s);
                    const double dv = active ? vm[i] * (g(i, k) * c + b(i, k) * s)
                                             : vm[i] * (g(i, k) * s - b(i, k) * c);
                    if (ca >= 0) jac(row, ca) = dth;
                    if (cm >= 0) jac(row, cm) = dv;
                } else {
                    const double dth = active ? -q[i] - b(i, i) * vm[i] * vm[i] : p[i] - g(i, i) * vm[i] * vm[i];
                    const double dv = active ? p[i] / vm[i] + g(i, i) * vm[i] : q[i] / vm[i] - b(i, i) * vm[i];
                    if (ca >= 0) jac(row, ca) = dth;
                    if (cm >= 0) jac(row, cm) = dv;
                }
            }
        };
        for (Eigen::Index r = 0; r < na; ++r) fill(r, ang[static_cast<std::size_t>(r)], true);
        for (Eigen::Index r = 0; r < nm; ++r) fill(na + r, pq[static_cast<std::size_t>(r)], false);

        const Eigen::VectorXd dx = jac.partialPivLu().solve(f);
        if (!dx.allFinite()) {
            err = std::numeric_limits<double>::infinity();
            break;
        }
        for (Eigen::Index r = 0; r < na; ++r) va[ang[static_cast<std::size_t>(r)]] += dx[r];
        for (Eigen::Index r = 0; r < nm; ++r) vm[pq[static_cast<std::size_t>(r)]] += dx[na + r];
        err = mismatch();
    }
    if (!(err < opts.tolerance) || (vm.array() <= 0.0).any())
        throw ConvergenceError("power flow did not converge at load_scale " + std::to_string(load_scale), err, it);

    OperatingPoint op;
    op.load_scale = load_scale;
    op.iterations = it;
    op.mismatch = err;
    op.topology_id = grid.topology_id();
    op.v.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) op.v[k] = std::polar(vm[k], va[k]);
    const Eigen::VectorXcd s = op.v.cwiseProduct((y * op.v).conjugate());
    op.p_inj = s.real();
    op.q_inj = s.imag();

    for (const auto& l : grid.loads()) op.load_power.emplace_back(l.p * load_scale, l.q * load_scale);
    for (const auto& gen : grid.generators()) {
        const auto k = static_cast<Eigen::Index>(grid.bus_index(gen.bus));
        op.gen_power.push_back(s[k]);
    }
    const auto gens = grid.generator_buses();
    const auto loads = grid.load_buses();
    op.v_gen.resize(static_cast<Eigen::Index>(gens.size()));
    op.v_load.resize(static_cast<Eigen::Index>(loads.size()));
    for (std::size_t i = 0; i < gens.size(); ++i) op.v_gen[static_cast<Eigen::Index>(i)] = vm[static_cast<Eigen::Index>(grid.bus_index(gens[i]))];
    for (std::size_t i = 0; i < loads.size(); ++i) op.v_load[static_cast<Eigen::Index>(i)] = vm[static_cast<Eigen::Index>(grid.bus_index(loads[i]))];
    return op;
}

/// Largest per-bus complex power imbalance (|S_calc - S_spec|) at `op`.
inline double power_balance_error(const GridModel& grid, const OperatingPoint& op) {
    const Eigen::MatrixXcd y = admittance_matrix(grid);
    const Eigen::VectorXcd s = op.v.cwiseProduct((y * op.v).conjugate());
    Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(s.size());
    for (std::size_t i = 0; i < grid.generators().size(); ++i)
        spec[static_cast<Eigen::Index>(grid.bus_index(grid.generators()[i].bus))] += op.gen_power[i];
    for (std::size_t i = 0; i < grid.loads().size(); ++i)
        spec[static_cast<Eigen::Index>(grid.bus_index(grid.loads()[i].bus))] -= op.load_power[i];
    return (s - spec).cwiseAbs().maxCoeff();
}

}  // namespace stvs
