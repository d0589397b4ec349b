#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/grid/model.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace stvs::dyn {

inline constexpr double kOmegaSync = 2.0 * std::numbers::pi * 60.0;

struct SimSettings {
    /// Below this magnitude constant-power loads become constant impedance.
    double cp_cutoff = 0.3;
    double network_tolerance = 1e-8;
    int network_max_iterations = 20;
};

struct GenUnit {
    Eigen::Index bus = 0;
    double e_mag = 0.0;
    double p_mech = 0.0;
    double m = 0.0;  ///< 2H
    double d = 0.0;
    cplx y;          ///< 1 / (j x'd)
};

struct MotorUnit {
    Eigen::Index bus = 0;
    int bus_id = 0;
    MotorParams params;
    double base = 0.0;     ///< motor rating in system p.u.
    double t_load0 = 0.0;  ///< load torque at zero slip
    double x_diff = 0.0;   ///< X - X'
    double t_open = 0.0;   ///< T0'
    cplx z;                ///< Rs + jX', motor base
    cplx y;                ///< system-base Norton admittance
};

struct ConstantPower {
    Eigen::Index bus = 0;
    cplx s;  ///< consumed complex power
};

/// Static description of one dynamic run: network, machines and loads with
/// their constants. Shared read-only by the solver and derivative evaluation.
struct DynamicModel {
    Eigen::MatrixXcd y_net;
    std::vector<GenUnit> gens;
    std::vector<MotorUnit> motors;
    std::vector<ConstantPower> cp_loads;
    SimSettings settings;

    Eigen::Index bus_count() const noexcept { return y_net.rows(); }
    Eigen::Index state_count() const noexcept {
        return static_cast<Eigen::Index>(2 * gens.size() + 3 * motors.size());
    }
};

/// State vector layout: per generator (delta, omega), then per motor
/// (Re E', Im E', slip).
struct DynamicState {
    Eigen::VectorXd x;
    Eigen::VectorXcd v;  ///< network voltages consistent with `x`
};

namespace detail {

/// Terminal active power drawn by a motor at slip s and voltage magnitude vm,
/// motor base.
inline cplx motor_impedance(const MotorParams& p, double s) {
    const cplx rotor(p.rr / s, p.xr);
    const cplx mag(0.0, p.xm);
    return cplx(p.rs, p.xs) + mag * rotor / (mag + rotor);
}

inline double motor_power(const MotorParams& p, double s, double vm) {
    return vm * vm * (1.0 / motor_impedance(p, s)).real();
}

/// Slip on the stable branch at which the motor draws `p_mb` (motor base),
/// or nullopt if the demand exceeds the pull-out power.
inline std::optional<double> steady_slip(const MotorParams& p, double p_mb, double vm) {
    // Pull-out slip by golden-section search on the unimodal power curve.
    double a = 1e-6, b = 1.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 200; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (motor_power(p, c, vm) > motor_power(p, d, vm)) b = d;
        else a = c;
    }
    const double s_peak = 0.5 * (a + b);
    if (motor_power(p, s_peak, vm) < p_mb) return std::nullopt;
    double lo = 1e-12, hi = s_peak;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (motor_power(p, mid, vm) < p_mb) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Current drawn by a constant-power load; constant impedance below the cutoff.
inline cplx constant_power_current(cplx s, cplx v, double cutoff) {
    const double vm = std::abs(v);
    if (vm >= cutoff) return std::conj(s / v);
    return std::conj(s) * v / (cutoff * cutoff);
}

/// Builds the dynamic model around a solved operating point and the matching
/// equilibrium state.
inline std::pair<DynamicModel, DynamicState> init_dynamic_state(const GridModel& grid, const OperatingPoint& op,
                                                                SimSettings settings = {}) {
    if (op.topology_id != grid.topology_id())
        throw ArgumentError("operating point was solved on topology '" + op.topology_id + "', not '" +
                            grid.topology_id() + "'");
    DynamicModel model;
    model.settings = settings;
    model.y_net = admittance_matrix(grid);

    std::vector<double> x;
    for (std::size_t i = 0; i < grid.generators().size(); ++i) {
        const auto& g = grid.generators()[i];
        GenUnit u;
        u.bus = static_cast<Eigen::Index>(grid.bus_index(g.bus));
        const cplx v = op.v[u.bus];
        const cplx i_out = std::conj(op.gen_power[i] / v);
        const cplx e = v + cplx(0.0, g.xd_prime) * i_out;
        u.e_mag = std::abs(e);
        u.p_mech = (e * std::conj(i_out)).real();
        u.m = 2.0 * g.inertia;
        u.d = g.damping;
        u.y = 1.0 / cplx(0.0, g.xd_prime);
        model.gens.push_back(u);
        x.push_back(std::arg(e));
        x.push_back(0.0);
    }

    for (std::size_t i = 0; i < grid.loads().size(); ++i) {
        const auto& l = grid.loads()[i];
        const auto bus = static_cast<Eigen::Index>(grid.bus_index(l.bus));
        const cplx v = op.v[bus];
        cplx s_cp = op.load_power[i];
        if (l.motor_fraction > 0.0 && l.p > 0.0) {
            const auto& mp = grid.motor(l.motor);
            MotorUnit m;
            m.bus = bus;
            m.bus_id = l.bus;
            m.params = mp;
            m.base = l.motor_fraction * l.p / mp.rated_loading;
            const double p_mot = l.motor_fraction * op.load_power[i].real();
            const auto slip = detail::steady_slip(mp, p_mot / m.base, std::abs(v));
            if (!slip)
                throw ValidationError("equilibrium initialization failed: motor at bus " + std::to_string(l.bus) +
                                      " stalls at steady state");
            m.z = cplx(mp.rs, mp.x_transient());
            m.y = m.base / m.z;
            m.x_diff = mp.x_open() - mp.x_transient();
            m.t_open = mp.t_open(kOmegaSync);
            const cplx i_mb = v / detail::motor_impedance(mp, *slip);
            const cplx ep = v - m.z * i_mb;
            const double te = (ep * std::conj(i_mb)).real();
            m.t_load0 = te / std::pow(1.0 - *slip, mp.torque_exponent);
            s_cp -= v * std::conj(i_mb) * m.base;
            model.motors.push_back(m);
            x.push_back(ep.real());
            x.push_back(ep.imag());
            x.push_back(*slip);
        }
        if (std::abs(s_cp) > 0.0) model.cp_loads.push_back({bus, s_cp});
    }

    DynamicState st;
    st.x = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    st.v = op.v;
    return {std::move(model), std::move(st)};
}

/// Algebraic network solve by Newton on the complex current mismatch,
/// written in real 2N form. The Jacobian is refactored only when the
/// configuration changes or a chord step stalls. When Newton fails after a
/// fault is applied or cleared, the fault admittance is ramped from the last
/// converged configuration to the new one (continuation), which follows the
/// solution branch through the constant-power cutoff.
class NetworkSolver {
  public:
    explicit NetworkSolver(const DynamicModel& model) : model_(model) {}

    /// Sets the shunt fault admittance (0 = no fault) at bus position `bus`.
    void set_fault(std::optional<Eigen::Index> bus, cplx admittance) {
        fault_bus_ = bus;
        fault_y_ = bus ? admittance : cplx(0.0, 0.0);
        assemble(fault_bus_, fault_y_);
    }

    /// Solves for bus voltages given machine states; `v` is the warm start and
    /// receives the solution. Returns false on divergence.
    bool solve(const Eigen::VectorXd& x, Eigen::VectorXcd& v) {
        if (y_aug_.size() == 0) set_fault(std::nullopt, 0.0);
        load_sources(x);
        const int budget = model_.settings.network_max_iterations;
        bool ok = newton(v, budget);
        if (!ok && anchor_v_.size() == v.size() && (anchor_bus_ != fault_bus_ || anchor_y_ != fault_y_)) {
            Eigen::VectorXcd w = anchor_v_;
            ok = continuation(w);
            if (ok) v = w;
            assemble(fault_bus_, fault_y_);
            lu_.reset();
        }
        if (ok) {
            anchor_v_ = v;
            anchor_bus_ = fault_bus_;
            anchor_y_ = fault_y_;
        }
        return ok;
    }

    int last_iterations() const noexcept { return last_iterations_; }
    int factorizations() const noexcept { return factorizations_; }

  private:
    void assemble(std::optional<Eigen::Index> bus, cplx y_fault) {
        y_aug_ = model_.y_net;
        for (const auto& g : model_.gens) y_aug_(g.bus, g.bus) += g.y;
        for (const auto& m : model_.motors) y_aug_(m.bus, m.bus) += m.y;
        if (bus) y_aug_(*bus, *bus) += y_fault;
        lu_.reset();
    }

    void load_sources(const Eigen::VectorXd& x) {
        source_.setZero(model_.bus_count());
        Eigen::Index k = 0;
        for (const auto& g : model_.gens) {
            source_[g.bus] += g.y * std::polar(g.e_mag, x[k]);
            k += 2;
        }
        for (const auto& m : model_.motors) {
            source_[m.bus] += m.y * cplx(x[k], x[k + 1]);
            k += 3;
        }
    }

    /// Ramps the fault admittance from the anchor configuration to the target
    /// along y(t) = exp(log1p|y_a| + t (log1p|y_t| - log1p|y_a|)) - 1 with
    /// adaptive steps in t.
    bool continuation(Eigen::VectorXcd& w) {
        const auto bus = fault_bus_ ? fault_bus_ : anchor_bus_;
        if (!bus) return false;
        const double ya = anchor_bus_ == bus ? std::abs(anchor_y_) : 0.0;
        const double yt = fault_bus_ == bus ? std::abs(fault_y_) : 0.0;
        const cplx dir = fault_bus_ == bus ? fault_y_ / std::max(yt, 1e-300) : anchor_y_ / std::max(ya, 1e-300);
        const double la = std::log1p(ya), lt = std::log1p(yt);
        const int budget = 5 * model_.settings.network_max_iterations;
        double t = 0.0, h = 0.05;
        while (t < 1.0) {
            const double tn = std::min(1.0, t + h);
            assemble(bus, dir * std::expm1(la + tn * (lt - la)));
            Eigen::VectorXcd trial = w;
            if (newton(trial, budget)) {
                w = trial;
                t = tn;
                h = std::min(0.25, 1.5 * h);
            } else {
                h *= 0.5;
                if (h < 1e-4) return false;
            }
        }
        return true;
    }

    bool newton(Eigen::VectorXcd& v, int max_iterations) {
        const double tol = model_.settings.network_tolerance;
        double err = residual(v);
        bool fresh = false;
        for (int it = 0;; ++it) {
            last_iterations_ = it;
            if (!std::isfinite(err)) return false;
            if (err < tol) return true;
            if (it == max_iterations) return false;
            if (!lu_) {
                factor(v);
                fresh = true;
            }
            Eigen::VectorXd dv = step_direction();
            double next = trial_residual(v, dv, 1.0);
            if (!(next < 0.5 * err) && !fresh) {
                // Chord step stalled: refactor at the current point and retry.
                factor(v);
                fresh = true;
                residual(v);
                dv = step_direction();
                next = trial_residual(v, dv, 1.0);
            }
            double step = 1.0;
            while (!(next < err) && step > 1.0 / 64.0) {
                step *= 0.5;
                next = trial_residual(v, dv, step);
            }
            v = trial_;
            err = next;
            if (step < 1.0) lu_.reset();
            else fresh = false;
        }
    }

    Eigen::VectorXd step_direction() {
        const Eigen::Index n = model_.bus_count();
        for (Eigen::Index i = 0; i < n; ++i) {
            rhs_[i] = -residual_[i].real();
            rhs_[n + i] = -residual_[i].imag();
        }
        return lu_->solve(rhs_);
    }

    double trial_residual(const Eigen::VectorXcd& v, const Eigen::VectorXd& dv, double step) {
        const Eigen::Index n = model_.bus_count();
        trial_ = v;
        for (Eigen::Index i = 0; i < n; ++i) trial_[i] += step * cplx(dv[i], dv[n + i]);
        return residual(trial_);
    }

    double residual(const Eigen::VectorXcd& v) {
        residual_.noalias() = y_aug_ * v - source_;
        const double cut = model_.settings.cp_cutoff;
        for (const auto& l : model_.cp_loads) residual_[l.bus] += constant_power_current(l.s, v[l.bus], cut);
        return residual_.cwiseAbs().maxCoeff();
    }

    void factor(const Eigen::VectorXcd& v) {
        const Eigen::Index n = model_.bus_count();
        Eigen::MatrixXd j(2 * n, 2 * n);
        j.topLeftCorner(n, n) = y_aug_.real();
        j.topRightCorner(n, n) = -y_aug_.imag();
        j.bottomLeftCorner(n, n) = y_aug_.imag();
        j.bottomRightCorner(n, n) = y_aug_.real();
        const double cut = model_.settings.cp_cutoff;
        for (const auto& l : model_.cp_loads) {
            const cplx vb = v[l.bus];
            cplx d_re, d_im;  // dI/dVr, dI/dVi
            if (std::abs(vb) >= cut) {
                const cplx w = std::conj(vb);
                const cplx dw = -std::conj(l.s) / (w * w);
                d_re = dw;
                d_im = cplx(0.0, -1.0) * dw;
            } else {
                const cplx c = std::conj(l.s) / (cut * cut);
                d_re = c;
                d_im = cplx(0.0, 1.0) * c;
            }
            const auto b = l.bus;
            j(b, b) += d_re.real();
            j(b, n + b) += d_im.real();
            j(n + b, b) += d_re.imag();
            j(n + b, n + b) += d_im.imag();
        }
        lu_.emplace(j);
        rhs_.resize(2 * n);
        ++factorizations_;
    }

    const DynamicModel& model_;
    Eigen::MatrixXcd y_aug_;
    std::optional<Eigen::Index> fault_bus_;
    cplx fault_y_{0.0, 0.0};
    std::optional<Eigen::Index> anchor_bus_;
    cplx anchor_y_{0.0, 0.0};
    Eigen::VectorXcd anchor_v_;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
    Eigen::VectorXcd source_, residual_, trial_;
    Eigen::VectorXd rhs_;
    int last_iterations_ = 0;
    int factorizations_ = 0;
};

/// Time derivative of the machine states given solved network voltages.
inline void derivatives(const DynamicModel& model, const Eigen::VectorXd& x, const Eigen::VectorXcd& v,
                        Eigen::VectorXd& dx) {
    dx.resize(x.size());
    Eigen::Index k = 0;
    for (const auto& g : model.gens) {
        const double delta = x[k], omega = x[k + 1];
        const cplx e = std::polar(g.e_mag, delta);
        const cplx i_out = g.y * (e - v[g.bus]);
        const double pe = (e * std::conj(i_out)).real();
        dx[k] = kOmegaSync * omega;
        dx[k + 1] = (g.p_mech - pe - g.d * omega) / g.m;
        k += 2;
    }
    for (const auto& m : model.motors) {
        const cplx ep(x[k], x[k + 1]);
        const double slip = x[k + 2];
        const cplx i_mb = (v[m.bus] - ep) / m.z;
        const cplx dep = cplx(0.0, -kOmegaSync * slip) * ep - (ep - cplx(0.0, m.x_diff) * i_mb) / m.t_open;
        const double te = (ep * std::conj(i_mb)).real();
        const double tl = m.t_load0 * std::pow(std::max(0.0, 1.0 - slip), m.params.torque_exponent);
        dx[k] = dep.real();
        dx[k + 1] = dep.imag();
        dx[k + 2] = (tl - te) / (2.0 * m.params.inertia);
        k += 3;
    }
}

/// Largest |dx/dt| at `state` with the fault-free network.
inline double max_derivative(const DynamicModel& model, const DynamicState& state) {
    NetworkSolver solver(model);
    Eigen::VectorXcd v = state.v;
    if (!solver.solve(state.x, v)) throw ConvergenceError("network solve failed at the initial state", 0.0, 0);
    Eigen::VectorXd dx;
    derivatives(model, state.x, v, dx);
    return dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace stvs::dyn
