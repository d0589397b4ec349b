#pragma once

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/grid/susceptance.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace stvs {

namespace detail {

inline constexpr double kSingularRcond = 1e-13;

inline Eigen::PartialPivLU<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& a, const char* what) {
    if (a.rows() == 0) throw SingularMatrixError(std::string(what) + " is empty");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > kSingularRcond)) throw SingularMatrixError(std::string(what) + " is singular");
    return lu;
}

}  // namespace detail

/// Reactive injection at bus `bus_id` from the series-susceptance network:
/// Q_i = -sum_j V_i V_j b_ij cos(theta_i - theta_j).
inline double reactive_injection(const Eigen::VectorXcd& v, const SusceptancePartition& part, std::size_t bus_pos) {
    const auto i = static_cast<Eigen::Index>(bus_pos);
    if (i < 0 || i >= part.full.rows()) throw ArgumentError("bus position out of range");
    const double vi = std::abs(v[i]), ti = std::arg(v[i]);
    double q = 0.0;
    for (Eigen::Index j = 0; j < part.full.cols(); ++j) {
        const double bij = part.full(i, j);
        if (bij == 0.0) continue;
        q -= vi * std::abs(v[j]) * bij * std::cos(ti - std::arg(v[j]));
    }
    return q;
}

inline double reactive_injection(const OperatingPoint& op, const SusceptancePartition& part, std::size_t bus_pos) {
    return reactive_injection(op.v, part, bus_pos);
}

/// Per-load stress matrix L_s = 1/4 diag(v_oc) B_LL diag(v_oc) with the
/// open-circuit load voltage v_oc = -B_LL^{-1} B_LG V_G. The LU factors of
/// L_s are kept so every snapshot solve reuses them.
class LoadMatrix {
  public:
    LoadMatrix(Eigen::MatrixXd ls, Eigen::VectorXd v_oc, std::string topology_id)
        : ls_(std::move(ls)), v_oc_(std::move(v_oc)), topology_id_(std::move(topology_id)),
          lu_(std::make_shared<const Eigen::PartialPivLU<Eigen::MatrixXd>>(
              detail::factor_or_throw(ls_, "load matrix L_s"))) {}

    const Eigen::MatrixXd& ls() const noexcept { return ls_; }
    const Eigen::VectorXd& v_oc() const noexcept { return v_oc_; }
    const std::string& topology_id() const noexcept { return topology_id_; }
    Eigen::Index size() const noexcept { return ls_.rows(); }

    /// Returns L_s^{-1} q via the stored factorization.
    Eigen::VectorXd solve(const Eigen::VectorXd& q) const {
        if (q.size() != ls_.rows()) throw ArgumentError("reactive demand vector has wrong length");
        return lu_->solve(q);
    }

    template <typename Derived>
    void solve_in_place(Eigen::MatrixBase<Derived>& q) const {
        q = lu_->solve(q).eval();
    }

  private:
    Eigen::MatrixXd ls_;
    Eigen::VectorXd v_oc_;
    std::string topology_id_;
    std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

inline Eigen::VectorXd open_circuit_voltage(const SusceptancePartition& part, const Eigen::VectorXd& v_gen) {
    if (v_gen.size() != part.gen_count()) throw ArgumentError("generator voltage vector has wrong length");
    if ((v_gen.array() <= 0.0).any()) throw ArgumentError("generator voltages must be positive");
    const auto lu = detail::factor_or_throw(part.ll, "B_LL (disconnected load subnetwork?)");
    return -lu.solve(part.lg * v_gen);
}

inline LoadMatrix load_matrix(const SusceptancePartition& part, const Eigen::VectorXd& v_gen) {
    Eigen::VectorXd voc = open_circuit_voltage(part, v_gen);
    Eigen::MatrixXd ls = 0.25 * voc.asDiagonal() * part.ll * voc.asDiagonal();
    // Exact symmetry: both halves come from the same products.
    ls = 0.5 * (ls + ls.transpose()).eval();
    return LoadMatrix(std::move(ls), std::move(voc), part.topology_id);
}

/// Reactive demand of loads, q_L = -[V_L](B_LL V_L + B_LG V_G).
inline Eigen::VectorXd reactive_demand(const Eigen::VectorXd& v_load, const SusceptancePartition& part,
                                       const Eigen::VectorXd& v_gen) {
    if (v_load.size() != part.load_count() || v_gen.size() != part.gen_count())
        throw ArgumentError("voltage vectors do not match the susceptance partition");
    return -(v_load.array() * (part.ll * v_load + part.lg * v_gen).array()).matrix();
}

/// Stability index Delta = || L_s^{-1} q_L ||_inf.
inline double stability_index(const LoadMatrix& lm, const Eigen::VectorXd& q_load) {
    if (q_load.size() == 0) return 0.0;
    return lm.solve(q_load).cwiseAbs().maxCoeff();
}

}  // namespace stvs
