#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "stvs/grid/model.hpp"

namespace stvs {

/// Series-susceptance matrix of the connected network split into the
/// generator (G) and load (L) blocks. Rows/columns follow ascending bus id.
///
/// Sign convention: off-diagonal entries are +b_ij = +1/x_ij and diagonal
/// entries are -sum_j b_ij, i.e. the imaginary part of the admittance of a
/// lossless inductive network. Resistance, charging and taps are excluded.
struct SusceptancePartition {
    Eigen::MatrixXd full;  ///< N x N, ascending bus id
    Eigen::MatrixXd ll;    ///< m x m
    Eigen::MatrixXd lg;    ///< m x n
    Eigen::MatrixXd gg;    ///< n x n
    Eigen::MatrixXd gl;    ///< n x m
    std::map<int, int> load_index;  ///< bus id -> row in the L block
    std::map<int, int> gen_index;   ///< bus id -> row in the G block
    std::vector<int> load_buses;    ///< ascending; inverse of load_index
    std::vector<int> gen_buses;     ///< ascending; inverse of gen_index
    std::string topology_id;

    int load_count() const noexcept { return static_cast<int>(load_buses.size()); }
    int gen_count() const noexcept { return static_cast<int>(gen_buses.size()); }
};

inline Eigen::MatrixXd susceptance_matrix(const GridModel& grid) {
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (const auto& br : grid.branches()) {
        if (!br.connected()) continue;
        const auto i = static_cast<Eigen::Index>(grid.bus_index(br.from));
        const auto j = static_cast<Eigen::Index>(grid.bus_index(br.to));
        const double bij = 1.0 / br.x;
        b(i, j) += bij;
        b(j, i) += bij;
        b(i, i) -= bij;
        b(j, j) -= bij;
    }
    return b;
}

inline SusceptancePartition susceptance_partition(const GridModel& grid) {
    SusceptancePartition p;
    p.full = susceptance_matrix(grid);
    p.load_buses = grid.load_buses();
    p.gen_buses = grid.generator_buses();
    p.topology_id = grid.topology_id();

    std::vector<Eigen::Index> li, gi;
    for (std::size_t k = 0; k < p.load_buses.size(); ++k) {
        p.load_index[p.load_buses[k]] = static_cast<int>(k);
        li.push_back(static_cast<Eigen::Index>(grid.bus_index(p.load_buses[k])));
    }
    for (std::size_t k = 0; k < p.gen_buses.size(); ++k) {
        p.gen_index[p.gen_buses[k]] = static_cast<int>(k);
        gi.push_back(static_cast<Eigen::Index>(grid.bus_index(p.gen_buses[k])));
    }
    p.ll = p.full(li, li);
    p.lg = p.full(li, gi);
    p.gg = p.full(gi, gi);
    p.gl = p.full(gi, li);
    return p;
}

}  // namespace stvs
