#pragma once

// Independent reference implementations for tests. Everything here is
// written with plain loops over std::vector and long double elimination so
// that it shares no code path with the Eigen-based library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stvs/core/random.hpp"
#include "stvs/grid/model.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

/// Random connected grid with `buses` buses of which `gens` are generators:
/// a random spanning tree plus a few chords, reactances in [0.05, 0.5].
inline stvs::GridModel random_grid(stvs::Rng& rng, int buses, int gens) {
    std::vector<stvs::Bus> bs;
    std::vector<int> order(static_cast<std::size_t>(buses));
    for (int i = 0; i < buses; ++i) order[static_cast<std::size_t>(i)] = i + 1;
    rng.shuffle(order.begin(), order.end());
    std::vector<bool> is_gen(static_cast<std::size_t>(buses) + 1, false);
    for (int k = 0; k < gens; ++k) is_gen[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
    for (int id = 1; id <= buses; ++id) {
        stvs::Bus b;
        b.id = id;
        b.kind = is_gen[static_cast<std::size_t>(id)] ? stvs::BusKind::generator : stvs::BusKind::load;
        b.v_base = is_gen[static_cast<std::size_t>(id)] ? rng.uniform(0.95, 1.08) : 1.0;
        bs.push_back(b);
    }
    std::vector<stvs::Branch> br;
    auto has = [&](int a, int b) {
        return std::any_of(br.begin(), br.end(), [&](const stvs::Branch& x) { return x.joins(a, b); });
    };
    for (int k = 1; k < buses; ++k) {
        const int a = order[static_cast<std::size_t>(k)];
        const int b = order[rng.below(static_cast<std::uint64_t>(k))];
        br.push_back({a, b, 0.0, rng.uniform(0.05, 0.5)});
    }
    const int chords = static_cast<int>(rng.below(static_cast<std::uint64_t>(buses)));
    for (int k = 0; k < chords; ++k) {
        const int a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(buses)));
        const int b = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(buses)));
        if (a != b && !has(a, b)) br.push_back({a, b, 0.0, rng.uniform(0.05, 0.5)});
    }
    std::vector<stvs::Generator> gs;
    std::vector<stvs::Load> ls;
    for (const auto& b : bs) {
        if (b.kind == stvs::BusKind::generator)
            gs.push_back({b.id, rng.uniform(0.1, 1.0), rng.uniform(2.0, 8.0), 1.0, rng.uniform(0.05, 0.3)});
        else if (rng.uniform() < 0.7)
            ls.push_back({b.id, rng.uniform(0.05, 0.5), rng.uniform(0.0, 0.2), 0.5, "default"});
    }
    return stvs::GridModel("random" + std::to_string(buses), 100.0, bs, br, gs, ls);
}

/// Full susceptance matrix by direct branch accumulation, ascending bus id.
inline Mat susceptance(const stvs::GridModel& g) {
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < g.buses().size(); ++i) pos[g.buses()[i].id] = i;
    Mat b = zeros(g.buses().size(), g.buses().size());
    for (const auto& br : g.branches()) {
        if (!br.connected()) continue;
        const std::size_t i = pos[br.from], j = pos[br.to];
        b[i][j] += 1.0 / br.x;
        b[j][i] += 1.0 / br.x;
        b[i][i] -= 1.0 / br.x;
        b[j][j] -= 1.0 / br.x;
    }
    return b;
}

/// Rows `r` and columns `c` of `a` (positions).
inline Mat block(const Mat& a, const std::vector<std::size_t>& r, const std::vector<std::size_t>& c) {
    Mat out = zeros(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) out[i][j] = a[r[i]][c[j]];
    return out;
}

struct Split {
    std::vector<std::size_t> load, gen;  ///< positions in ascending-id order
};

inline Split split(const stvs::GridModel& g) {
    Split s;
    for (std::size_t i = 0; i < g.buses().size(); ++i)
        (g.buses()[i].kind == stvs::BusKind::generator ? s.gen : s.load).push_back(i);
    return s;
}

/// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
inline Mat inverse(const Mat& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> m(n, std::vector<long double>(2 * n, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
        m[i][n + i] = 1.0L;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[p][c])) p = r;
        if (m[p][c] == 0.0L) throw std::runtime_error("singular matrix in oracle");
        std::swap(m[p], m[c]);
        const long double d = m[c][c];
        for (auto& v : m[c]) v /= d;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = m[r][c];
            if (f == 0.0L) continue;
            for (std::size_t k = 0; k < 2 * n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    Mat inv = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = static_cast<double>(m[i][n + j]);
    return inv;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    Vec y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < x.size(); ++j) s += static_cast<long double>(a[i][j]) * x[j];
        y[i] = static_cast<double>(s);
    }
    return y;
}

/// v_oc = -B_LL^{-1} B_LG V_G.
inline Vec open_circuit(const stvs::GridModel& g, const Vec& vg) {
    const auto b = susceptance(g);
    const auto s = split(g);
    const Vec drive = matvec(block(b, s.load, s.gen), vg);
    Vec v = matvec(inverse(block(b, s.load, s.load)), drive);
    for (auto& x : v) x = -x;
    return v;
}

/// L_s(i,j) = v_oc_i * B_LL(i,j) * v_oc_j / 4.
inline Mat load_matrix(const stvs::GridModel& g, const Vec& vg) {
    const auto b = susceptance(g);
    const auto s = split(g);
    const auto voc = open_circuit(g, vg);
    Mat ls = zeros(s.load.size(), s.load.size());
    for (std::size_t i = 0; i < s.load.size(); ++i)
        for (std::size_t j = 0; j < s.load.size(); ++j) ls[i][j] = 0.25 * voc[i] * b[s.load[i]][s.load[j]] * voc[j];
    return ls;
}

/// q_i = -V_i * (sum_j B_LL(i,j) V_j + sum_k B_LG(i,k) V_G,k).
inline Vec reactive_demand(const stvs::GridModel& g, const Vec& vl, const Vec& vg) {
    const auto b = susceptance(g);
    const auto s = split(g);
    Vec q(s.load.size());
    for (std::size_t i = 0; i < s.load.size(); ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < s.load.size(); ++j) acc += static_cast<long double>(b[s.load[i]][s.load[j]]) * vl[j];
        for (std::size_t k = 0; k < s.gen.size(); ++k) acc += static_cast<long double>(b[s.load[i]][s.gen[k]]) * vg[k];
        q[i] = static_cast<double>(-vl[i] * acc);
    }
    return q;
}

/// Delta_t = L_s^{-1} q via the explicit inverse.
inline Vec delta(const stvs::GridModel& g, const Vec& vl, const Vec& vg) {
    return matvec(inverse(load_matrix(g, vg)), reactive_demand(g, vl, vg));
}

inline double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Q_i = -sum_j V_i V_j b_ij cos(theta_i - theta_j) over the full matrix.
inline double reactive_injection(const stvs::GridModel& g, const Vec& vm, const Vec& va, std::size_t i) {
    const auto b = susceptance(g);
    long double s = 0.0L;
    for (std::size_t j = 0; j < vm.size(); ++j) s += vm[i] * vm[j] * b[i][j] * std::cos(va[i] - va[j]);
    return static_cast<double>(-s);
}

/// Valid cross-correlation of one sample, NCHW with N = 1.
inline Vec conv2d(const Vec& x, int in_c, int h, int w, const Vec& wt, const Vec& bias, int out_c, int k, int pad) {
    const int oh = h + 2 * pad - k + 1, ow = w + 2 * pad - k + 1;
    Vec y(static_cast<std::size_t>(out_c * oh * ow), 0.0);
    for (int o = 0; o < out_c; ++o)
        for (int r = 0; r < oh; ++r)
            for (int c = 0; c < ow; ++c) {
                long double s = bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < in_c; ++i)
                    for (int a = 0; a < k; ++a)
                        for (int b = 0; b < k; ++b) {
                            const int rr = r + a - pad, cc = c + b - pad;
                            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                            s += static_cast<long double>(wt[static_cast<std::size_t>(((o * in_c + i) * k + a) * k + b)]) *
                                 x[static_cast<std::size_t>((i * h + rr) * w + cc)];
                        }
                y[static_cast<std::size_t>((o * oh + r) * ow + c)] = static_cast<double>(s);
            }
    return y;
}

inline Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

inline double rel_diff(const Eigen::MatrixXd& a, const Mat& b) {
    double d = 0.0, m = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double ref = b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            d = std::max(d, std::abs(a(i, j) - ref));
            m = std::max(m, std::abs(ref));
        }
    return d / std::max(m, 1e-300);
}

inline double rel_diff(const Eigen::VectorXd& a, const Vec& b) {
    double d = 0.0, m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[static_cast<std::size_t>(i)]));
        m = std::max(m, std::abs(b[static_cast<std::size_t>(i)]));
    }
    return d / std::max(m, 1e-300);
}

/// Reference power-flow solution of the 39-bus base case: bus, |V| (p.u.)
/// and angle (degrees), as distributed with the standard test-case data.
struct ReferenceBus {
    int bus;
    double vm;
    double va_deg;
};

inline std::vector<ReferenceBus> ne39_reference(const std::filesystem::path& csv) {
    std::ifstream is(csv);
    if (!is) throw std::runtime_error("cannot open " + csv.string());
    std::string line;
    std::getline(is, line);
    std::vector<ReferenceBus> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        out.push_back({std::stoi(a), std::stod(b), std::stod(c)});
    }
    return out;
}

}  // namespace oracle
