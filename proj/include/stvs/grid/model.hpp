#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stvs/core/error.hpp"

namespace stvs {

enum class BusKind { generator, load };
enum class BranchStatus { connected, disconnected };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::load;
    /// Voltage setpoint for generator buses, nominal magnitude otherwise (p.u.).
    double v_base = 1.0;
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    /// Total line charging susceptance; network solves only, never in B.
    double charging = 0.0;
    /// Off-nominal turns ratio on the `from` side; 1 = none.
    double tap = 1.0;
    BranchStatus status = BranchStatus::connected;

    bool connected() const noexcept { return status == BranchStatus::connected; }
    bool joins(int a, int b) const noexcept {
        return (from == a && to == b) || (from == b && to == a);
    }
};

struct Generator {
    int bus = 0;
    double p_mech = 0.0;    ///< scheduled active power at load_scale 1 (p.u.)
    double inertia = 0.0;   ///< H (s)
    double damping = 0.0;   ///< D (p.u. power per p.u. speed)
    double xd_prime = 0.0;  ///< transient reactance (p.u.)
};

struct Load {
    int bus = 0;
    double p = 0.0;
    double q = 0.0;
    double motor_fraction = 0.0;
    std::string motor = "default";
};

/// Third-order induction motor constants, per unit on the motor's own base.
struct MotorParams {
    double rs = 0.01;
    double xs = 0.10;
    double xm = 3.0;
    double rr = 0.018;
    double xr = 0.18;
    double inertia = 0.5;
    double torque_exponent = 2.0;
    /// Motor loading (p.u. of rating) at load_scale 1; sets the motor MVA base.
    double rated_loading = 0.8;

    double x_open() const noexcept { return xs + xm; }
    double x_transient() const noexcept { return xs + xm * xr / (xm + xr); }
    /// Rotor open-circuit time constant (s) at system frequency `omega_s`.
    double t_open(double omega_s) const noexcept { return (xr + xm) / (omega_s * rr); }
};

using LineId = std::pair<int, int>;

inline LineId normalize_line(LineId l) noexcept {
    return l.first <= l.second ? l : LineId{l.second, l.first};
}

inline std::string line_name(LineId l) {
    l = normalize_line(l);
    return std::to_string(l.first) + "-" + std::to_string(l.second);
}

/// Immutable, validated power network. Buses are kept in ascending id order.
class GridModel {
  public:
    GridModel(std::string name, double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
              std::vector<Generator> generators, std::vector<Load> loads,
              std::map<std::string, MotorParams> motor_sets = {})
        : name_(std::move(name)), base_mva_(base_mva), buses_(std::move(buses)),
          branches_(std::move(branches)), generators_(std::move(generators)), loads_(std::move(loads)),
          motor_sets_(std::move(motor_sets)) {
        if (!motor_sets_.contains("default")) motor_sets_.emplace("default", MotorParams{});
        std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
        validate();
    }

    const std::string& name() const noexcept { return name_; }
    double base_mva() const noexcept { return base_mva_; }
    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }
    const std::vector<Generator>& generators() const noexcept { return generators_; }
    const std::vector<Load>& loads() const noexcept { return loads_; }
    const std::map<std::string, MotorParams>& motor_sets() const noexcept { return motor_sets_; }

    std::size_t bus_count() const noexcept { return buses_.size(); }

    /// Position of bus `id` in ascending-id order.
    std::size_t bus_index(int id) const {
        auto it = std::lower_bound(buses_.begin(), buses_.end(), id,
                                   [](const Bus& b, int v) { return b.id < v; });
        if (it == buses_.end() || it->id != id) throw ArgumentError("unknown bus " + std::to_string(id));
        return static_cast<std::size_t>(it - buses_.begin());
    }

    bool has_bus(int id) const noexcept {
        return std::binary_search(buses_.begin(), buses_.end(), Bus{id},
                                  [](const Bus& a, const Bus& b) { return a.id < b.id; });
    }

    const Bus& bus(int id) const { return buses_[bus_index(id)]; }

    const MotorParams& motor(const std::string& set) const {
        auto it = motor_sets_.find(set);
        if (it == motor_sets_.end()) throw ValidationError("unknown motor parameter set '" + set + "'");
        return it->second;
    }

    /// Slack: the highest-numbered generator bus.
    int slack_bus() const {
        int best = -1;
        for (const auto& g : generators_) best = std::max(best, g.bus);
        return best;
    }

    std::vector<int> generator_buses() const { return ids_of(BusKind::generator); }
    std::vector<int> load_buses() const { return ids_of(BusKind::load); }

    /// Lines currently out of service, normalized and sorted.
    std::vector<LineId> disconnected_lines() const {
        std::vector<LineId> out;
        for (const auto& br : branches_)
            if (!br.connected()) out.push_back(normalize_line({br.from, br.to}));
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Identity of the topology: grid name plus the set of open lines.
    std::string topology_id() const {
        std::string id = name_;
        const auto off = disconnected_lines();
        if (!off.empty()) {
            id += "~";
            for (std::size_t i = 0; i < off.size(); ++i) id += (i ? "," : "") + line_name(off[i]);
        }
        return id;
    }

    /// Is the connected-branch subgraph a single component spanning all buses?
    bool is_connected() const {
        const std::size_t n = buses_.size();
        if (n == 0) return false;
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        std::size_t components = n;
        for (const auto& br : branches_) {
            if (!br.connected()) continue;
            auto a = find(bus_index(br.from)), b = find(bus_index(br.to));
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
        return components == 1;
    }

  private:
    std::vector<int> ids_of(BusKind kind) const {
        std::vector<int> out;
        for (const auto& b : buses_)
            if (b.kind == kind) out.push_back(b.id);
        return out;
    }

    void validate() const {
        if (!(base_mva_ > 0.0)) throw ValidationError("base_mva must be positive");
        if (buses_.empty()) throw ValidationError("grid has no buses");
        for (std::size_t i = 1; i < buses_.size(); ++i)
            if (buses_[i].id == buses_[i - 1].id)
                throw ValidationError("bus ids must be unique: duplicate bus " + std::to_string(buses_[i].id));
        for (const auto& b : buses_)
            if (!(b.v_base > 0.0)) throw ValidationError("bus " + std::to_string(b.id) + " v_base must be positive");

        for (const auto& br : branches_) {
            const std::string name = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
            if (!has_bus(br.from) || !has_bus(br.to))
                throw ValidationError(name + " references a missing bus");
            if (br.from == br.to) throw ValidationError(name + " is a self loop");
            if (!(br.x > 0.0)) throw ValidationError(name + ": reactance must be strictly positive");
            if (br.r < 0.0) throw ValidationError(name + ": resistance must be non-negative");
            if (!(br.tap > 0.0)) throw ValidationError(name + ": tap ratio must be positive");
        }
        for (std::size_t i = 0; i < branches_.size(); ++i)
            for (std::size_t j = i + 1; j < branches_.size(); ++j)
                if (branches_[i].joins(branches_[j].from, branches_[j].to))
                    throw ValidationError("parallel lines are not supported: " +
                                          line_name({branches_[i].from, branches_[i].to}));

        std::vector<int> gen_seen;
        for (const auto& g : generators_) {
            const std::string name = "generator at bus " + std::to_string(g.bus);
            if (!has_bus(g.bus)) throw ValidationError(name + " references a missing bus");
            if (bus(g.bus).kind != BusKind::generator)
                throw ValidationError(name + ": bus kind must be 'generator'");
            if (std::find(gen_seen.begin(), gen_seen.end(), g.bus) != gen_seen.end())
                throw ValidationError(name + ": one generator per bus");
            gen_seen.push_back(g.bus);
            if (!(g.inertia > 0.0)) throw ValidationError(name + ": inertia constant must be strictly positive");
            if (!(g.xd_prime > 0.0)) throw ValidationError(name + ": transient reactance must be strictly positive");
            if (g.damping < 0.0) throw ValidationError(name + ": damping must be non-negative");
        }
        for (const auto& b : buses_)
            if (b.kind == BusKind::generator &&
                std::find(gen_seen.begin(), gen_seen.end(), b.id) == gen_seen.end())
                throw ValidationError("generator bus " + std::to_string(b.id) + " has no generator record");
        if (gen_seen.empty()) throw ValidationError("grid needs at least one generator");

        for (const auto& l : loads_) {
            const std::string name = "load at bus " + std::to_string(l.bus);
            if (!has_bus(l.bus)) throw ValidationError(name + " references a missing bus");
            if (!(l.motor_fraction >= 0.0 && l.motor_fraction <= 1.0))
                throw ValidationError(name + ": motor fraction must lie in [0,1]");
            if (bus(l.bus).kind == BusKind::generator)
                throw ValidationError(name + ": a bus cannot host both a generator and a load");
            if (l.p < 0.0) throw ValidationError(name + ": active demand must be non-negative");
            if (l.motor_fraction > 0.0) (void)motor(l.motor);
        }
        for (const auto& [key, m] : motor_sets_) {
            for (double v : {m.rs, m.xs, m.xm, m.rr, m.xr, m.inertia, m.torque_exponent, m.rated_loading})
                if (!(v > 0.0)) throw ValidationError("motor parameter set '" + key + "': all parameters must be positive");
        }

        if (!is_connected()) throw ValidationError("grid islanded: connected branches do not span all buses");
    }

    std::string name_;
    double base_mva_;
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<Generator> generators_;
    std::vector<Load> loads_;
    std::map<std::string, MotorParams> motor_sets_;
};

/// Returns a copy of `grid` with the named lines out of service.
inline GridModel disconnect_lines(const GridModel& grid, const std::vector<LineId>& lines) {
    auto branches = grid.branches();
    for (const auto& line : lines) {
        auto it = std::find_if(branches.begin(), branches.end(),
                               [&](const Branch& b) { return b.joins(line.first, line.second); });
        if (it == branches.end()) throw ArgumentError("unknown line " + line_name(line));
        if (!it->connected()) throw ArgumentError("line " + line_name(line) + " is already disconnected");
        it->status = BranchStatus::disconnected;
    }
    try {
        return GridModel(grid.name(), grid.base_mva(), grid.buses(), std::move(branches), grid.generators(),
                         grid.loads(), grid.motor_sets());
    } catch (const ValidationError& e) {
        if (std::string_view(e.what()).starts_with("grid islanded")) throw ValidationError("grid islanded");
        throw;
    }
}

/// Parses "2-3" or "2-3,5-8" into line ids.
inline std::vector<LineId> parse_lines(const std::string& text) {
    std::vector<LineId> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        const auto dash = tok.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 == tok.size())
            throw ArgumentError("bad line '" + tok + "', expected FROM-TO");
        try {
            std::size_t used = 0;
            const int a = std::stoi(tok.substr(0, dash), &used);
            if (used != dash) throw std::invalid_argument(tok);
            const std::string rest = tok.substr(dash + 1);
            const int b = std::stoi(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(tok);
            out.emplace_back(a, b);
        } catch (const std::logic_error&) {
            throw ArgumentError("bad line '" + tok + "', expected FROM-TO");
        }
        pos = comma + 1;
    }
    return out;
}

}  // namespace stvs
