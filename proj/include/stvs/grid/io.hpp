#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stvs/core/io.hpp"
#include "stvs/grid/model.hpp"
#include "stvs/grid/ne39_data.hpp"

namespace stvs {

namespace detail {

inline std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class FieldReader {
  public:
    FieldReader(const nlohmann::json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ParseError(where_, "expected an object");
    }

    double number(const char* key) const {
        const auto& v = require(key);
        if (!v.is_number()) throw ParseError(where_ + "." + key, "expected a number");
        return v.get<double>();
    }

    double number_or(const char* key, double fallback) const {
        return obj_.contains(key) ? number(key) : fallback;
    }

    int integer(const char* key) const {
        const auto& v = require(key);
        if (!v.is_number_integer()) throw ParseError(where_ + "." + key, "expected an integer");
        return v.get<int>();
    }

    std::string string(const char* key) const {
        const auto& v = require(key);
        if (!v.is_string()) throw ParseError(where_ + "." + key, "expected a string");
        return v.get<std::string>();
    }

    std::string string_or(const char* key, std::string fallback) const {
        return obj_.contains(key) ? string(key) : fallback;
    }

  private:
    const nlohmann::json& require(const char* key) const {
        auto it = obj_.find(key);
        if (it == obj_.end()) throw ParseError(where_ + "." + key, "missing field");
        return *it;
    }

    const nlohmann::json& obj_;
    std::string where_;
};

inline const nlohmann::json& array_field(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(key, "missing top-level key");
    if (!it->is_array()) throw ParseError(key, "expected an array");
    return *it;
}

}  // namespace detail

/// Parses and validates a grid description document (JSON text).
inline GridModel load_grid(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!doc.is_object()) throw ParseError("line 1, column 1", "grid document must be a JSON object");

    if (!doc.contains("base_mva")) throw ParseError("base_mva", "missing top-level key");
    if (!doc["base_mva"].is_number()) throw ParseError("base_mva", "expected a number");
    const double base_mva = doc["base_mva"].get<double>();
    std::string name = "grid";
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ParseError("name", "expected a string");
        name = doc["name"].get<std::string>();
    }

    std::vector<Bus> buses;
    const auto& jb = detail::array_field(doc, "buses");
    for (std::size_t i = 0; i < jb.size(); ++i) {
        const std::string where = "buses[" + std::to_string(i) + "]";
        detail::FieldReader f(jb[i], where);
        Bus b;
        b.id = f.integer("id");
        const auto kind = f.string("kind");
        if (kind == "generator") b.kind = BusKind::generator;
        else if (kind == "load") b.kind = BusKind::load;
        else throw ParseError(where + ".kind", "expected 'generator' or 'load', got '" + kind + "'");
        b.v_base = f.number_or("v_base", 1.0);
        buses.push_back(b);
    }

    std::vector<Branch> branches;
    const auto& jbr = detail::array_field(doc, "branches");
    for (std::size_t i = 0; i < jbr.size(); ++i) {
        const std::string where = "branches[" + std::to_string(i) + "]";
        detail::FieldReader f(jbr[i], where);
        Branch br;
        br.from = f.integer("from");
        br.to = f.integer("to");
        br.x = f.number("x");
        br.r = f.number_or("r", 0.0);
        br.charging = f.number_or("charging", 0.0);
        br.tap = f.number_or("tap", 1.0);
        const auto status = f.string_or("status", "connected");
        if (status == "connected") br.status = BranchStatus::connected;
        else if (status == "disconnected") br.status = BranchStatus::disconnected;
        else throw ParseError(where + ".status", "expected 'connected' or 'disconnected'");
        branches.push_back(br);
    }

    std::vector<Generator> gens;
    const auto& jg = detail::array_field(doc, "generators");
    for (std::size_t i = 0; i < jg.size(); ++i) {
        detail::FieldReader f(jg[i], "generators[" + std::to_string(i) + "]");
        gens.push_back({f.integer("bus"), f.number("p_mech"), f.number("inertia"), f.number_or("damping", 0.0),
                        f.number("xd_prime")});
    }

    std::vector<Load> loads;
    const auto& jl = detail::array_field(doc, "loads");
    for (std::size_t i = 0; i < jl.size(); ++i) {
        detail::FieldReader f(jl[i], "loads[" + std::to_string(i) + "]");
        loads.push_back({f.integer("bus"), f.number("p"), f.number("q"), f.number_or("motor_fraction", 0.5),
                         f.string_or("motor", "default")});
    }

    std::map<std::string, MotorParams> motors;
    if (doc.contains("motor_params")) {
        const auto& jm = doc["motor_params"];
        if (!jm.is_object()) throw ParseError("motor_params", "expected an object");
        for (auto it = jm.begin(); it != jm.end(); ++it) {
            detail::FieldReader f(it.value(), "motor_params." + it.key());
            MotorParams d;
            MotorParams m{f.number_or("rs", d.rs), f.number_or("xs", d.xs), f.number_or("xm", d.xm),
                          f.number_or("rr", d.rr), f.number_or("xr", d.xr), f.number_or("inertia", d.inertia),
                          f.number_or("torque_exponent", d.torque_exponent),
                          f.number_or("rated_loading", d.rated_loading)};
            motors.emplace(it.key(), m);
        }
    }

    return GridModel(std::move(name), base_mva, std::move(buses), std::move(branches), std::move(gens),
                     std::move(loads), std::move(motors));
}

inline nlohmann::json to_json(const GridModel& g) {
    nlohmann::json doc;
    doc["name"] = g.name();
    doc["base_mva"] = g.base_mva();
    auto& buses = doc["buses"] = nlohmann::json::array();
    for (const auto& b : g.buses())
        buses.push_back({{"id", b.id}, {"kind", b.kind == BusKind::generator ? "generator" : "load"},
                         {"v_base", b.v_base}});
    auto& branches = doc["branches"] = nlohmann::json::array();
    for (const auto& br : g.branches()) {
        nlohmann::json j = {{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}};
        if (br.charging != 0.0) j["charging"] = br.charging;
        if (br.tap != 1.0) j["tap"] = br.tap;
        if (!br.connected()) j["status"] = "disconnected";
        branches.push_back(std::move(j));
    }
    auto& gens = doc["generators"] = nlohmann::json::array();
    for (const auto& gen : g.generators())
        gens.push_back({{"bus", gen.bus}, {"p_mech", gen.p_mech}, {"inertia", gen.inertia},
                        {"damping", gen.damping}, {"xd_prime", gen.xd_prime}});
    auto& loads = doc["loads"] = nlohmann::json::array();
    for (const auto& l : g.loads())
        loads.push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}, {"motor_fraction", l.motor_fraction},
                         {"motor", l.motor}});
    auto& motors = doc["motor_params"] = nlohmann::json::object();
    for (const auto& [key, m] : g.motor_sets())
        motors[key] = {{"rs", m.rs}, {"xs", m.xs}, {"xm", m.xm}, {"rr", m.rr}, {"xr", m.xr},
                       {"inertia", m.inertia}, {"torque_exponent", m.torque_exponent},
                       {"rated_loading", m.rated_loading}};
    return doc;
}

/// The New England 39-bus system shipped with the library.
inline GridModel ne39() { return load_grid(grid::kNe39Json); }

/// Resolves "builtin:ne39" or a filesystem path.
inline GridModel load_grid_source(const std::string& source) {
    if (source.starts_with("builtin:")) {
        const auto name = source.substr(8);
        if (name == "ne39") return ne39();
        throw ArgumentError("unknown builtin grid '" + name + "'");
    }
    return load_grid(io::read_text(source));
}

}  // namespace stvs
