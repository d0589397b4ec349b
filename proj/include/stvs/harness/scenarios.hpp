#pragma once

#include <string>
#include <vector>

#include "stvs/core/error.hpp"
#include "stvs/grid/model.hpp"

namespace stvs {

/// A target topology: the base grid with some lines out of service.
struct TopologyScenario {
    std::string name;       ///< G1..G12
    char group = 'A';       ///< A: single outage, B: double outage
    std::vector<LineId> lines;
};

/// The twelve line-outage topologies of the transfer study on the 39-bus
/// system.
inline const std::vector<TopologyScenario>& topology_scenarios() {
    static const std::vector<TopologyScenario> s{
        {"G1", 'A', {{2, 3}}},
        {"G2", 'A', {{5, 8}}},
        {"G3", 'A', {{14, 15}}},
        {"G4", 'A', {{4, 14}}},
        {"G5", 'A', {{16, 24}}},
        {"G6", 'A', {{17, 18}}},
        {"G7", 'B', {{2, 3}, {5, 8}}},
        {"G8", 'B', {{4, 14}, {14, 15}}},
        {"G9", 'B', {{16, 24}, {17, 18}}},
        {"G10", 'B', {{14, 15}, {16, 24}}},
        {"G11", 'B', {{4, 14}, {17, 18}}},
        {"G12", 'B', {{14, 15}, {17, 18}}},
    };
    return s;
}

inline const TopologyScenario& topology_scenario(const std::string& name) {
    for (const auto& s : topology_scenarios())
        if (s.name == name) return s;
    throw ArgumentError("unknown topology scenario '" + name + "'");
}

}  // namespace stvs
