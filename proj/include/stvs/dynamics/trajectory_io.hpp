#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/io.hpp"
#include "stvs/dynamics/simulate.hpp"

namespace stvs {

inline constexpr std::array<char, 8> kTrajectoryMagic{'S', 'T', 'V', 'S', 'T', 'R', 'J', '\0'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

/// Sidecar path for a trajectory binary: `run.trj` -> `run.trj.json`.
inline std::filesystem::path trajectory_sidecar(const std::filesystem::path& bin) {
    auto p = bin;
    p += ".json";
    return p;
}

inline nlohmann::json trajectory_meta_json(const VoltageTrajectory& tr) {
    const auto& m = tr.meta;
    return {{"format", "stvs-trajectory"},
            {"version", kTrajectoryVersion},
            {"dt", tr.dt},
            {"horizon", tr.horizon},
            {"samples", tr.samples()},
            {"bus_ids", tr.bus_ids},
            {"topology_id", m.topology_id},
            {"load_scale", m.load_scale},
            {"seed", m.seed},
            {"collapsed", m.collapsed},
            {"fault",
             {{"bus", m.fault.bus},
              {"t_on", m.fault.t_on},
              {"duration", m.fault.duration},
              {"admittance", m.fault.admittance}}}};
}

/// Columnar binary record: magic, u32 version, u32 bus count, u32 N (sample
/// count), f64 dt, then per bus N magnitudes followed by per bus N angles, all
/// little-endian f32. Metadata goes to a JSON sidecar next to it.
inline void write_trajectory(const std::filesystem::path& path, const VoltageTrajectory& tr) {
    io::atomic_write(
        path,
        [&](std::ostream& os) {
            os.write(kTrajectoryMagic.data(), kTrajectoryMagic.size());
            io::write_pod(os, kTrajectoryVersion);
            io::write_pod(os, static_cast<std::uint32_t>(tr.bus_count()));
            io::write_pod(os, static_cast<std::uint32_t>(tr.samples()));
            io::write_pod(os, tr.dt);
            for (const auto* m : {&tr.magnitude, &tr.angle})
                for (Eigen::Index b = 0; b < tr.bus_count(); ++b)
                    for (Eigen::Index k = 0; k < tr.samples(); ++k) io::write_pod(os, static_cast<float>((*m)(k, b)));
        },
        true);
    io::atomic_write_text(trajectory_sidecar(path), trajectory_meta_json(tr).dump(2) + "\n");
}

inline VoltageTrajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kTrajectoryMagic) throw IoError(path.string() + ": not a trajectory file");
    const auto version = io::read_pod<std::uint32_t>(is);
    if (version != kTrajectoryVersion)
        throw IoError(path.string() + ": unsupported trajectory version " + std::to_string(version));
    const auto buses = static_cast<Eigen::Index>(io::read_pod<std::uint32_t>(is));
    const auto n = static_cast<Eigen::Index>(io::read_pod<std::uint32_t>(is));
    VoltageTrajectory tr;
    tr.dt = io::read_pod<double>(is);
    tr.magnitude.resize(n, buses);
    tr.angle.resize(n, buses);
    for (auto* m : {&tr.magnitude, &tr.angle})
        for (Eigen::Index b = 0; b < buses; ++b)
            for (Eigen::Index k = 0; k < n; ++k) (*m)(k, b) = io::read_pod<float>(is);

    const auto side = trajectory_sidecar(path);
    if (!std::filesystem::exists(side)) throw IoError("missing sidecar " + side.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text(side));
        tr.horizon = j.at("horizon").get<double>();
        tr.bus_ids = j.at("bus_ids").get<std::vector<int>>();
        auto& m = tr.meta;
        m.topology_id = j.at("topology_id").get<std::string>();
        m.load_scale = j.at("load_scale").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.collapsed = j.at("collapsed").get<bool>();
        const auto& f = j.at("fault");
        m.fault.bus = f.at("bus").get<int>();
        m.fault.t_on = f.at("t_on").get<double>();
        m.fault.duration = f.at("duration").get<double>();
        m.fault.admittance = f.at("admittance").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(side.string(), e.what());
    }
    if (static_cast<Eigen::Index>(tr.bus_ids.size()) != buses)
        throw IoError(side.string() + ": bus_ids length does not match the binary record");
    return tr;
}

/// Debug export: one row per sample, `t` then `vm_<bus>` and `va_<bus>` columns.
inline void write_trajectory_csv(const std::filesystem::path& path, const VoltageTrajectory& tr) {
    io::atomic_write(path, [&](std::ostream& os) {
        os << "t";
        for (Eigen::Index b = 0; b < tr.bus_count(); ++b) {
            const auto id = b < static_cast<Eigen::Index>(tr.bus_ids.size()) ? tr.bus_ids[static_cast<std::size_t>(b)]
                                                                               : static_cast<int>(b + 1);
            os << ",vm_" << id << ",va_" << id;
        }
        os << '\n' << std::setprecision(9);
        for (Eigen::Index k = 0; k < tr.samples(); ++k) {
            os << tr.time(k);
            for (Eigen::Index b = 0; b < tr.bus_count(); ++b) os << ',' << tr.magnitude(k, b) << ',' << tr.angle(k, b);
            os << '\n';
        }
    });
}

}  // namespace stvs
