#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/io.hpp"
#include "stvs/nn/cnn.hpp"

namespace stvs::nn {

inline constexpr std::array<char, 8> kCheckpointMagic{'S', 'T', 'V', 'S', 'C', 'K', 'P', 'T'};
inline constexpr int kCheckpointVersion = 1;

/// Checkpoint layout: magic, u32 header length, JSON header, then for every
/// tensor in layer order a u32 rank, u32 dims and little-endian f32 values.
/// The header carries the version, architecture, input scaling, tensor
/// directory and whatever provenance the caller adds under "meta".
template <typename T>
void save_checkpoint(const std::filesystem::path& path, CnnClassifier<T>& model, const nlohmann::json& meta = {}) {
    nlohmann::json tensors = nlohmann::json::array();
    for (auto& p : model.state()) tensors.push_back({{"name", p.name}, {"dims", p.dims}});
    const nlohmann::json header{{"format", "stvs-checkpoint"},
                                {"version", kCheckpointVersion},
                                {"architecture", to_json(model.arch())},
                                {"input_shift", static_cast<double>(model.input_shift)},
                                {"input_scale", static_cast<double>(model.input_scale)},
                                {"tensors", tensors},
                                {"meta", meta.is_null() ? nlohmann::json::object() : meta}};
    const std::string text = header.dump();
    io::atomic_write(
        path,
        [&](std::ostream& os) {
            os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
            io::write_pod(os, static_cast<std::uint32_t>(text.size()));
            os.write(text.data(), static_cast<std::streamsize>(text.size()));
            for (auto& p : model.state()) {
                io::write_pod(os, static_cast<std::uint32_t>(p.dims.size()));
                for (int d : p.dims) io::write_pod(os, static_cast<std::uint32_t>(d));
                for (T v : *p.value) io::write_pod(os, static_cast<float>(v));
            }
        },
        true);
}

template <typename T = float>
struct LoadedCheckpoint {
    CnnClassifier<T> model;
    nlohmann::json header;
};

template <typename T = float>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kCheckpointMagic) throw IoError(path.string() + ": not a checkpoint file");
    const auto len = io::read_pod<std::uint32_t>(is);
    std::string text(len, '\0');
    is.read(text.data(), len);
    if (!is) throw IoError(path.string() + ": truncated checkpoint header");

    LoadedCheckpoint<T> out;
    try {
        out.header = nlohmann::json::parse(text);
        const int version = out.header.at("version").template get<int>();
        if (version != kCheckpointVersion)
            throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
        out.model = CnnClassifier<T>(architecture_from_json(out.header.at("architecture")), 0);
        out.model.input_shift = static_cast<T>(out.header.at("input_shift").template get<double>());
        out.model.input_scale = static_cast<T>(out.header.at("input_scale").template get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + " header", e.what());
    }
    for (auto& p : out.model.state()) {
        const auto rank = io::read_pod<std::uint32_t>(is);
        if (rank != p.dims.size()) throw IoError(path.string() + ": rank mismatch for " + p.name);
        for (int d : p.dims)
            if (io::read_pod<std::uint32_t>(is) != static_cast<std::uint32_t>(d))
                throw IoError(path.string() + ": shape mismatch for " + p.name);
        for (auto& v : *p.value) v = static_cast<T>(io::read_pod<float>(is));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after weights");
    return out;
}

}  // namespace stvs::nn
