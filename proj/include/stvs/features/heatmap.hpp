#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <string>

#include <Eigen/Dense>

#include "stvs/core/error.hpp"
#include "stvs/core/io.hpp"

namespace stvs {

/// One CSV row per matrix row, no header.
inline void write_heatmap_csv(const std::filesystem::path& path, const Eigen::MatrixXd& a) {
    io::atomic_write(path, [&](std::ostream& os) {
        os << std::setprecision(10);
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            for (Eigen::Index c = 0; c < a.cols(); ++c) os << (c ? "," : "") << a(r, c);
            os << '\n';
        }
    });
}

/// Maps the matrix min..max onto gray levels 0..255. A constant matrix maps
/// to mid-gray.
inline std::vector<std::uint8_t> heatmap_levels(const Eigen::MatrixXd& a) {
    if (a.size() == 0) throw ArgumentError("cannot render an empty matrix");
    if (!a.allFinite()) throw ArgumentError("cannot render a matrix with non-finite entries");
    const double lo = a.minCoeff(), hi = a.maxCoeff();
    std::vector<std::uint8_t> px(static_cast<std::size_t>(a.size()));
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const double u = hi > lo ? (a(r, c) - lo) / (hi - lo) : 0.5;
            px[i++] = static_cast<std::uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L));
        }
    return px;
}

/// Binary PGM (P5): width = columns (time), height = rows (loads).
inline void write_heatmap_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& a) {
    const auto px = heatmap_levels(a);
    io::atomic_write(
        path,
        [&](std::ostream& os) {
            os << "P5\n" << a.cols() << ' ' << a.rows() << "\n255\n";
            os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
        },
        true);
}

}  // namespace stvs
