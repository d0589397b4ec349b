#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stvs/core/error.hpp"

namespace stvs::nn {

/// Dense NCHW tensor. H indexes loads, W indexes time steps.
template <typename T>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

    void resize(int n_, int c_, int h_, int w_) {
        if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw ArgumentError("negative tensor dimension");
        n = n_;
        c = c_;
        h = h_;
        w = w_;
        v.assign(static_cast<std::size_t>(n) * c * h * w, T(0));
    }

    std::size_t size() const noexcept { return v.size(); }
    std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
    std::size_t per_sample() const noexcept { return static_cast<std::size_t>(c) * h * w; }

    T* sample(int i) noexcept { return v.data() + static_cast<std::size_t>(i) * per_sample(); }
    const T* sample(int i) const noexcept { return v.data() + static_cast<std::size_t>(i) * per_sample(); }

    T& at(int i, int ch, int y, int x) noexcept {
        return v[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
    }
    T at(int i, int ch, int y, int x) const noexcept {
        return v[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
    }

    bool same_shape(const Tensor& o) const noexcept { return n == o.n && c == o.c && h == o.h && w == o.w; }

    std::string shape_string() const {
        return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

}  // namespace stvs::nn
