#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

namespace stvs {

/// Incremental FNV-1a (64-bit) over the little-endian bytes of what is fed.
class ContentHash {
  public:
    void bytes(const void* data, std::size_t n) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void value(T v) noexcept {
        static_assert(std::endian::native == std::endian::little);
        bytes(&v, sizeof v);
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void values(std::span<const T> v) noexcept {
        bytes(v.data(), v.size_bytes());
    }

    void text(std::string_view s) noexcept {
        value<std::uint64_t>(s.size());
        bytes(s.data(), s.size());
    }

    std::uint64_t digest() const noexcept { return h_; }

    std::string hex() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << h_;
        return os.str();
    }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace stvs
