#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace swgame {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: every draw is a pure
// function of (key, counter), so parallel splits reproduce serial output.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

// Maps two 32-bit words to a double strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Random numbers addressed by (path, index) under a fixed (seed, stream).
// Counter layout: {index lo, index hi, path, stream}; key = seed.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    [[nodiscard]] Philox4x32::Counter block(std::uint64_t path, std::uint64_t index) const {
        return Philox4x32::apply({static_cast<std::uint32_t>(index),
                                  static_cast<std::uint32_t>(index >> 32),
                                  static_cast<std::uint32_t>(path), stream_},
                                 key_);
    }

    // Two uniforms in (0,1).
    [[nodiscard]] std::pair<double, double> uniforms(std::uint64_t path, std::uint64_t index) const {
        const auto b = block(path, index);
        return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
    }

    [[nodiscard]] double uniform(std::uint64_t path, std::uint64_t n) const {
        const auto u = uniforms(path, n / 2);
        return (n % 2 == 0) ? u.first : u.second;
    }

    // Two independent standard normals via Box–Muller.
    [[nodiscard]] std::pair<double, double> normals(std::uint64_t path, std::uint64_t index) const {
        const auto [u1, u2] = uniforms(path, index);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    [[nodiscard]] double normal(std::uint64_t path, std::uint64_t n) const {
        const auto z = normals(path, n / 2);
        return (n % 2 == 0) ? z.first : z.second;
    }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
};

}  // namespace swgame
