// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, counter), so results do not depend on evaluation order or on how
// work is split across threads.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ammfee {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit constexpr Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    constexpr Block operator()(Block ctr) const {
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            ctr = roundOnce(ctr, key);
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }

    /// 128 random bits for (index, stream).
    constexpr Block bits(std::uint64_t index, std::uint64_t stream = 0) const {
        return (*this)({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)});
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static constexpr Block roundOnce(const Block& c, const std::array<std::uint32_t, 2>& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    std::array<std::uint32_t, 2> key_;
};

/// Standard normal draws addressed by (index, stream).
class NormalStream {
public:
    explicit constexpr NormalStream(std::uint64_t seed) : philox_(seed) {}

    /// Two independent N(0,1) variates for one counter (Box-Muller).
    std::array<double, 2> pair(std::uint64_t index, std::uint64_t stream = 0) const {
        const auto b = philox_.bits(index, stream);
        const double u1 = toUnitOpen((static_cast<std::uint64_t>(b[0]) << 32) | b[1]);
        const double u2 = toUnitOpen((static_cast<std::uint64_t>(b[2]) << 32) | b[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double operator()(std::uint64_t index, std::uint64_t stream = 0) const { return pair(index, stream)[0]; }

private:
    // 53 random bits mapped into (0, 1).
    static double toUnitOpen(std::uint64_t bits) {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    Philox4x32 philox_;
};

}  // namespace ammfee
