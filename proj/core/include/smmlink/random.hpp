#pragma once

// Counter-based random streams.  Draw i of stream s under seed k is a pure
// function of (k, s, i), so ensembles give identical results regardless of
// how realizations are split across workers.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace smmlink {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class CounterStream {
public:
    constexpr CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL))) {}

    /// Derived stream, e.g. one per realization index.
    [[nodiscard]] constexpr CounterStream substream(std::uint64_t index) const noexcept {
        return CounterStream(key_, index, tag{});
    }

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return splitmix64(key_ ^ splitmix64(counter + 0xA0761D6478BD642FULL));
    }

    /// Uniform on the open interval (0, 1).
    [[nodiscard]] constexpr double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on counters 2c and 2c+1.
    [[nodiscard]] double normal(std::uint64_t counter) const noexcept {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Rayleigh with scale sigma by inversion.
    [[nodiscard]] double rayleigh(std::uint64_t counter, double sigma) const noexcept {
        return sigma * std::sqrt(-2.0 * std::log(uniform(counter)));
    }

private:
    struct tag {};
    constexpr CounterStream(std::uint64_t parent, std::uint64_t index, tag) noexcept
        : key_(splitmix64(parent + splitmix64(index ^ 0x8CB92BA72F3D8DD7ULL))) {}

    std::uint64_t key_;
};

}  // namespace smmlink
