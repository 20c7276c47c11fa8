#pragma once

#include <cstdint>

namespace orientkit {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream: output n is mix64(key + n * golden).
///
/// The algorithm is pinned (nothing here depends on <random> distributions,
/// whose output is implementation-defined), so a (seed, stream) pair yields the
/// same numbers on every platform. `substream` derives independent keys for
/// per-asset or per-sample generation.
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    [[nodiscard]] CounterRng substream(std::uint64_t id) const noexcept {
        CounterRng r(0);
        r.key_ = mix64(key_ ^ mix64(id + kGolden));
        return r;
    }

    std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) (n >= 1); multiply-shift reduction.
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (one output per two uniforms).
    double normal() noexcept;

    /// von Mises draw in radians about `mu_rad` (Best-Fisher rejection).
    /// kappa = 0 gives a uniform angle; kappa = +inf returns mu exactly.
    double von_mises(double mu_rad, double kappa);

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace orientkit
