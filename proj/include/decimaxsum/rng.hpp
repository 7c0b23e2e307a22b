#pragma once

#include <cstdint>

namespace dms {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a sequence of coordinates into one seed; order-sensitive.
template <typename... Ts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Ts... coords) {
    std::uint64_t s = mix64(base);
    ((s = mix64(s ^ static_cast<std::uint64_t>(coords))), ...);
    return s;
}

/// Counter-based stream: draw k of seed s is mix64(s + (k+1) * golden gamma),
/// i.e. exactly the SplitMix64 sequence seeded with s. Reproducible across
/// platforms since nothing depends on std:: distributions.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(seed_ + (counter_ - 1) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace dms
