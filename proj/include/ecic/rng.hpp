#pragma once

#include <cstdint>
#include <random>

namespace ecic {

namespace detail {

// splitmix64 finalizer; full-period mixing of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

/// Deterministic child seed for stream `stream` of a master seed.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(detail::mix64(seed + 0x9E3779B97F4A7C15ULL) ^
                         (stream + 0x632BE59BD9B4E019ULL) * 0xD1B54A32D192ED03ULL);
}

/// Seeded generator with platform-independent output. Uniform draws are
/// strictly inside (0,1) so inverse-transform sampling never hits a boundary.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng child(std::uint64_t seed, std::uint64_t stream) {
        return Rng(child_seed(seed, stream));
    }

    std::uint64_t bits() { return engine_(); }

    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform index in [0, n) via 128-bit multiply-shift.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ecic
