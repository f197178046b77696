#pragma once

#include <cstdint>
#include <random>

namespace skewer {

// Deterministic random stream. All distribution transforms are implemented
// here rather than with std:: distributions so that a given seed produces
// the same draw sequence on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be >= 1.
    int uniform_int(int n) {
        const auto wide = static_cast<unsigned __int128>(next_u64());
        return static_cast<int>((wide * static_cast<unsigned __int128>(n)) >> 64);
    }

    // Standard normal via Box-Muller; the paired value is cached.
    double normal();

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

// Stateless seed mixer (splitmix64 finalizer). Used to derive independent
// stream seeds from a base seed plus an index, so that run results do not
// depend on execution order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace skewer
