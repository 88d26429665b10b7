#pragma once

#include <cstdint>
#include <random>

namespace bpb {

// Deterministic random source. Uniform doubles use the canonical 53-bit
// mapping instead of std::uniform_real_distribution, whose output differs
// between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Inclusive bounds. Modulo bias is irrelevant at the ranges used here;
    // determinism is what matters.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform dyadic k/2^16: keeps rational-mode denominators small.
    double dyadic16() {
        return static_cast<double>(eng_() >> 48) * 0x1.0p-16;
    }

    // Stable per-instance substream.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace bpb
