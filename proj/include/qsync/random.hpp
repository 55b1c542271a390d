#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qsync {

/// mt19937_64 with explicit real-valued mappings, so draws are identical on
/// every standard library (the std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * canonical(); }
    double log_uniform(double a, double b) { return a * std::exp(std::log(b / a) * canonical()); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace qsync
