#pragma once

#include <cstdint>
#include <random>

namespace mica {

/// Seeded generator with fully pinned output streams. All distribution
/// transforms are implemented here (not via std::*_distribution, whose
/// output is implementation-defined) so that a seed identifies the stream
/// across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound) via rejection sampling (no modulo bias).
    std::uint64_t uniform_int(std::uint64_t bound);

    /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
    double normal();

    /// Exp(1) draw shifted by -1 so the innovation has mean zero.
    double exponential_centered();

    /// Student's t with 3 degrees of freedom: Z / sqrt(chi2_3 / 3).
    double student_t3();

private:
    std::mt19937_64 gen_;
};

}  // namespace mica
