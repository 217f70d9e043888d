#include "mica/rng.hpp"

#include <cmath>
#include <numbers>

namespace mica {

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
    if (bound < 2) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential_centered() {
    const double u = uniform();
    return -std::log1p(-u) - 1.0;
}

double Rng::student_t3() {
    const double z = normal();
    const double a = normal(), b = normal(), c = normal();
    double chi2 = a * a + b * b + c * c;
    if (chi2 <= 0.0) chi2 = 0x1.0p-53;
    return z / std::sqrt(chi2 / 3.0);
}

}  // namespace mica
