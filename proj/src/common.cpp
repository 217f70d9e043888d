#include "mica/common.hpp"

namespace mica {

namespace {

double pairwise_sum_rec(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_rec(x, half) + pairwise_sum_rec(x + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_rec(values.data(), values.size());
}

}  // namespace mica
