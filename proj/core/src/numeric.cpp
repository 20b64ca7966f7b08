#include "erlab/numeric.hpp"

#include <algorithm>
#include <limits>

namespace erlab {

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    CompensatedSum s;
    for (double x : xs) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

double l2_norm(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x * x);
    return std::sqrt(s.value());
}

MeanStd population_mean_std(std::span<const double> xs) {
    CompensatedSum total;
    for (double x : xs) total.add(x);
    const double mean = total.value() / static_cast<double>(xs.size());
    CompensatedSum sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    const double var = sq.value() / static_cast<double>(xs.size());
    return {mean, std::sqrt(std::max(0.0, var))};
}

double relative_vector_error(std::span<const double> reference,
                             std::span<const double> candidate) {
    CompensatedSum diff_sq;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - candidate[i];
        diff_sq.add(d * d);
    }
    const double denom = std::max(1.0, l2_norm(reference));
    return std::sqrt(diff_sq.value()) / denom;
}

} // namespace erlab
