#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace erlab {

// Neumaier-compensated accumulator. Enumeration identities are asserted at
// 1e-12 absolute, so plain left-to-right summation is not good enough.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// log(sum_i exp(xs[i])) with max subtraction.
double log_sum_exp(std::span<const double> xs);

bool all_finite(std::span<const double> xs);

double l2_norm(std::span<const double> xs);

// Population mean and standard deviation (divisor n, not n-1).
struct MeanStd {
    double mean;
    double std_dev;
};
MeanStd population_mean_std(std::span<const double> xs);

// ||a - b|| / max(1, ||a||); the agreement measure used by the
// finite-difference gradient checks.
double relative_vector_error(std::span<const double> reference,
                             std::span<const double> candidate);

} // namespace erlab
