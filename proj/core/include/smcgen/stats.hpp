#pragma once

#include <span>
#include <vector>

namespace smcgen {

// Welford accumulator for mean and (unbiased) variance.
class RunningMoments {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }
    long long count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double standard_error() const;

private:
    long long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Regularized incomplete gamma functions (series / continued fraction).
double regularized_gamma_p(double a, double x); // lower
double regularized_gamma_q(double a, double x); // upper

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Pearson goodness of fit of observed counts against expected cell
// probabilities. Cells with zero expected probability must have zero counts.
ChiSquareResult chi_square_gof(std::span<const long long> observed,
                               std::span<const double> expected_probs);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// (1/2) sum |p_i - q_i| over matching supports.
double total_variation(std::span<const double> p, std::span<const double> q);

} // namespace smcgen
