#include "smcgen/stats.hpp"

#include <cmath>
#include <limits>

#include "smcgen/errors.hpp"

namespace smcgen {

double RunningMoments::standard_error() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

namespace {

// Lower regularized gamma by power series, for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int k = 0; k < 500; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz continued fraction, for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw InputError("regularized gamma: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw InputError("regularized gamma: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

ChiSquareResult chi_square_gof(std::span<const long long> observed,
                               std::span<const double> expected_probs) {
    if (observed.size() != expected_probs.size() || observed.empty())
        throw InputError("chi-square: mismatched cells");
    long long total = 0;
    for (long long o : observed) total += o;
    if (total < 1) throw InputError("chi-square: no observations");

    ChiSquareResult result;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expected = expected_probs[i] * static_cast<double>(total);
        if (expected <= 0.0) {
            if (observed[i] != 0)
                result.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        const double gap = static_cast<double>(observed[i]) - expected;
        result.statistic += gap * gap / expected;
        ++result.dof;
    }
    result.dof -= 1;
    if (result.dof < 1) throw InputError("chi-square: fewer than two live cells");
    result.p_value = std::isinf(result.statistic)
                         ? 0.0
                         : regularized_gamma_q(0.5 * result.dof, 0.5 * result.statistic);
    return result;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw InputError("fit_line: need at least two points");
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InputError("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    const double ss_res = syy - fit.slope * sxy;
    if (n > 2)
        fit.slope_stderr = std::sqrt(std::max(0.0, ss_res / static_cast<double>(n - 2)) / sxx);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InputError("total_variation: mismatched supports");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

} // namespace smcgen
