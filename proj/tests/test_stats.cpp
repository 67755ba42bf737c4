#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "smcgen/errors.hpp"
#include "smcgen/stats.hpp"

using namespace smcgen;

TEST_CASE("running moments") {
    RunningMoments m;
    const std::vector<double> values = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    for (double v : values) m.add(v);
    CHECK(m.count() == 8);
    CHECK(m.mean() == doctest::Approx(5.0));
    CHECK(m.variance() == doctest::Approx(32.0 / 7.0)); // unbiased
}

TEST_CASE("regularized gamma against chi-square tables") {
    // P(chi2_k <= x) = P(k/2, x/2). Classic 95th/99th percentiles.
    CHECK(regularized_gamma_p(0.5, 3.841 / 2) == doctest::Approx(0.95).epsilon(2e-4));
    CHECK(regularized_gamma_p(5.0, 18.307 / 2) == doctest::Approx(0.95).epsilon(2e-4));
    CHECK(regularized_gamma_p(5.0, 23.209 / 2) == doctest::Approx(0.99).epsilon(2e-4));
    CHECK(regularized_gamma_p(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    // erf relation: P(1/2, x) = erf(sqrt(x)).
    for (double x : {0.1, 0.5, 1.0, 2.5})
        CHECK(regularized_gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))));
    CHECK(regularized_gamma_q(2.0, 0.0) == 1.0);
    for (double x : {0.3, 1.7, 9.0})
        CHECK(regularized_gamma_p(3.0, x) + regularized_gamma_q(3.0, x) ==
              doctest::Approx(1.0));
    CHECK_THROWS_AS(regularized_gamma_p(-1.0, 1.0), InputError);
}

TEST_CASE("chi-square goodness of fit") {
    SUBCASE("exact fit") {
        const std::vector<long long> observed = {25, 25, 25, 25};
        const std::vector<double> probs = {0.25, 0.25, 0.25, 0.25};
        const auto result = chi_square_gof(observed, probs);
        CHECK(result.statistic == doctest::Approx(0.0));
        CHECK(result.dof == 3);
        CHECK(result.p_value == doctest::Approx(1.0));
    }
    SUBCASE("gross mismatch") {
        const std::vector<long long> observed = {100, 0};
        const std::vector<double> probs = {0.5, 0.5};
        const auto result = chi_square_gof(observed, probs);
        CHECK(result.p_value < 1e-6);
    }
    SUBCASE("zero-probability cell with mass is an immediate reject") {
        const std::vector<long long> observed = {50, 50, 3};
        const std::vector<double> probs = {0.5, 0.5, 0.0};
        const auto result = chi_square_gof(observed, probs);
        CHECK(result.p_value == 0.0);
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(chi_square_gof(std::vector<long long>{1}, std::vector<double>{1.0}),
                        InputError);
    }
}

TEST_CASE("line fit") {
    SUBCASE("exact line") {
        const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
        const std::vector<double> y = {3.0, 5.0, 7.0, 9.0};
        const auto fit = fit_line(x, y);
        CHECK(fit.slope == doctest::Approx(2.0));
        CHECK(fit.intercept == doctest::Approx(1.0));
        CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fit.r_squared == doctest::Approx(1.0));
    }
    SUBCASE("noise widens the slope error") {
        const std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
        const std::vector<double> y = {2.9, 5.3, 6.8, 9.4, 10.6};
        const auto fit = fit_line(x, y);
        CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));
        CHECK(fit.slope_stderr > 0.0);
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), InputError);
        CHECK_THROWS_AS(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}),
                        InputError);
    }
}

TEST_CASE("total variation") {
    const std::vector<double> p = {0.5, 0.3, 0.2};
    const std::vector<double> q = {0.2, 0.3, 0.5};
    CHECK(total_variation(p, q) == doctest::Approx(0.3));
    CHECK(total_variation(p, p) == 0.0);
    CHECK_THROWS_AS(total_variation(p, std::vector<double>{0.5, 0.5}), InputError);
}
