#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "smcgen/errors.hpp"
#include "smcgen/model.hpp"

using namespace smcgen;

TEST_CASE("ou trajectory shape and determinism") {
    OuModelConfig config;
    config.step_size = 0.1;
    config.obs_noise = 0.1;
    const auto a = simulate_ou_trajectory(config, 500, 11);
    CHECK(a.states.size() == 501);
    CHECK(a.observations.size() == 501);
    const auto b = simulate_ou_trajectory(config, 500, 11);
    CHECK(a.states == b.states);
    CHECK(a.observations == b.observations);
    const auto c = simulate_ou_trajectory(config, 500, 12);
    CHECK(a.states != c.states);
}

TEST_CASE("full-length trajectory") {
    OuModelConfig config;
    const auto run = simulate_ou_trajectory(config, 40960, 1);
    CHECK(run.states.size() == 40961);
    CHECK(run.observations.size() == 40961);
}

TEST_CASE("ou trajectory rejects bad parameters") {
    OuModelConfig config;
    config.step_size = 0.0;
    CHECK_THROWS_AS(simulate_ou_trajectory(config, 10, 1), ConfigError);
    config.step_size = 0.1;
    config.obs_noise = -1.0;
    CHECK_THROWS_AS(simulate_ou_trajectory(config, 10, 1), ConfigError);
    config.obs_noise = 0.1;
    CHECK_THROWS_AS(simulate_ou_trajectory(config, 0, 1), ConfigError);
}

TEST_CASE("ou increments match the step law") {
    OuModelConfig config;
    config.step_size = 0.1;
    config.obs_noise = 0.1;
    const int horizon = 100000;
    const auto run = simulate_ou_trajectory(config, horizon, 2024);
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const double inc = run.states[static_cast<std::size_t>(t) + 1] -
                           (1.0 - config.step_size) * run.states[static_cast<std::size_t>(t)];
        sum += inc;
        sum_sq += inc * inc;
    }
    const double mean = sum / horizon;
    const double var = sum_sq / horizon - mean * mean;
    const double se = std::sqrt(config.step_size / horizon);
    CHECK(std::abs(mean) < 4.0 * se);
    CHECK(std::abs(var - config.step_size) < 0.05 * config.step_size);
}

TEST_CASE("unit step size gives independent standard normals") {
    OuModelConfig config;
    config.step_size = 1.0;
    config.obs_noise = 0.5;
    const int horizon = 100000;
    const auto run = simulate_ou_trajectory(config, horizon, 99);
    double sum = 0.0, sum_sq = 0.0, cross = 0.0;
    for (int t = 1; t <= horizon; ++t) {
        const double x = run.states[static_cast<std::size_t>(t)];
        sum += x;
        sum_sq += x * x;
        cross += x * run.states[static_cast<std::size_t>(t) - 1];
    }
    const double mean = sum / horizon;
    const double var = sum_sq / horizon - mean * mean;
    const double corr = (cross / horizon - mean * mean) / var;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(horizon)));
    CHECK(std::abs(var - 1.0) < 0.03);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(horizon)));
}

TEST_CASE("bootstrap potential is the emission density at the observation") {
    OuModelConfig config;
    config.step_size = 0.1;
    config.obs_noise = 0.1;
    config.observations = {0.4, -0.2, 0.7};
    const auto model = bootstrap_model(config);
    CHECK(model.horizon == 2);

    // Mode value (2 pi sigma^2)^{-1/2} at x' = y_t.
    const double mode = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * 0.01);
    CHECK(mode == doctest::Approx(3.98942).epsilon(1e-5));
    CHECK(model.potential(1, 0.0, -0.2) == doctest::Approx(mode));
    // One standard deviation off the mode.
    CHECK(model.potential(1, 0.0, -0.2 + 0.1) == doctest::Approx(mode * std::exp(-0.5)));
    // The potential never reads the parent state.
    CHECK(model.log_potential(2, -5.0, 0.7) == model.log_potential(2, 9.0, 0.7));
}

TEST_CASE("initial proposal density") {
    CHECK(standard_normal_density(0.0) == doctest::Approx(0.39894).epsilon(1e-4));
}

TEST_CASE("bootstrap model needs observations") {
    OuModelConfig config;
    config.step_size = 0.1;
    config.obs_noise = 0.1;
    config.observations = {0.4};
    CHECK_THROWS_AS(bootstrap_model(config), ConfigError);
}

TEST_CASE("neutral model has unit potential") {
    const auto model = neutral_model(5);
    CHECK(model.potential(0, 0.0, 3.0) == 1.0);
    CHECK(model.potential(3, -2.0, 1.0) == 1.0);
    CHECK_THROWS_AS(neutral_model(0), ConfigError);
}

TEST_CASE("observation csv roundtrip") {
    const std::string path = "test_observations.csv";
    const std::vector<double> obs = {0.125, -3.5, 2.25e-7, 1.0 / 3.0};
    observations_to_csv(obs, path);
    const auto back = observations_from_csv(path);
    CHECK(back == obs);
    std::remove(path.c_str());
    CHECK_THROWS_AS(observations_from_csv("does_not_exist.csv"), ConfigError);
}
