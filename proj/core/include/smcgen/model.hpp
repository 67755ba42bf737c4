#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smcgen/rng.hpp"

namespace smcgen {

// State-space model bundle consumed by the engine. States are scalar; the
// genealogy never looks at them, and the shipped benchmark is scalar too.
//
// The potential is held in log form because Gaussian emission densities
// underflow long before the weights stop mattering; potential() exposes the
// plain nonnegative value. The generation index is passed through so
// observation-dependent potentials work; at generation 0 the previous-state
// argument equals the current state and must be ignored.
struct ModelSpec {
    std::function<double(Rng&)> initial_sampler;
    std::function<double(int generation, double state, Rng&)> transition_sampler;
    std::function<double(int generation, double parent_state, double state)> log_potential;
    int horizon = 0;
    std::string id;

    double potential(int generation, double parent_state, double state) const;

    void validate() const; // throws ConfigError
};

// Discretized Ornstein-Uhlenbeck benchmark:
//   X_0 ~ N(0,1),  X_{t+1} = (1 - step) X_t + sqrt(step) xi_t,
//   Y_t | X_t ~ N(X_t, obs_noise^2).
struct OuModelConfig {
    double step_size = 0.1;
    double obs_noise = 0.1;
    std::vector<double> observations; // length horizon + 1

    void validate_parameters() const; // step/noise positivity
};

struct OuTrajectory {
    std::vector<double> states;
    std::vector<double> observations;
};

// Simulates horizon+1 states and observations from the OU model. Fixed seed,
// fixed output.
OuTrajectory simulate_ou_trajectory(const OuModelConfig& config, int horizon, std::uint64_t seed);

// Bootstrap filter for the OU model: proposal equals the transition density,
// potential equals the Gaussian emission density at the stored observation.
ModelSpec bootstrap_model(const OuModelConfig& config);

// Potential identically one; states are carried unchanged. Only resampling
// acts, so the genealogy law matches any neutral model.
ModelSpec neutral_model(int horizon);

// Standard normal density, the initial proposal of the benchmark model.
double standard_normal_density(double x);

// Observation CSV ("t,y", one row per generation).
void observations_to_csv(const std::vector<double>& observations, const std::string& path);
std::vector<double> observations_from_csv(const std::string& path);

} // namespace smcgen
