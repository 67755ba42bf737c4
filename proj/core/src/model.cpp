#include "smcgen/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smcgen/errors.hpp"

namespace smcgen {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

double ModelSpec::potential(int generation, double parent_state, double state) const {
    return std::exp(log_potential(generation, parent_state, state));
}

void ModelSpec::validate() const {
    if (horizon < 1) throw ConfigError("model: horizon must be at least 1");
    if (!initial_sampler || !transition_sampler || !log_potential)
        throw ConfigError("model: missing sampler or potential");
}

void OuModelConfig::validate_parameters() const {
    if (!(step_size > 0.0)) throw ConfigError("ou model: step size must be positive");
    if (!(obs_noise > 0.0)) throw ConfigError("ou model: observation noise must be positive");
}

OuTrajectory simulate_ou_trajectory(const OuModelConfig& config, int horizon, std::uint64_t seed) {
    config.validate_parameters();
    if (horizon < 1) throw ConfigError("ou model: horizon must be at least 1");
    Rng rng(seed);
    OuTrajectory out;
    out.states.resize(static_cast<std::size_t>(horizon) + 1);
    out.observations.resize(static_cast<std::size_t>(horizon) + 1);
    const double keep = 1.0 - config.step_size;
    const double drive = std::sqrt(config.step_size);
    out.states[0] = rng.normal();
    for (int t = 0; t < horizon; ++t)
        out.states[static_cast<std::size_t>(t) + 1] =
            keep * out.states[static_cast<std::size_t>(t)] + drive * rng.normal();
    for (int t = 0; t <= horizon; ++t)
        out.observations[static_cast<std::size_t>(t)] =
            out.states[static_cast<std::size_t>(t)] + config.obs_noise * rng.normal();
    return out;
}

ModelSpec bootstrap_model(const OuModelConfig& config) {
    config.validate_parameters();
    if (config.observations.size() < 2)
        throw ConfigError("ou model: need observations for at least generations 0 and 1");
    const int horizon = static_cast<int>(config.observations.size()) - 1;

    const double keep = 1.0 - config.step_size;
    const double drive = std::sqrt(config.step_size);
    const double inv_two_var = 1.0 / (2.0 * config.obs_noise * config.obs_noise);
    const double log_norm = -0.5 * std::log(kTwoPi * config.obs_noise * config.obs_noise);
    auto observations = config.observations;

    ModelSpec model;
    model.horizon = horizon;
    model.id = "ou-bootstrap";
    model.initial_sampler = [](Rng& rng) { return rng.normal(); };
    model.transition_sampler = [keep, drive](int /*generation*/, double state, Rng& rng) {
        return keep * state + drive * rng.normal();
    };
    model.log_potential = [observations = std::move(observations), inv_two_var, log_norm](
                              int generation, double /*parent_state*/, double state) {
        const double gap = observations[static_cast<std::size_t>(generation)] - state;
        return log_norm - gap * gap * inv_two_var;
    };
    return model;
}

ModelSpec neutral_model(int horizon) {
    if (horizon < 1) throw ConfigError("neutral model: horizon must be at least 1");
    ModelSpec model;
    model.horizon = horizon;
    model.id = "neutral";
    model.initial_sampler = [](Rng& rng) { return rng.normal(); };
    model.transition_sampler = [](int, double state, Rng&) { return state; };
    model.log_potential = [](int, double, double) { return 0.0; };
    return model;
}

double standard_normal_density(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

void observations_to_csv(const std::vector<double>& observations, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write observations to " + path);
    out << "t,y\n";
    char buffer[64];
    for (std::size_t t = 0; t < observations.size(); ++t) {
        std::snprintf(buffer, sizeof(buffer), "%zu,%.17g\n", t, observations[t]);
        out << buffer;
    }
}

std::vector<double> observations_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read observations from " + path);
    std::string line;
    if (!std::getline(in, line) || line != "t,y")
        throw ConfigError("observations csv: expected header 't,y' in " + path);
    std::vector<double> observations;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t t = 0;
        char comma = 0;
        double y = 0.0;
        if (!(row >> t >> comma >> y) || comma != ',' || t != expected)
            throw ConfigError("observations csv: malformed row '" + line + "'");
        observations.push_back(y);
        ++expected;
    }
    if (observations.empty()) throw ConfigError("observations csv: no rows in " + path);
    return observations;
}

} // namespace smcgen
