#include "smcgen/smc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "smcgen/errors.hpp"

namespace smcgen {

void ParticleHistory::validate() const {
    const int n = meta.num_particles;
    const int horizon = meta.horizon;
    if (n < 2 || horizon < 1) throw InputError("history: bad dimensions in meta");
    if (static_cast<int>(ancestors.size()) != horizon)
        throw InputError("history: ancestor matrix has wrong number of generations");
    for (const auto& row : ancestors) {
        if (static_cast<int>(row.size()) != n)
            throw InputError("history: ancestor row has wrong width");
        validate_ancestors(row, n);
    }
    if (static_cast<int>(final_weights.size()) != n)
        throw InputError("history: final weights have wrong width");
    if (static_cast<int>(ess.size()) != horizon + 1)
        throw InputError("history: ess series has wrong length");
    for (double e : ess)
        if (!(e >= 1.0 - 1e-9 && e <= n + 1e-9))
            throw InputError("history: effective sample size outside [1, N]");
    if (meta.states_stored &&
        (static_cast<int>(states.size()) != horizon + 1 ||
         static_cast<int>(weights.size()) != horizon + 1))
        throw InputError("history: state/weight matrices missing despite states_stored");
    for (const auto& row : weights) {
        double sum = 0.0;
        for (double w : row) sum += w;
        if (std::abs(sum - 1.0) > 1e-9)
            throw InputError("history: generation weights do not sum to 1 within 1e-9");
    }
}

namespace {

// Normalizes one generation of log potentials in place into weights.
// Returns the ESS. Throws on nonfinite or all-zero potentials.
double normalize_generation(std::vector<double>& log_values, int generation) {
    double max_log = -std::numeric_limits<double>::infinity();
    bool all_equal = true;
    for (double v : log_values) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw NumericError("potential not finite at generation " + std::to_string(generation));
        if (v != log_values.front()) all_equal = false;
        max_log = std::max(max_log, v);
    }
    if (max_log == -std::numeric_limits<double>::infinity())
        throw DegenerateWeightsError(generation, "all potentials are zero");
    const double n = static_cast<double>(log_values.size());
    if (all_equal) { // constant potential, e.g. a neutral model
        for (double& v : log_values) v = 1.0 / n;
        return n;
    }
    double sum = 0.0;
    for (double& v : log_values) {
        v = std::exp(v - max_log);
        sum += v;
    }
    double sum_squares = 0.0;
    for (double& v : log_values) {
        v /= sum;
        sum_squares += v * v;
    }
    return 1.0 / sum_squares;
}

} // namespace

ParticleHistory run_smc(const ModelSpec& model, int num_particles, Scheme scheme,
                        std::uint64_t seed, const RunOptions& options) {
    model.validate();
    if (num_particles < 2) throw ConfigError("run_smc: need at least two particles");
    const int n = num_particles;
    const int horizon = model.horizon;
    const bool permute = permutation_applies(scheme, options.permute);

    Rng rng(seed);
    ParticleHistory history;
    history.meta = RunMeta{n,
                           horizon,
                           std::string(scheme_name(scheme)),
                           permute ? "on" : "off",
                           seed,
                           model.id,
                           std::string(Rng::algorithm()),
                           options.store_states && options.store_weights};
    history.ancestors.reserve(static_cast<std::size_t>(horizon));
    history.ess.reserve(static_cast<std::size_t>(horizon) + 1);
    if (options.store_states) history.states.reserve(static_cast<std::size_t>(horizon) + 1);
    if (options.store_weights) history.weights.reserve(static_cast<std::size_t>(horizon) + 1);

    std::vector<double> states(static_cast<std::size_t>(n));
    std::vector<double> next_states(static_cast<std::size_t>(n));
    std::vector<double> work(static_cast<std::size_t>(n));
    Resampler resampler(scheme);
    AncestorVector parents;

    for (auto& x : states) x = model.initial_sampler(rng);
    for (int i = 0; i < n; ++i) {
        const double x = states[static_cast<std::size_t>(i)];
        work[static_cast<std::size_t>(i)] = model.log_potential(0, x, x);
    }
    history.ess.push_back(normalize_generation(work, 0));
    if (options.store_states) history.states.push_back(states);
    if (options.store_weights) history.weights.push_back(work);

    for (int t = 0; t < horizon; ++t) {
        // work holds the normalized weights of generation t at this point.
        resampler(work, rng, parents);
        if (permute) permute_ancestors_inplace(parents, rng);

        for (int i = 0; i < n; ++i) {
            const double parent_state = states[static_cast<std::size_t>(parents[i])];
            next_states[static_cast<std::size_t>(i)] =
                model.transition_sampler(t + 1, parent_state, rng);
            work[static_cast<std::size_t>(i)] = model.log_potential(
                t + 1, parent_state, next_states[static_cast<std::size_t>(i)]);
        }
        history.ess.push_back(normalize_generation(work, t + 1));
        history.ancestors.push_back(parents);
        states.swap(next_states);
        if (options.store_states) history.states.push_back(states);
        if (options.store_weights) history.weights.push_back(work);
    }

    history.final_weights = work;
    return history;
}

double effective_sample_size(const WeightVector& weights) {
    return 1.0 / weights.sum_squares();
}

void ancestors_to_csv(const ParticleHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write ancestors to " + path);
    out << "t,i,parent\n";
    char buffer[64];
    for (std::size_t t = 0; t < history.ancestors.size(); ++t) {
        const auto& row = history.ancestors[t];
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buffer, sizeof(buffer), "%zu,%zu,%d\n", t, i + 1, row[i] + 1);
            out << buffer;
        }
    }
}

void weight_summary_to_csv(const ParticleHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write weight summary to " + path);
    out << "t,ess,w_min,w_max\n";
    char buffer[128];
    for (std::size_t t = 0; t < history.ess.size(); ++t) {
        double w_min = std::numeric_limits<double>::quiet_NaN();
        double w_max = w_min;
        if (t < history.weights.size() && !history.weights[t].empty()) {
            const auto [lo, hi] =
                std::minmax_element(history.weights[t].begin(), history.weights[t].end());
            w_min = *lo;
            w_max = *hi;
        } else if (t + 1 == history.ess.size() && !history.final_weights.empty()) {
            const auto [lo, hi] =
                std::minmax_element(history.final_weights.begin(), history.final_weights.end());
            w_min = *lo;
            w_max = *hi;
        }
        std::snprintf(buffer, sizeof(buffer), "%zu,%.17g,%.17g,%.17g\n", t, history.ess[t], w_min,
                      w_max);
        out << buffer;
    }
}

void meta_to_json(const RunMeta& meta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write meta to " + path);
    out << "{\n"
        << "  \"num_particles\": " << meta.num_particles << ",\n"
        << "  \"horizon\": " << meta.horizon << ",\n"
        << "  \"scheme\": \"" << meta.scheme << "\",\n"
        << "  \"permute_ancestors\": \"" << meta.permute << "\",\n"
        << "  \"seed\": " << meta.seed << ",\n"
        << "  \"model\": \"" << meta.model_id << "\",\n"
        << "  \"rng\": \"" << meta.rng_algorithm << "\",\n"
        << "  \"states_stored\": " << (meta.states_stored ? "true" : "false") << "\n"
        << "}\n";
}

namespace {

// Binary layout (all little-endian):
//   magic "SMCGH1\0\0" (8 bytes)
//   int32 num_particles, int32 horizon, uint64 seed, uint8 states_stored
//   int32 scheme name length + bytes, same for permute, model id, rng id
//   ancestors: horizon * N int32
//   final weights: N float64
//   ess: (horizon+1) float64
//   if states_stored: states then weights, (horizon+1) * N float64 each
static_assert(std::endian::native == std::endian::little,
              "binary history layout assumes a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod(out, static_cast<std::int32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    const auto size = read_pod<std::int32_t>(in);
    std::string s(static_cast<std::size_t>(size), '\0');
    in.read(s.data(), size);
    return s;
}

} // namespace

void history_to_binary(const ParticleHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write history to " + path);
    out.write("SMCGH1\0", 8);
    write_pod(out, static_cast<std::int32_t>(history.meta.num_particles));
    write_pod(out, static_cast<std::int32_t>(history.meta.horizon));
    write_pod(out, history.meta.seed);
    write_pod(out, static_cast<std::uint8_t>(history.meta.states_stored));
    write_string(out, history.meta.scheme);
    write_string(out, history.meta.permute);
    write_string(out, history.meta.model_id);
    write_string(out, history.meta.rng_algorithm);
    for (const auto& row : history.ancestors)
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(std::int32_t)));
    out.write(reinterpret_cast<const char*>(history.final_weights.data()),
              static_cast<std::streamsize>(history.final_weights.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(history.ess.data()),
              static_cast<std::streamsize>(history.ess.size() * sizeof(double)));
    if (history.meta.states_stored) {
        for (const auto& row : history.states)
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(double)));
        for (const auto& row : history.weights)
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
}

ParticleHistory history_from_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read history from " + path);
    char magic[8] = {};
    in.read(magic, 8);
    if (std::string(magic, 6) != "SMCGH1") throw ConfigError("history file: bad magic");
    ParticleHistory history;
    history.meta.num_particles = read_pod<std::int32_t>(in);
    history.meta.horizon = read_pod<std::int32_t>(in);
    history.meta.seed = read_pod<std::uint64_t>(in);
    history.meta.states_stored = read_pod<std::uint8_t>(in) != 0;
    history.meta.scheme = read_string(in);
    history.meta.permute = read_string(in);
    history.meta.model_id = read_string(in);
    history.meta.rng_algorithm = read_string(in);
    const std::size_t n = static_cast<std::size_t>(history.meta.num_particles);
    const std::size_t horizon = static_cast<std::size_t>(history.meta.horizon);
    history.ancestors.assign(horizon, AncestorVector(n));
    for (auto& row : history.ancestors)
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(n * sizeof(std::int32_t)));
    history.final_weights.resize(n);
    in.read(reinterpret_cast<char*>(history.final_weights.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    history.ess.resize(horizon + 1);
    in.read(reinterpret_cast<char*>(history.ess.data()),
            static_cast<std::streamsize>((horizon + 1) * sizeof(double)));
    if (history.meta.states_stored) {
        history.states.assign(horizon + 1, std::vector<double>(n));
        for (auto& row : history.states)
            in.read(reinterpret_cast<char*>(row.data()),
                    static_cast<std::streamsize>(n * sizeof(double)));
        history.weights.assign(horizon + 1, std::vector<double>(n));
        for (auto& row : history.weights)
            in.read(reinterpret_cast<char*>(row.data()),
                    static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!in) throw ConfigError("history file: truncated");
    return history;
}

} // namespace smcgen
