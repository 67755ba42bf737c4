#include "smcgen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "smcgen/errors.hpp"
#include "smcgen/kingman.hpp"
#include "smcgen/smc.hpp"

namespace smcgen {

namespace {

// Seed fan-out streams. Per replicate r:
//   observations: derive_seed(master, kObservationStream, r)
//                 (replicate 0 when one trajectory is shared)
//   runs:         derive_seed(master, kRunStream, r), same across schemes
//   leaves:       derive_seed(derive_seed(master, kLeafStream, r), kLeafSubset, n)
constexpr std::uint64_t kObservationStream = 1;
constexpr std::uint64_t kRunStream = 2;
constexpr std::uint64_t kLeafStream = 3;
constexpr std::uint64_t kLeafSubset = 4;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    return out;
}

} // namespace

std::string_view model_preset_name(ModelPreset preset) {
    switch (preset) {
        case ModelPreset::ou_bootstrap: return "ou";
        case ModelPreset::neutral: return "neutral";
    }
    return "unknown";
}

ModelPreset parse_model_preset(std::string_view name) {
    if (name == "ou" || name == "ou-bootstrap") return ModelPreset::ou_bootstrap;
    if (name == "neutral") return ModelPreset::neutral;
    throw ConfigError("unknown model preset: " + std::string(name));
}

int ExperimentConfig::horizon_for(int num_particles) const {
    return horizon > 0 ? horizon : horizon_multiplier * num_particles;
}

void ExperimentConfig::validate() const {
    if (particle_counts.empty()) throw ConfigError("no particle counts configured");
    for (int n : particle_counts)
        if (n < 2) throw ConfigError("particle counts must be at least 2");
    if (leaf_sizes.empty()) throw ConfigError("no leaf sizes configured");
    for (int n : leaf_sizes)
        if (n < 2) throw ConfigError("leaf sizes must be at least 2");
    const int max_particles = *std::max_element(particle_counts.begin(), particle_counts.end());
    for (int n : leaf_sizes)
        if (n > max_particles)
            throw ConfigError("leaf size " + std::to_string(n) +
                              " exceeds every configured particle count");
    if (replicates < 1) throw ConfigError("replicate count must be at least 1");
    if (schemes.empty()) throw ConfigError("no resampling schemes configured");
    if (threads < 1) throw ConfigError("thread count must be at least 1");
    if (horizon == 0 && horizon_multiplier < 1)
        throw ConfigError("horizon multiplier must be at least 1");
    if (!std::is_sorted(fdd_times.begin(), fdd_times.end()) ||
        (!fdd_times.empty() && fdd_times.front() <= 0.0))
        throw ConfigError("query times must be positive and increasing");
    for (std::size_t i = 1; i < fdd_times.size(); ++i)
        if (fdd_times[i] == fdd_times[i - 1]) throw ConfigError("query times must be distinct");
    if (model == ModelPreset::ou_bootstrap) {
        if (!(ou_step > 0.0)) throw ConfigError("ou step size must be positive");
        if (!(ou_noise > 0.0)) throw ConfigError("ou observation noise must be positive");
    }
    // Expected MRCA depth is about 2(1 - 1/n_max) N reverse-time generations
    // (the coalescent tree-height mean times the N generations per
    // coalescent unit); warn when the slack over it falls below 10x.
    const int max_leaves = *std::max_element(leaf_sizes.begin(), leaf_sizes.end());
    for (int n : particle_counts) {
        const double depth = 2.0 * (1.0 - 1.0 / static_cast<double>(max_leaves)) * n;
        if (horizon_for(n) < 10.0 * depth)
            std::fprintf(stderr,
                         "config warning: horizon %d leaves less than 10x slack over the "
                         "expected MRCA depth (about %.0f) at N=%d\n",
                         horizon_for(n), depth, n);
    }
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& section, const char* name,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : section.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw ConfigError(std::string("unknown key \"") + item.key() + "\" in config section " +
                              name);
    }
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("config parse error in " + path + ": " + err.what());
    }
    reject_unknown_keys(doc, "(top level)", {"model", "experiment", "output"});

    ExperimentConfig config;
    if (doc.contains("model")) {
        const auto& model = doc["model"];
        reject_unknown_keys(model, "model",
                            {"preset", "step_size", "obs_noise", "shared_observations"});
        if (model.contains("preset"))
            config.model = parse_model_preset(model["preset"].get<std::string>());
        if (model.contains("step_size")) config.ou_step = model["step_size"].get<double>();
        if (model.contains("obs_noise")) config.ou_noise = model["obs_noise"].get<double>();
        if (model.contains("shared_observations"))
            config.shared_observations = model["shared_observations"].get<bool>();
    }
    if (doc.contains("experiment")) {
        const auto& exp = doc["experiment"];
        reject_unknown_keys(exp, "experiment",
                            {"particles", "leaf_sizes", "replicates", "schemes", "horizon",
                             "horizon_multiplier", "seed", "threads", "permute_ancestors",
                             "fdd_times"});
        if (exp.contains("particles"))
            config.particle_counts = exp["particles"].get<std::vector<int>>();
        if (exp.contains("leaf_sizes")) config.leaf_sizes = exp["leaf_sizes"].get<std::vector<int>>();
        if (exp.contains("replicates")) config.replicates = exp["replicates"].get<int>();
        if (exp.contains("schemes")) {
            config.schemes.clear();
            for (const auto& name : exp["schemes"])
                config.schemes.push_back(parse_scheme(name.get<std::string>()));
        }
        if (exp.contains("horizon")) config.horizon = exp["horizon"].get<int>();
        if (exp.contains("horizon_multiplier"))
            config.horizon_multiplier = exp["horizon_multiplier"].get<int>();
        if (exp.contains("seed")) config.master_seed = exp["seed"].get<std::uint64_t>();
        if (exp.contains("threads")) config.threads = exp["threads"].get<int>();
        if (exp.contains("permute_ancestors"))
            config.permute = parse_permute_mode(exp["permute_ancestors"].get<std::string>());
        if (exp.contains("fdd_times"))
            config.fdd_times = exp["fdd_times"].get<std::vector<double>>();
    }
    if (doc.contains("output")) {
        const auto& output = doc["output"];
        reject_unknown_keys(output, "output", {"dir", "write_traces"});
        if (output.contains("dir")) config.out_dir = output["dir"].get<std::string>();
        if (output.contains("write_traces"))
            config.write_traces = output["write_traces"].get<bool>();
    }
    return config;
}

void parallel_for_replicates(int count, int threads, const std::function<void(int)>& body) {
    if (count <= 0) return;
    const int workers = std::min(threads, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto work = [&] {
        for (;;) {
            const int index = next.fetch_add(1);
            if (index >= count) return;
            try {
                body(index);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<int> sample_leaves(int population, int count, Rng& rng) {
    if (count < 1 || count > population) throw InputError("sample_leaves: bad subset size");
    std::vector<int> pool(static_cast<std::size_t>(population));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + rng.uniform_index(static_cast<std::size_t>(population - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

namespace {

// Builds the model for one replicate. OU observations come from the
// replicate's observation stream unless one trajectory is shared.
ModelSpec replicate_model(const ExperimentConfig& config, int horizon, int replicate,
                          const std::vector<double>* shared_obs) {
    if (config.model == ModelPreset::neutral) return neutral_model(horizon);
    OuModelConfig ou;
    ou.step_size = config.ou_step;
    ou.obs_noise = config.ou_noise;
    if (shared_obs != nullptr) {
        ou.observations = *shared_obs;
    } else {
        const auto seed =
            derive_seed(config.master_seed, kObservationStream, static_cast<std::uint64_t>(replicate));
        ou.observations = simulate_ou_trajectory(ou, horizon, seed).observations;
    }
    return bootstrap_model(ou);
}

std::vector<double> make_shared_observations(const ExperimentConfig& config, int horizon) {
    OuModelConfig ou;
    ou.step_size = config.ou_step;
    ou.obs_noise = config.ou_noise;
    const auto seed = derive_seed(config.master_seed, kObservationStream, 0);
    return simulate_ou_trajectory(ou, horizon, seed).observations;
}

RunOptions streaming_options(const ExperimentConfig& config) {
    RunOptions options;
    options.store_states = false;
    options.store_weights = false;
    options.permute = config.permute;
    return options;
}

struct HeightCell {
    std::optional<int> height;
    std::optional<double> rescaled;
};

struct CompressedTrace {
    std::vector<int> generations;
    std::vector<int> num_blocks;
    int final_generation = 0;
};

struct HeightReplicate {
    std::vector<std::vector<HeightCell>> cells; // [scheme][leaf index]
    std::vector<char> degenerate;               // per scheme
    std::vector<std::vector<CompressedTrace>> traces; // only when write_traces
    InvariantTally invariants;
};

} // namespace

HeightExperimentResult run_height_experiment(const ExperimentConfig& config) {
    config.validate();
    ensure_directory(config.out_dir);

    HeightExperimentResult result;
    std::vector<std::string> heights_lines;

    for (int num_particles : config.particle_counts) {
        const int horizon = config.horizon_for(num_particles);
        std::vector<int> leaf_sizes;
        for (int n : config.leaf_sizes)
            if (n <= num_particles) leaf_sizes.push_back(n);
        if (leaf_sizes.empty()) continue;

        std::vector<double> shared_obs;
        if (config.model == ModelPreset::ou_bootstrap && config.shared_observations)
            shared_obs = make_shared_observations(config, horizon);

        std::vector<HeightReplicate> replicates(static_cast<std::size_t>(config.replicates));
        parallel_for_replicates(config.replicates, config.threads, [&](int rep) {
            auto& record = replicates[static_cast<std::size_t>(rep)];
            record.cells.assign(config.schemes.size(),
                                std::vector<HeightCell>(leaf_sizes.size()));
            record.degenerate.assign(config.schemes.size(), 0);
            if (config.write_traces)
                record.traces.assign(config.schemes.size(),
                                     std::vector<CompressedTrace>(leaf_sizes.size()));

            const auto model = replicate_model(config, horizon, rep,
                                               shared_obs.empty() ? nullptr : &shared_obs);
            const auto run_seed =
                derive_seed(config.master_seed, kRunStream, static_cast<std::uint64_t>(rep));
            const auto leaf_base =
                derive_seed(config.master_seed, kLeafStream, static_cast<std::uint64_t>(rep));

            for (std::size_t s = 0; s < config.schemes.size(); ++s) {
                ParticleHistory history;
                try {
                    history = run_smc(model, num_particles, config.schemes[s], run_seed,
                                      streaming_options(config));
                } catch (const DegenerateWeightsError&) {
                    record.degenerate[s] = 1;
                    continue;
                }
                const auto series = CoalescenceSeries::from_history(history);
                record.invariants.series += series.invariant_violations();

                for (std::size_t li = 0; li < leaf_sizes.size(); ++li) {
                    const int n = leaf_sizes[li];
                    Rng leaf_rng(derive_seed(leaf_base, kLeafSubset,
                                             static_cast<std::uint64_t>(n)));
                    const auto leaves = sample_leaves(num_particles, n, leaf_rng);
                    const auto trace = trace_genealogy(history.ancestors, num_particles, leaves);
                    record.invariants.coarsening += trace.coarsening_violations();
                    record.cells[s][li].height = tree_height(trace);
                    record.cells[s][li].rescaled = rescaled_height(trace, series);
                    if (config.write_traces) {
                        auto& compressed = record.traces[s][li];
                        compressed.generations = trace.event_generations;
                        for (const auto& p : trace.event_partitions)
                            compressed.num_blocks.push_back(p.num_blocks());
                        compressed.final_generation =
                            trace.mrca_generation.value_or(trace.horizon);
                    }
                }
            }
        });

        // Sequential reduce in replicate order.
        for (std::size_t s = 0; s < config.schemes.size(); ++s) {
            const auto scheme = std::string(scheme_name(config.schemes[s]));
            for (std::size_t li = 0; li < leaf_sizes.size(); ++li) {
                RunningMoments heights, rescaled;
                long long censored = 0;
                int used = 0;
                for (int rep = 0; rep < config.replicates; ++rep) {
                    const auto& record = replicates[static_cast<std::size_t>(rep)];
                    if (record.degenerate[s]) continue;
                    ++used;
                    const auto& cell = record.cells[s][li];
                    if (cell.height) {
                        heights.add(static_cast<double>(*cell.height));
                        rescaled.add(*cell.rescaled);
                    } else {
                        ++censored;
                    }
                }
                HeightSummaryRow row;
                row.scheme = scheme;
                row.num_particles = num_particles;
                row.num_leaves = leaf_sizes[li];
                row.mean_height = heights.mean();
                row.var_height = heights.variance();
                row.mean_rescaled = rescaled.mean();
                row.var_rescaled = rescaled.variance();
                row.censor_rate = used > 0 ? static_cast<double>(censored) / used : 0.0;
                row.replicates = used;
                result.rows.push_back(row);
            }
        }
        for (int rep = 0; rep < config.replicates; ++rep) {
            const auto& record = replicates[static_cast<std::size_t>(rep)];
            result.invariants.merge(record.invariants);
            for (std::size_t s = 0; s < config.schemes.size(); ++s) {
                if (record.degenerate[s]) {
                    ++result.excluded_runs;
                    continue;
                }
                for (std::size_t li = 0; li < leaf_sizes.size(); ++li) {
                    const auto& cell = record.cells[s][li];
                    std::string line = std::to_string(rep) + ',' +
                                       std::string(scheme_name(config.schemes[s])) + ',' +
                                       std::to_string(num_particles) + ',' +
                                       std::to_string(leaf_sizes[li]) + ',';
                    if (cell.height) {
                        line += std::to_string(*cell.height) + ',' +
                                format_double(*cell.rescaled) + ",0";
                    } else {
                        line += ",,1";
                    }
                    heights_lines.push_back(std::move(line));
                }
            }
        }

        if (config.write_traces) {
            for (std::size_t s = 0; s < config.schemes.size(); ++s) {
                const std::string path = config.out_dir + "/traces_" +
                                         std::string(scheme_name(config.schemes[s])) + "_N" +
                                         std::to_string(num_particles) + ".csv";
                auto out = open_output(path);
                out << "replicate,n,generation,num_blocks\n";
                for (int rep = 0; rep < config.replicates; ++rep) {
                    const auto& record = replicates[static_cast<std::size_t>(rep)];
                    if (record.degenerate[s]) continue;
                    for (std::size_t li = 0; li < leaf_sizes.size(); ++li) {
                        const auto& trace = record.traces[s][li];
                        for (std::size_t e = 0; e < trace.generations.size(); ++e)
                            out << rep << ',' << leaf_sizes[li] << ',' << trace.generations[e]
                                << ',' << trace.num_blocks[e] << '\n';
                        if (trace.generations.back() != trace.final_generation)
                            out << rep << ',' << leaf_sizes[li] << ',' << trace.final_generation
                                << ',' << trace.num_blocks.back() << '\n';
                    }
                }
            }
        }
    }

    summary_to_csv(result.rows, config.out_dir + "/summary.csv");
    {
        auto out = open_output(config.out_dir + "/heights.csv");
        out << "replicate,scheme,N,n,height_generations,height_rescaled,censored\n";
        for (const auto& line : heights_lines) out << line << '\n';
    }
    emit_plots(result.rows, config.out_dir);
    return result;
}

namespace {

struct SweepReplicate {
    bool degenerate = false;
    bool fdd_censored = false;
    std::optional<int> height;
    std::optional<double> rescaled;
    std::vector<double> conditional_joint; // empty when censored or no times
    int traced_index = -1;                 // flattened tuple index, -1 when censored
    InvariantTally invariants;
};

std::size_t joint_size(std::size_t dim, std::size_t num_times) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < num_times; ++i) size *= dim;
    return size;
}

// Dense row-major product accumulation: segment <- segment * step.
void accumulate_product(std::vector<double>& segment, const std::vector<double>& step,
                        std::size_t dim, std::vector<double>& scratch) {
    scratch.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            const double v = segment[i * dim + k];
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < dim; ++j) scratch[i * dim + j] += v * step[k * dim + j];
        }
    segment.swap(scratch);
}

std::vector<double> identity_matrix(std::size_t dim) {
    std::vector<double> m(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = 1.0;
    return m;
}

// Joint law over partition tuples from per-segment transition matrices,
// starting from the all-singletons state (index 0).
std::vector<double> joint_from_segments(const std::vector<std::vector<double>>& segments,
                                        std::size_t dim) {
    const std::size_t k = segments.size();
    std::vector<double> joint(joint_size(dim, k), 0.0);
    std::vector<std::size_t> tuple(k, 0);
    for (std::size_t flat = 0; flat < joint.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t d = k; d-- > 0;) {
            tuple[d] = rem % dim;
            rem /= dim;
        }
        double p = 1.0;
        std::size_t prev = 0;
        for (std::size_t d = 0; d < k && p != 0.0; ++d) {
            p *= segments[d][prev * dim + tuple[d]];
            prev = tuple[d];
        }
        joint[flat] = p;
    }
    return joint;
}

} // namespace

std::vector<SweepCell> run_genealogy_sweep(const ExperimentConfig& config, int num_leaves,
                                           const std::vector<double>& times) {
    config.validate();
    if (num_leaves < 2) throw InputError("sweep: need at least two leaves");
    if (!times.empty() && num_leaves > 3)
        throw InputError("sweep: conditional transition matrices cover n <= 3");

    const std::size_t dim =
        times.empty() ? 0 : enumerate_partitions(num_leaves).size();

    // Exact coalescent joint over the query times.
    std::vector<double> joint_exact;
    if (!times.empty()) {
        const auto generator = build_generator(num_leaves);
        std::vector<std::vector<double>> segments;
        double previous = 0.0;
        for (double t : times) {
            segments.push_back(transition_matrix(generator, t - previous));
            previous = t;
        }
        joint_exact = joint_from_segments(segments, dim);
    }

    std::vector<SweepCell> cells;
    for (int num_particles : config.particle_counts) {
        if (num_leaves > num_particles)
            throw InputError("sweep: more leaves than particles at N=" +
                             std::to_string(num_particles));
        const int horizon = config.horizon_for(num_particles);

        std::vector<double> shared_obs;
        if (config.model == ModelPreset::ou_bootstrap && config.shared_observations)
            shared_obs = make_shared_observations(config, horizon);

        for (Scheme scheme : config.schemes) {
            std::vector<SweepReplicate> replicates(static_cast<std::size_t>(config.replicates));
            parallel_for_replicates(config.replicates, config.threads, [&](int rep) {
                auto& record = replicates[static_cast<std::size_t>(rep)];
                const auto model = replicate_model(config, horizon, rep,
                                                   shared_obs.empty() ? nullptr : &shared_obs);
                const auto run_seed =
                    derive_seed(config.master_seed, kRunStream, static_cast<std::uint64_t>(rep));
                ParticleHistory history;
                try {
                    history = run_smc(model, num_particles, scheme, run_seed,
                                      streaming_options(config));
                } catch (const DegenerateWeightsError&) {
                    record.degenerate = true;
                    return;
                }
                const auto series = CoalescenceSeries::from_history(history);
                record.invariants.series += series.invariant_violations();

                Rng leaf_rng(derive_seed(
                    derive_seed(config.master_seed, kLeafStream, static_cast<std::uint64_t>(rep)),
                    kLeafSubset, static_cast<std::uint64_t>(num_leaves)));
                const auto leaves = sample_leaves(num_particles, num_leaves, leaf_rng);
                const auto trace = trace_genealogy(history.ancestors, num_particles, leaves);
                record.invariants.coarsening += trace.coarsening_violations();
                record.height = tree_height(trace);
                record.rescaled = rescaled_height(trace, series);

                if (times.empty()) return;

                // Time-changed query generations, with the sandwich check.
                std::vector<int> change_points;
                for (double t : times) {
                    const auto tau = series.try_time_change(t);
                    if (!tau) {
                        record.fdd_censored = true;
                        return;
                    }
                    const double reached = series.cumulative(*tau);
                    if (!(t <= reached && reached < t + 1.0)) ++record.invariants.sandwich;
                    change_points.push_back(*tau);
                }

                // Conditional law given offspring counts: per-segment products
                // of the one-generation transition matrices.
                const auto states = enumerate_partitions(num_leaves);
                std::vector<std::vector<double>> segments;
                std::vector<double> segment = identity_matrix(dim);
                std::vector<double> scratch;
                OffspringCounts counts;
                std::size_t boundary = 0;
                const int last = change_points.back();
                for (int r = 1; r <= last; ++r) {
                    offspring_counts_into(
                        history.ancestors[static_cast<std::size_t>(horizon - r)], num_particles,
                        counts);
                    const auto step = merger_transition_matrix(counts, num_leaves);
                    accumulate_product(segment, step, dim, scratch);
                    while (boundary < change_points.size() &&
                           change_points[boundary] == r) {
                        segments.push_back(segment);
                        segment = identity_matrix(dim);
                        ++boundary;
                    }
                }
                record.conditional_joint = joint_from_segments(segments, dim);

                // Traced tuple index.
                std::size_t flat = 0;
                for (int tau : change_points) {
                    const auto& partition = trace.partition_at(tau);
                    std::size_t state = 0;
                    while (state < states.size() && states[state] != partition) ++state;
                    if (state == states.size())
                        throw InputError("sweep: traced partition missing from state space");
                    flat = flat * dim + state;
                }
                record.traced_index = static_cast<int>(flat);
            });

            SweepCell cell;
            cell.scheme = std::string(scheme_name(scheme));
            cell.num_particles = num_particles;
            cell.num_leaves = num_leaves;
            cell.joint_exact = joint_exact;
            if (!times.empty()) {
                cell.joint_conditional.assign(joint_exact.size(), 0.0);
                cell.joint_traced.assign(joint_exact.size(), 0.0);
            }
            long long fdd_used = 0;
            for (const auto& record : replicates) {
                if (record.degenerate) continue;
                ++cell.replicates_used;
                cell.invariants.merge(record.invariants);
                if (record.height) {
                    cell.heights.add(static_cast<double>(*record.height));
                    cell.heights_rescaled.add(*record.rescaled);
                } else {
                    ++cell.height_censored;
                }
                if (times.empty()) continue;
                if (record.fdd_censored) {
                    ++cell.fdd_censored;
                    continue;
                }
                ++fdd_used;
                for (std::size_t i = 0; i < cell.joint_conditional.size(); ++i)
                    cell.joint_conditional[i] += record.conditional_joint[i];
                cell.joint_traced[static_cast<std::size_t>(record.traced_index)] += 1.0;
            }
            if (fdd_used > 0) {
                for (auto& p : cell.joint_conditional) p /= static_cast<double>(fdd_used);
                for (auto& p : cell.joint_traced) p /= static_cast<double>(fdd_used);
                cell.tv_conditional = total_variation(cell.joint_conditional, cell.joint_exact);
                cell.tv_traced = total_variation(cell.joint_traced, cell.joint_exact);
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

bool FddReport::tv_monotone(const std::string& scheme) const {
    std::vector<std::pair<int, double>> points;
    for (const auto& cell : cells)
        if (cell.scheme == scheme) points.emplace_back(cell.num_particles, cell.tv_conditional);
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].second >= points[i - 1].second) return false;
    return points.size() >= 2;
}

namespace {

void write_fdd_csvs(const FddReport& report, const ExperimentConfig& config) {
    ensure_directory(config.out_dir);
    {
        auto out = open_output(config.out_dir + "/fdd.csv");
        out << "scheme,N,n,replicates,censored,tv_conditional,tv_traced\n";
        for (const auto& cell : report.cells)
            out << cell.scheme << ',' << cell.num_particles << ',' << cell.num_leaves << ','
                << cell.replicates_used << ',' << cell.fdd_censored << ','
                << format_double(cell.tv_conditional) << ',' << format_double(cell.tv_traced)
                << '\n';
    }
    {
        auto out = open_output(config.out_dir + "/fdd_marginals.csv");
        out << "scheme,N,time_index,time,state,prob_exact,prob_conditional,prob_traced\n";
        if (report.cells.empty()) return;
        const auto states = enumerate_partitions(report.num_leaves);
        const std::size_t dim = states.size();
        const std::size_t k = report.times.size();
        for (const auto& cell : report.cells) {
            for (std::size_t d = 0; d < k; ++d) {
                for (std::size_t s = 0; s < dim; ++s) {
                    // Marginal at time d: sum over tuples whose d-th entry is s.
                    double exact = 0.0, conditional = 0.0, traced = 0.0;
                    for (std::size_t flat = 0; flat < cell.joint_exact.size(); ++flat) {
                        std::size_t rem = flat;
                        std::size_t digit = 0;
                        for (std::size_t pos = k; pos-- > 0;) {
                            if (pos == d) digit = rem % dim;
                            rem /= dim;
                        }
                        if (digit != s) continue;
                        exact += cell.joint_exact[flat];
                        if (!cell.joint_conditional.empty()) {
                            conditional += cell.joint_conditional[flat];
                            traced += cell.joint_traced[flat];
                        }
                    }
                    out << cell.scheme << ',' << cell.num_particles << ',' << d << ','
                        << format_double(report.times[d]) << ',' << '"' << states[s].label()
                        << '"' << ',' << format_double(exact) << ',' << format_double(conditional)
                        << ',' << format_double(traced) << '\n';
                }
            }
        }
    }
}

} // namespace

FddReport run_fdd_experiment(const ExperimentConfig& config, int num_leaves,
                             const std::vector<double>& times) {
    if (num_leaves != 2 && num_leaves != 3)
        throw InputError("fdd experiment: leaf count must be 2 or 3");
    if (times.empty()) throw InputError("fdd experiment: need at least one query time");
    if (!std::is_sorted(times.begin(), times.end()) || times.front() <= 0.0)
        throw InputError("fdd experiment: times must be positive and increasing");
    FddReport report;
    report.num_leaves = num_leaves;
    report.times = times;
    report.cells = run_genealogy_sweep(config, num_leaves, times);
    write_fdd_csvs(report, config);
    return report;
}

ScalingReport run_scaling_experiment(const ExperimentConfig& config, int num_leaves) {
    {
        std::vector<int> distinct = config.particle_counts;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 3)
            throw ConfigError("scaling experiment: need at least three distinct particle counts");
    }
    ScalingReport report;
    report.num_leaves = num_leaves;
    report.cells = run_genealogy_sweep(config, num_leaves, {});

    for (Scheme scheme : config.schemes) {
        const auto name = std::string(scheme_name(scheme));
        std::vector<std::pair<int, const SweepCell*>> ordered;
        for (const auto& cell : report.cells)
            if (cell.scheme == name) ordered.emplace_back(cell.num_particles, &cell);
        std::sort(ordered.begin(), ordered.end());

        std::vector<double> log_n, log_mean, log_var;
        ScalingFit fit;
        fit.scheme = name;
        for (const auto& [n, cell] : ordered) {
            log_n.push_back(std::log(static_cast<double>(n)));
            log_mean.push_back(std::log(cell->heights.mean()));
            log_var.push_back(std::log(cell->heights.variance()));
        }
        fit.mean_fit = fit_line(log_n, log_mean);
        fit.var_fit = fit_line(log_n, log_var);
        for (std::size_t i = 1; i < ordered.size(); ++i)
            fit.doubling_ratios.push_back(ordered[i].second->heights.mean() /
                                          ordered[i - 1].second->heights.mean());
        report.fits.push_back(std::move(fit));
    }

    ensure_directory(config.out_dir);
    {
        auto out = open_output(config.out_dir + "/scaling.csv");
        out << "scheme,N,n,replicates,censored,mean_height,var_height\n";
        for (const auto& cell : report.cells)
            out << cell.scheme << ',' << cell.num_particles << ',' << cell.num_leaves << ','
                << cell.replicates_used << ',' << cell.height_censored << ','
                << format_double(cell.heights.mean()) << ','
                << format_double(cell.heights.variance()) << '\n';
    }
    {
        auto out = open_output(config.out_dir + "/scaling_fits.csv");
        out << "scheme,quantity,slope,intercept,slope_stderr,r_squared\n";
        for (const auto& fit : report.fits) {
            out << fit.scheme << ",mean," << format_double(fit.mean_fit.slope) << ','
                << format_double(fit.mean_fit.intercept) << ','
                << format_double(fit.mean_fit.slope_stderr) << ','
                << format_double(fit.mean_fit.r_squared) << '\n';
            out << fit.scheme << ",variance," << format_double(fit.var_fit.slope) << ','
                << format_double(fit.var_fit.intercept) << ','
                << format_double(fit.var_fit.slope_stderr) << ','
                << format_double(fit.var_fit.r_squared) << '\n';
        }
    }
    return report;
}

void summary_to_csv(const std::vector<HeightSummaryRow>& rows, const std::string& path) {
    auto out = open_output(path);
    out << "scheme,N,n,mean_height,var_height,mean_rescaled,var_rescaled,censor_rate,replicates\n";
    for (const auto& row : rows)
        out << row.scheme << ',' << row.num_particles << ',' << row.num_leaves << ','
            << format_double(row.mean_height) << ',' << format_double(row.var_height) << ','
            << format_double(row.mean_rescaled) << ',' << format_double(row.var_rescaled) << ','
            << format_double(row.censor_rate) << ',' << row.replicates << '\n';
}

std::vector<HeightSummaryRow> summary_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read summary from " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "scheme,N,n,mean_height,var_height,mean_rescaled,var_rescaled,censor_rate,replicates")
        throw ConfigError("summary csv: unexpected header in " + path);
    std::vector<HeightSummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        HeightSummaryRow row;
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ',')) throw ConfigError(std::string("summary csv: missing ") + what);
            return field;
        };
        row.scheme = next("scheme");
        row.num_particles = std::stoi(next("N"));
        row.num_leaves = std::stoi(next("n"));
        row.mean_height = std::stod(next("mean_height"));
        row.var_height = std::stod(next("var_height"));
        row.mean_rescaled = std::stod(next("mean_rescaled"));
        row.var_rescaled = std::stod(next("var_rescaled"));
        row.censor_rate = std::stod(next("censor_rate"));
        row.replicates = std::stoi(next("replicates"));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace smcgen
