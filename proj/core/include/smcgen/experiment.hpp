#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smcgen/genealogy.hpp"
#include "smcgen/model.hpp"
#include "smcgen/resampling.hpp"
#include "smcgen/stats.hpp"

namespace smcgen {

enum class ModelPreset { ou_bootstrap, neutral };

std::string_view model_preset_name(ModelPreset preset);
ModelPreset parse_model_preset(std::string_view name);

// Batch experiment description. One master seed drives everything through
// documented splitting (see derive_seed and the stream constants in the
// implementation); reruns with equal configs produce byte-identical outputs
// regardless of the thread count.
struct ExperimentConfig {
    ModelPreset model = ModelPreset::ou_bootstrap;
    double ou_step = 0.1;
    double ou_noise = 0.1;
    bool shared_observations = false; // one observed trajectory for all replicates

    std::vector<int> particle_counts = {256};
    std::vector<int> leaf_sizes = {2, 4, 8, 16, 32, 64, 128, 256};
    int replicates = 200;
    std::vector<Scheme> schemes = {Scheme::multinomial, Scheme::residual, Scheme::stratified,
                                   Scheme::systematic};
    int horizon = 0;            // fixed forward horizon; 0 selects multiplier * N
    int horizon_multiplier = 50; // used when horizon == 0
    std::vector<double> fdd_times = {0.5, 1.0};
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
    int threads = 1;
    PermuteMode permute = PermuteMode::automatic;
    bool write_traces = false;

    int horizon_for(int num_particles) const;

    // Throws ConfigError on hard violations; prints a warning when the
    // horizon leaves less than a 10x slack over the expected MRCA depth.
    void validate() const;
};

// JSON config file with sections "model", "experiment", "output"; every key
// optional, unknown keys rejected.
ExperimentConfig load_config(const std::string& path);

// Violation counters for the per-path invariants checked while collecting:
// 0 <= D <= c <= 1 per generation, the time-change sandwich
// t <= C(tau(t)) < t + 1 per query, and coarsening monotonicity per trace.
struct InvariantTally {
    long long series = 0;
    long long sandwich = 0;
    long long coarsening = 0;

    long long total() const { return series + sandwich + coarsening; }
    void merge(const InvariantTally& other) {
        series += other.series;
        sandwich += other.sandwich;
        coarsening += other.coarsening;
    }
};

struct HeightSummaryRow {
    std::string scheme;
    int num_particles = 0;
    int num_leaves = 0;
    double mean_height = 0.0;   // raw reverse-time generations, censored excluded
    double var_height = 0.0;
    double mean_rescaled = 0.0; // coalescent units (cumulative pair-merger probability)
    double var_rescaled = 0.0;
    double censor_rate = 0.0;
    int replicates = 0; // configured minus recorded exclusions
};

struct HeightExperimentResult {
    std::vector<HeightSummaryRow> rows;
    InvariantTally invariants;
    long long excluded_runs = 0; // degenerate-weight runs
};

// Desk-scale replication of the tree-height study: per replicate, fresh
// observations (or one shared trajectory), one run per scheme on the same
// seed, heights for every leaf size. Writes summary.csv, heights.csv,
// optional traces.csv, and the SVG plots into the output directory.
HeightExperimentResult run_height_experiment(const ExperimentConfig& config);

// One (scheme, N) cell of the genealogy sweep shared by the
// finite-dimensional-distribution and scaling studies.
struct SweepCell {
    std::string scheme;
    int num_particles = 0;
    int num_leaves = 0;
    int replicates_used = 0;      // non-degenerate
    long long fdd_censored = 0;   // replicates whose last query time ran off the horizon
    long long height_censored = 0;

    // Joint law over partition tuples at the query times, flattened with the
    // last time fastest; states indexed per enumerate_partitions(n).
    std::vector<double> joint_exact;
    std::vector<double> joint_conditional; // mean of per-replicate conditional laws
    std::vector<double> joint_traced;      // frequencies of the traced tuples

    double tv_conditional = 0.0;
    double tv_traced = 0.0;

    RunningMoments heights;          // raw generations to the MRCA
    RunningMoments heights_rescaled; // coalescent units

    InvariantTally invariants;
};

// Runs the sweep once per (scheme, N): per replicate one streaming run, the
// coalescence series, the conditional law of the genealogy given offspring
// counts (the product of per-generation merger transition matrices between
// the time-changed query times), the traced partitions, and the MRCA height.
std::vector<SweepCell> run_genealogy_sweep(const ExperimentConfig& config, int num_leaves,
                                           const std::vector<double>& times);

struct FddReport {
    int num_leaves = 0;
    std::vector<double> times;
    std::vector<SweepCell> cells;

    // True if tv_conditional decreases strictly with the particle count for
    // the given scheme.
    bool tv_monotone(const std::string& scheme) const;
};

// Compares the empirical law of the time-changed genealogy at the query
// times against the exact product of coalescent transition matrices.
// Writes fdd.csv and fdd_marginals.csv. Requires num_leaves in {2, 3}.
FddReport run_fdd_experiment(const ExperimentConfig& config, int num_leaves,
                             const std::vector<double>& times);

struct ScalingFit {
    std::string scheme;
    LineFit mean_fit; // log mean height vs log N
    LineFit var_fit;  // log height variance vs log N
    std::vector<double> doubling_ratios; // mean(N_{i+1}) / mean(N_i)
};

struct ScalingReport {
    int num_leaves = 0;
    std::vector<SweepCell> cells;
    std::vector<ScalingFit> fits;
};

// Fits mean and variance of the raw-generation tree height against the
// particle count on log-log axes. Needs at least three distinct particle
// counts. Writes scaling.csv and scaling_fits.csv.
ScalingReport run_scaling_experiment(const ExperimentConfig& config, int num_leaves);

// Two SVG files per particle count (mean and variance of rescaled heights
// against the leaf-set size, one polyline per scheme).
void emit_plots(const std::vector<HeightSummaryRow>& rows, const std::string& dir);

// CSV emission, reusable from the CLI `plot` subcommand.
void summary_to_csv(const std::vector<HeightSummaryRow>& rows, const std::string& path);
std::vector<HeightSummaryRow> summary_from_csv(const std::string& path);

// Runs body(0..count-1) on a small worker pool; results must be written to
// per-replicate slots so aggregation order stays fixed.
void parallel_for_replicates(int count, int threads, const std::function<void(int)>& body);

// Uniform subset of {0, ..., population-1} without replacement.
std::vector<int> sample_leaves(int population, int count, Rng& rng);

} // namespace smcgen
