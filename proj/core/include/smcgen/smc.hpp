#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smcgen/model.hpp"
#include "smcgen/resampling.hpp"

namespace smcgen {

struct RunMeta {
    int num_particles = 0;
    int horizon = 0;
    std::string scheme;
    std::string permute; // permutation wrapper mode actually applied: "on"/"off"
    std::uint64_t seed = 0;
    std::string model_id;
    std::string rng_algorithm;
    bool states_stored = true;
};

// Full record of one run: generation-major matrices. In streaming mode only
// the ancestor matrix, the final weights and the ESS series are retained,
// which is all the genealogy analysis needs.
struct ParticleHistory {
    RunMeta meta;
    std::vector<std::vector<double>> states;       // (horizon+1) x N, empty when streaming
    std::vector<std::vector<double>> weights;      // (horizon+1) x N, empty when streaming
    std::vector<double> final_weights;             // N
    std::vector<AncestorVector> ancestors;         // horizon x N
    std::vector<double> ess;                       // horizon+1

    void validate() const; // dimension and invariant checks, throws InputError
};

struct RunOptions {
    bool store_states = true;
    bool store_weights = true;
    PermuteMode permute = PermuteMode::automatic;
};

// Algorithm: draw X_0 ~ mu, weight by g_0, then per generation resample,
// propagate through the transition kernel, and reweight with the potential
// evaluated at parent and offspring states. Weights are normalized every
// generation via max-shifted log sums.
ParticleHistory run_smc(const ModelSpec& model, int num_particles, Scheme scheme,
                        std::uint64_t seed, const RunOptions& options = {});

// 1 / sum of squared weights (Kong's effective sample size).
double effective_sample_size(const WeightVector& weights);

// --- serialization -------------------------------------------------------

// Ancestor matrix as "t,i,parent" (one-based indices).
void ancestors_to_csv(const ParticleHistory& history, const std::string& path);

// Per-generation weight summary as "t,ess,w_min,w_max".
void weight_summary_to_csv(const ParticleHistory& history, const std::string& path);

// Run metadata as a small JSON object.
void meta_to_json(const RunMeta& meta, const std::string& path);

// Binary dump, little-endian, layout documented in the implementation.
void history_to_binary(const ParticleHistory& history, const std::string& path);
ParticleHistory history_from_binary(const std::string& path);

} // namespace smcgen
