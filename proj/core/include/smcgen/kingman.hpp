#pragma once

#include <string>
#include <vector>

#include "smcgen/partition.hpp"
#include "smcgen/rng.hpp"

namespace smcgen {

// One realization of the n-coalescent: holding times from n blocks down to
// the single ancestral block, and the partition path.
struct CoalescentRealization {
    int num_leaves = 0;
    std::vector<double> waiting_times;   // waiting_times[i] held with n - i blocks
    double tree_height = 0.0;            // sum of waiting times
    std::vector<Partition> partition_path; // singletons first, single block last

    // Partition occupied at a given (coalescent) time, by stepping through
    // the holding times.
    const Partition& partition_at_time(double t) const;
};

// Holding time Exp(k choose 2) at k blocks, merging pair uniform among the
// (k choose 2) pairs; equivalent in law to per-pair unit-rate clocks.
CoalescentRealization simulate_coalescent(int num_leaves, Rng& rng);

// Height only; skips partition bookkeeping so moment studies stay cheap at
// large n.
double simulate_tree_height(int num_leaves, Rng& rng);

struct HeightMoments {
    double mean = 0.0;     // 2 (1 - 1/n), exactly
    double variance = 0.0; // sum_{k=2}^n (k choose 2)^{-2}, exactly
};

HeightMoments height_moments(int num_leaves);

// Rate matrix of the n-coalescent over all partitions of [n] in
// enumerate_partitions(n) order: entry 1 for each pair merge, diagonal
// -(|blocks| choose 2), zero otherwise.
struct GeneratorMatrix {
    int num_leaves = 0;
    std::vector<Partition> states;
    std::vector<double> entries; // row-major, dimension states.size()^2

    int dimension() const { return static_cast<int>(states.size()); }
    double at(int row, int col) const {
        return entries[static_cast<std::size_t>(row) * states.size() +
                       static_cast<std::size_t>(col)];
    }
    int state_index(const Partition& p) const; // throws InputError if absent
};

GeneratorMatrix build_generator(int num_leaves); // 2 <= num_leaves <= 6

// exp(Q t) by scaling and squaring with a truncated power series (tail
// tolerance 1e-12, scaled norm at most 0.5). Entries within 1e-12 outside
// [0, 1] are clamped; rows sum to one within 1e-10.
std::vector<double> transition_matrix(const GeneratorMatrix& generator, double t);

// Square matrix over the generator's states with a partition-label header
// column, e.g. "{1,3}{2}".
void matrix_to_csv(const GeneratorMatrix& generator, const std::vector<double>& matrix,
                   const std::string& path);

} // namespace smcgen
