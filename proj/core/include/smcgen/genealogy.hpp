#pragma once

#include <optional>
#include <span>
#include <vector>

#include "smcgen/partition.hpp"
#include "smcgen/resampling.hpp"
#include "smcgen/smc.hpp"

namespace smcgen {

// Offspring counts of one resampling step: counts[i] is the number of
// offspring slots assigned to parent i. Sums to the particle count.
struct OffspringCounts {
    std::vector<int> counts;

    int num_particles() const { return static_cast<int>(counts.size()); }
};

OffspringCounts offspring_counts(const AncestorVector& ancestors, int num_particles);

// Allocation-free variant for hot loops.
void offspring_counts_into(const AncestorVector& ancestors, int num_particles,
                           OffspringCounts& out);

// Conditional probability that a fixed pair of lineages merges across this
// step: sum_i (nu_i)_2 / (N)_2.
double pair_merger_prob(const OffspringCounts& counts);

// Upper bound on the conditional probability that a merger involves more
// than two lineages:
//   (1 / (N (N)_2)) sum_i (nu_i)_2 ( nu_i + (1/N) sum_{j != i} nu_j^2 ).
// Never exceeds pair_merger_prob, since the bracket is at most N.
double multi_merger_bound(const OffspringCounts& counts);

// Per reverse-time generation series of the two statistics above plus the
// running cumulative sum of the pair-merger probabilities. Reverse-time
// generation r = 1 corresponds to the final resampling step of the run.
class CoalescenceSeries {
public:
    CoalescenceSeries() = default;

    static CoalescenceSeries from_history(const ParticleHistory& history);

    // Appends one reverse-time generation (used by streaming collectors).
    void append(const OffspringCounts& counts);

    int horizon() const { return static_cast<int>(pair_prob_.size()); }
    double pair_prob(int r) const { return pair_prob_[static_cast<std::size_t>(r) - 1]; }
    double multi_bound(int r) const { return multi_bound_[static_cast<std::size_t>(r) - 1]; }

    // C(r) = sum_{s <= r} c(s); C(0) = 0, nondecreasing.
    double cumulative(int r) const {
        return r == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(r) - 1];
    }
    double total() const { return cumulative(horizon()); }

    // Smallest r >= 1 with C(r) >= t. Throws HorizonExhaustedError when the
    // recorded horizon is too short.
    int time_change(double t) const;
    std::optional<int> try_time_change(double t) const;

    // Number of generations violating 0 <= D <= c <= 1 (always zero in exact
    // arithmetic; recorded rather than assumed).
    long long invariant_violations() const;

private:
    std::vector<double> pair_prob_;
    std::vector<double> multi_bound_;
    std::vector<double> cumulative_;
};

// Reverse-time genealogy of a chosen leaf set. Generation 0 is the final SMC
// generation; the partition sequence is stored compressed at its change
// points, which is enough to reconstruct every G_r because the process is
// piecewise constant and terminates at the first single block.
struct GenealogyTrace {
    int num_leaves = 0;
    std::vector<int> leaf_indices;           // zero-based particle indices at generation 0
    std::vector<int> event_generations;      // ascending, starts at 0
    std::vector<Partition> event_partitions; // partition from that generation onward
    std::optional<int> mrca_generation;      // unset when censored by the horizon
    int horizon = 0;                         // reverse-time generations available

    const Partition& partition_at(int generation) const;
    int num_blocks_at(int generation) const;

    // 0 if every adjacent pair of partitions coarsens correctly.
    long long coarsening_violations() const;
};

GenealogyTrace trace_genealogy(const ParticleHistory& history, std::span<const int> leaves);

// Streaming variant over a bare ancestor matrix (forward generation order,
// ancestors[t] maps generation t+1 slots to generation t parents).
GenealogyTrace trace_genealogy(const std::vector<AncestorVector>& ancestors, int num_particles,
                               std::span<const int> leaves);

// Generations from the leaves to the most recent common ancestor; nullopt
// when the trace is censored.
std::optional<int> tree_height(const GenealogyTrace& trace);

// Height on the coalescent time scale: the cumulative pair-merger
// probability at the MRCA generation.
std::optional<double> rescaled_height(const GenealogyTrace& trace,
                                      const CoalescenceSeries& series);

// Conditional transition probability of the genealogical process given one
// generation of offspring counts:
//   p(from -> to) = (1/(N)_{|from|}) sum over distinct parent tuples of
//                   prod_k (nu_{i_k})_{b_k},
// where b_k counts the `from` blocks merged into block k of `to`. Returns 0
// when `to` does not coarsen `from`. Enumeration is exponential in the block
// count and guarded at |from| <= 6; it exists for validation at small sizes.
double transition_probability(const OffspringCounts& counts, const Partition& from,
                              const Partition& to);

// Same transition probabilities for every pair of partitions of [n], n <= 3,
// in enumerate_partitions(n) order (row-major, row-stochastic). Closed-form
// in the power sums of the counts, O(N) per generation, usable on production
// paths.
std::vector<double> merger_transition_matrix(const OffspringCounts& counts, int num_leaves);

} // namespace smcgen
