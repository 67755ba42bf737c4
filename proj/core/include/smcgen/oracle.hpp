#pragma once

#include <string>
#include <vector>

#include "smcgen/genealogy.hpp"
#include "smcgen/partition.hpp"
#include "smcgen/resampling.hpp"
#include "smcgen/rng.hpp"

namespace smcgen {

// Brute-force counterparts to the analytic genealogy formulas, exhaustive at
// tiny sizes. Kept independent of the implementation paths they validate:
// everything here enumerates ancestor vectors directly.

struct EnumerationReport {
    std::string case_label;
    double analytic = 0.0;
    double brute_force = 0.0;
    double abs_diff = 0.0;
};

void reports_to_csv(const std::vector<EnumerationReport>& reports, const std::string& path);

// All ancestor vectors consistent with the given offspring counts, i.e. the
// distinct permutations of the multiset that repeats parent i counts[i]
// times. List size is N! / prod_i counts[i]!. Guarded at N <= 6.
std::vector<AncestorVector> enumerate_consistent_ancestors(const OffspringCounts& counts);

// Number the enumeration is expected to produce.
long long multiset_permutation_count(const OffspringCounts& counts);

// Fraction of consistent ancestor vectors under which the parent pattern of
// the designated child slots (slots 0..|from|-1, one per `from` block)
// groups exactly per `to`. Exchangeability of the conditional assignment
// makes the designated-slot choice lossless. Guarded at N <= 6, |from| <= 4.
double brute_force_transition(const OffspringCounts& counts, const Partition& from,
                              const Partition& to);

// Monte Carlo check of the binomial falling-moment identity
// E[(X)_q] = (N)_q p^q for X ~ Bin(N, p); the report's analytic column holds
// the formula value and the brute-force column the Monte Carlo mean.
EnumerationReport verify_binomial_falling_moments(int trials_n, double p, int order, long draws,
                                                  Rng& rng);

} // namespace smcgen
