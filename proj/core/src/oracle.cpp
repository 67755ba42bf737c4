#include "smcgen/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "smcgen/combinatorics.hpp"
#include "smcgen/errors.hpp"

namespace smcgen {

void reports_to_csv(const std::vector<EnumerationReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write enumeration reports to " + path);
    out << "case,analytic,brute_force,abs_diff\n";
    char buffer[128];
    for (const auto& report : reports) {
        std::snprintf(buffer, sizeof(buffer), ",%.17g,%.17g,%.17g\n", report.analytic,
                      report.brute_force, report.abs_diff);
        out << '"' << report.case_label << '"' << buffer;
    }
}

std::vector<AncestorVector> enumerate_consistent_ancestors(const OffspringCounts& counts) {
    const int n = counts.num_particles();
    if (n < 1 || n > 6) throw InputError("oracle: enumeration guard N <= 6");
    const int total = std::accumulate(counts.counts.begin(), counts.counts.end(), 0);
    if (total != n) throw InputError("oracle: offspring counts must sum to N");

    AncestorVector base;
    base.reserve(static_cast<std::size_t>(n));
    for (int parent = 0; parent < n; ++parent)
        for (int c = 0; c < counts.counts[static_cast<std::size_t>(parent)]; ++c)
            base.push_back(static_cast<std::int32_t>(parent));

    std::vector<AncestorVector> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

long long multiset_permutation_count(const OffspringCounts& counts) {
    auto factorial = [](int k) {
        long long f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    long long count = factorial(counts.num_particles());
    for (int c : counts.counts) count /= factorial(c);
    return count;
}

double brute_force_transition(const OffspringCounts& counts, const Partition& from,
                              const Partition& to) {
    if (from.num_blocks() > 4) throw InputError("oracle: guard |from| <= 4");
    if (from.num_blocks() > counts.num_particles())
        throw InputError("oracle: more blocks than particles");
    if (to.ground_size() != from.ground_size())
        throw InputError("oracle: partitions on different ground sets");

    // Target grouping of the designated slots: slot k (the lineage of the
    // k-th `from` block, blocks in canonical order) belongs to the `to`
    // block containing that `from` block's least element.
    const int slots = from.num_blocks();
    std::vector<int> target(static_cast<std::size_t>(slots));
    const auto profile = merge_profile(from, to);
    if (!profile) return 0.0;
    for (int k = 0; k < slots; ++k)
        target[static_cast<std::size_t>(k)] =
            to.block_containing(from.blocks()[static_cast<std::size_t>(k)].front());

    const auto vectors = enumerate_consistent_ancestors(counts);
    long long matches = 0;
    for (const auto& ancestors : vectors) {
        bool match = true;
        for (int x = 0; x < slots && match; ++x)
            for (int y = x + 1; y < slots && match; ++y) {
                const bool same_parent = ancestors[static_cast<std::size_t>(x)] ==
                                         ancestors[static_cast<std::size_t>(y)];
                const bool same_target = target[static_cast<std::size_t>(x)] ==
                                         target[static_cast<std::size_t>(y)];
                if (same_parent != same_target) match = false;
            }
        if (match) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(vectors.size());
}

EnumerationReport verify_binomial_falling_moments(int trials_n, double p, int order, long draws,
                                                  Rng& rng) {
    if (order < 1 || order > 4) throw InputError("oracle: falling-moment order must be 1..4");
    if (p < 0.0 || p > 1.0) throw InputError("oracle: probability outside [0,1]");
    if (trials_n < 1 || draws < 1) throw InputError("oracle: need positive sizes");

    double sum = 0.0;
    for (long d = 0; d < draws; ++d) {
        int successes = 0;
        for (int i = 0; i < trials_n; ++i)
            if (rng.uniform() < p) ++successes;
        sum += static_cast<double>(falling_factorial(successes, order));
    }
    EnumerationReport report;
    report.case_label = "binomial N=" + std::to_string(trials_n) + " p=" + std::to_string(p) +
                        " q=" + std::to_string(order);
    report.analytic = static_cast<double>(falling_factorial(trials_n, order)) *
                      std::pow(p, static_cast<double>(order));
    report.brute_force = sum / static_cast<double>(draws);
    report.abs_diff = std::abs(report.analytic - report.brute_force);
    return report;
}

} // namespace smcgen
