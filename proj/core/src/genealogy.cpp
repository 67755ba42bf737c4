#include "smcgen/genealogy.hpp"

#include <algorithm>
#include <cmath>

#include "smcgen/combinatorics.hpp"
#include "smcgen/errors.hpp"

namespace smcgen {

OffspringCounts offspring_counts(const AncestorVector& ancestors, int num_particles) {
    OffspringCounts out;
    offspring_counts_into(ancestors, num_particles, out);
    return out;
}

void offspring_counts_into(const AncestorVector& ancestors, int num_particles,
                           OffspringCounts& out) {
    validate_ancestors(ancestors, num_particles);
    out.counts.assign(static_cast<std::size_t>(num_particles), 0);
    for (std::int32_t parent : ancestors) ++out.counts[static_cast<std::size_t>(parent)];
}

double pair_merger_prob(const OffspringCounts& counts) {
    const int n = counts.num_particles();
    if (n < 2) throw InputError("pair_merger_prob: need at least two particles");
    std::int64_t sum = 0;
    for (int c : counts.counts) sum += static_cast<std::int64_t>(c) * (c - 1);
    return static_cast<double>(sum) / static_cast<double>(falling_factorial(n, 2));
}

double multi_merger_bound(const OffspringCounts& counts) {
    const int n = counts.num_particles();
    if (n < 2) throw InputError("multi_merger_bound: need at least two particles");
    std::int64_t sum_squares = 0;
    for (int c : counts.counts) sum_squares += static_cast<std::int64_t>(c) * c;
    double total = 0.0;
    const double inv_n = 1.0 / n;
    for (int c : counts.counts) {
        if (c < 2) continue;
        const std::int64_t pairs = static_cast<std::int64_t>(c) * (c - 1);
        const double others = static_cast<double>(sum_squares - static_cast<std::int64_t>(c) * c);
        total += static_cast<double>(pairs) * (c + others * inv_n);
    }
    return total / (static_cast<double>(n) * static_cast<double>(falling_factorial(n, 2)));
}

CoalescenceSeries CoalescenceSeries::from_history(const ParticleHistory& history) {
    CoalescenceSeries series;
    const int horizon = static_cast<int>(history.ancestors.size());
    series.pair_prob_.reserve(static_cast<std::size_t>(horizon));
    series.multi_bound_.reserve(static_cast<std::size_t>(horizon));
    series.cumulative_.reserve(static_cast<std::size_t>(horizon));
    // Reverse step r uses the forward ancestor row horizon - r.
    OffspringCounts counts;
    for (int r = 1; r <= horizon; ++r) {
        offspring_counts_into(history.ancestors[static_cast<std::size_t>(horizon - r)],
                              history.meta.num_particles, counts);
        series.append(counts);
    }
    return series;
}

void CoalescenceSeries::append(const OffspringCounts& counts) {
    const double c = pair_merger_prob(counts);
    const double d = multi_merger_bound(counts);
    pair_prob_.push_back(c);
    multi_bound_.push_back(d);
    cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + c);
}

int CoalescenceSeries::time_change(double t) const {
    const auto r = try_time_change(t);
    if (!r) throw HorizonExhaustedError(total(), t);
    return *r;
}

std::optional<int> CoalescenceSeries::try_time_change(double t) const {
    if (!(t > 0.0)) throw InputError("time_change: query time must be positive");
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), t);
    if (it == cumulative_.end()) return std::nullopt;
    return static_cast<int>(it - cumulative_.begin()) + 1;
}

long long CoalescenceSeries::invariant_violations() const {
    long long violations = 0;
    for (std::size_t i = 0; i < pair_prob_.size(); ++i) {
        const double c = pair_prob_[i];
        const double d = multi_bound_[i];
        if (!(0.0 <= d && d <= c && c <= 1.0)) ++violations;
    }
    return violations;
}

const Partition& GenealogyTrace::partition_at(int generation) const {
    if (generation < 0 || generation > horizon)
        throw InputError("trace: generation outside recorded range");
    // Last event at or before the queried generation.
    const auto it = std::upper_bound(event_generations.begin(), event_generations.end(), generation);
    return event_partitions[static_cast<std::size_t>(it - event_generations.begin()) - 1];
}

int GenealogyTrace::num_blocks_at(int generation) const {
    return partition_at(generation).num_blocks();
}

long long GenealogyTrace::coarsening_violations() const {
    long long violations = 0;
    for (std::size_t i = 1; i < event_partitions.size(); ++i)
        if (!event_partitions[i].is_coarsening_of(event_partitions[i - 1]) ||
            event_partitions[i].num_blocks() >= event_partitions[i - 1].num_blocks())
            ++violations;
    return violations;
}

GenealogyTrace trace_genealogy(const ParticleHistory& history, std::span<const int> leaves) {
    return trace_genealogy(history.ancestors, history.meta.num_particles, leaves);
}

GenealogyTrace trace_genealogy(const std::vector<AncestorVector>& ancestors, int num_particles,
                               std::span<const int> leaves) {
    const int n = static_cast<int>(leaves.size());
    if (n < 1) throw InputError("trace: need at least one leaf");
    if (n > num_particles) throw InputError("trace: more leaves than particles");
    {
        std::vector<int> sorted(leaves.begin(), leaves.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InputError("trace: duplicate leaf indices");
        if (sorted.front() < 0 || sorted.back() >= num_particles)
            throw InputError("trace: leaf index out of range");
    }

    const int horizon = static_cast<int>(ancestors.size());
    GenealogyTrace trace;
    trace.num_leaves = n;
    trace.leaf_indices.assign(leaves.begin(), leaves.end());
    trace.horizon = horizon;
    trace.event_generations.push_back(0);
    trace.event_partitions.push_back(Partition::singletons(n));
    if (n == 1) {
        trace.mrca_generation = 0;
        return trace;
    }

    // One entry per live block: the particle index its lineage occupies and
    // the leaves it contains.
    std::vector<int> position(leaves.begin(), leaves.end());
    std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) members[static_cast<std::size_t>(k)] = {k + 1};

    std::vector<int> next_position;
    for (int r = 1; r <= horizon; ++r) {
        const auto& row = ancestors[static_cast<std::size_t>(horizon - r)];
        next_position.assign(position.size(), 0);
        for (std::size_t b = 0; b < position.size(); ++b)
            next_position[b] = row[static_cast<std::size_t>(position[b])];

        // Group blocks landing on the same parent.
        bool merged = false;
        std::vector<int> order(position.size());
        for (std::size_t b = 0; b < order.size(); ++b) order[b] = static_cast<int>(b);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return next_position[static_cast<std::size_t>(a)] <
                                             next_position[static_cast<std::size_t>(b)]; });
        std::vector<int> new_positions;
        std::vector<std::vector<int>> new_members;
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            std::vector<int> block = members[static_cast<std::size_t>(order[i])];
            while (j + 1 < order.size() &&
                   next_position[static_cast<std::size_t>(order[j + 1])] ==
                       next_position[static_cast<std::size_t>(order[i])]) {
                ++j;
                const auto& extra = members[static_cast<std::size_t>(order[j])];
                block.insert(block.end(), extra.begin(), extra.end());
                merged = true;
            }
            new_positions.push_back(next_position[static_cast<std::size_t>(order[i])]);
            new_members.push_back(std::move(block));
            i = j + 1;
        }
        position = std::move(new_positions);
        members = std::move(new_members);

        if (merged) {
            trace.event_generations.push_back(r);
            trace.event_partitions.push_back(Partition::from_blocks(n, members));
            if (position.size() == 1) {
                trace.mrca_generation = r;
                break;
            }
        }
    }
    return trace;
}

std::optional<int> tree_height(const GenealogyTrace& trace) { return trace.mrca_generation; }

std::optional<double> rescaled_height(const GenealogyTrace& trace,
                                      const CoalescenceSeries& series) {
    if (!trace.mrca_generation) return std::nullopt;
    return series.cumulative(*trace.mrca_generation);
}

double transition_probability(const OffspringCounts& counts, const Partition& from,
                              const Partition& to) {
    const int num_particles = counts.num_particles();
    const int from_blocks = from.num_blocks();
    if (from_blocks > num_particles)
        throw InputError("transition_probability: more blocks than particles");
    if (from_blocks > 6)
        throw InputError("transition_probability: enumeration guard |from| <= 6");
    const auto profile = merge_profile(from, to);
    if (!profile) return 0.0;

    // Parents with zero offspring contribute factor (0)_b = 0.
    std::vector<int> live;
    for (int i = 0; i < num_particles; ++i)
        if (counts.counts[static_cast<std::size_t>(i)] > 0) live.push_back(i);

    const int to_blocks = to.num_blocks();
    std::vector<char> used(live.size(), 0);
    double sum = 0.0;

    // Ordered tuples of distinct parents, one per target block.
    auto recurse = [&](auto&& self, int depth, double product) -> void {
        if (depth == to_blocks) {
            sum += product;
            return;
        }
        const int order = (*profile)[static_cast<std::size_t>(depth)];
        for (std::size_t k = 0; k < live.size(); ++k) {
            if (used[k]) continue;
            const double factor = static_cast<double>(
                falling_factorial(counts.counts[static_cast<std::size_t>(live[k])], order));
            if (factor == 0.0) continue;
            used[k] = 1;
            self(self, depth + 1, product * factor);
            used[k] = 0;
        }
    };
    recurse(recurse, 0, 1.0);
    return sum / static_cast<double>(falling_factorial(num_particles, from_blocks));
}

std::vector<double> merger_transition_matrix(const OffspringCounts& counts, int num_leaves) {
    const int num_particles = counts.num_particles();
    if (num_leaves < 1 || num_leaves > 3)
        throw InputError("merger_transition_matrix: closed forms cover 1 <= n <= 3");
    if (num_particles < num_leaves)
        throw InputError("merger_transition_matrix: more leaves than particles");

    // Power sums and falling-factorial sums of the counts.
    double p2 = 0.0, p3 = 0.0;
    for (int c : counts.counts) {
        const double cd = c;
        p2 += cd * cd;
        p3 += cd * cd * cd;
    }
    const double n1 = num_particles;

    if (num_leaves == 1) return {1.0};

    const double f2 = p2 - n1; // sum (nu)_2
    if (num_leaves == 2) {
        const double pairs2 = static_cast<double>(falling_factorial(num_particles, 2));
        const double merge = f2 / pairs2;
        // States: { {1}{2}, {1,2} }.
        return {1.0 - merge, merge, 0.0, 1.0};
    }

    const double f3 = p3 - 3.0 * p2 + 2.0 * n1; // sum (nu)_3
    const double denom = static_cast<double>(falling_factorial(num_particles, 3));
    // Distinct ordered triples of parents: sum_{i!=j!=k} nu_i nu_j nu_k.
    const double stay = (n1 * n1 * n1 - 3.0 * n1 * p2 + 2.0 * p3) / denom;
    // One specific pair merges: sum_{i!=j} (nu_i)_2 nu_j.
    const double pair = (n1 * f2 - (p3 - p2)) / denom;
    const double triple = f3 / denom;

    // States in enumerate_partitions(3) order:
    //   0 {1}{2}{3}, 1 {1}{2,3}, 2 {1,3}{2}, 3 {1,2}{3}, 4 {1,2,3}
    std::vector<double> matrix(25, 0.0);
    matrix[0 * 5 + 0] = stay;
    matrix[0 * 5 + 1] = pair;
    matrix[0 * 5 + 2] = pair;
    matrix[0 * 5 + 3] = pair;
    matrix[0 * 5 + 4] = triple;
    const double merge2 = f2 / static_cast<double>(falling_factorial(num_particles, 2));
    for (int row : {1, 2, 3}) {
        matrix[static_cast<std::size_t>(row) * 5 + static_cast<std::size_t>(row)] = 1.0 - merge2;
        matrix[static_cast<std::size_t>(row) * 5 + 4] = merge2;
    }
    matrix[4 * 5 + 4] = 1.0;
    return matrix;
}

} // namespace smcgen
