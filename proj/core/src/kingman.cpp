#include "smcgen/kingman.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smcgen/combinatorics.hpp"
#include "smcgen/errors.hpp"

namespace smcgen {

const Partition& CoalescentRealization::partition_at_time(double t) const {
    if (t < 0.0) throw InputError("coalescent: negative time");
    double clock = 0.0;
    for (std::size_t i = 0; i < waiting_times.size(); ++i) {
        clock += waiting_times[i];
        if (t < clock) return partition_path[i];
    }
    return partition_path.back();
}

CoalescentRealization simulate_coalescent(int num_leaves, Rng& rng) {
    if (num_leaves < 2) throw InputError("coalescent: need at least two leaves");
    CoalescentRealization out;
    out.num_leaves = num_leaves;
    out.partition_path.push_back(Partition::singletons(num_leaves));
    for (int k = num_leaves; k >= 2; --k) {
        const double rate = static_cast<double>(binomial_pairs(k));
        out.waiting_times.push_back(rng.exponential(rate));
        // Uniform pair (a, b), a < b < k.
        const std::size_t pick = rng.uniform_index(static_cast<std::size_t>(binomial_pairs(k)));
        std::size_t a = 0;
        std::size_t left = pick;
        while (left >= static_cast<std::size_t>(k) - 1 - a) {
            left -= static_cast<std::size_t>(k) - 1 - a;
            ++a;
        }
        const std::size_t b = a + 1 + left;
        out.partition_path.push_back(
            out.partition_path.back().merge_blocks(static_cast<int>(a), static_cast<int>(b)));
        out.tree_height += out.waiting_times.back();
    }
    return out;
}

double simulate_tree_height(int num_leaves, Rng& rng) {
    if (num_leaves < 2) throw InputError("coalescent: need at least two leaves");
    double height = 0.0;
    for (int k = num_leaves; k >= 2; --k)
        height += rng.exponential(static_cast<double>(binomial_pairs(k)));
    return height;
}

HeightMoments height_moments(int num_leaves) {
    if (num_leaves < 2) throw InputError("coalescent: need at least two leaves");
    HeightMoments out;
    out.mean = 2.0 * (1.0 - 1.0 / static_cast<double>(num_leaves));
    for (int k = 2; k <= num_leaves; ++k) {
        const double rate = static_cast<double>(binomial_pairs(k));
        out.variance += 1.0 / (rate * rate);
    }
    return out;
}

int GeneratorMatrix::state_index(const Partition& p) const {
    for (int i = 0; i < dimension(); ++i)
        if (states[static_cast<std::size_t>(i)] == p) return i;
    throw InputError("generator: partition is not a state");
}

GeneratorMatrix build_generator(int num_leaves) {
    if (num_leaves < 2 || num_leaves > 6)
        throw InputError("generator: supported range is 2..6 leaves");
    GeneratorMatrix gen;
    gen.num_leaves = num_leaves;
    gen.states = enumerate_partitions(num_leaves);
    const std::size_t dim = gen.states.size();
    gen.entries.assign(dim * dim, 0.0);
    for (std::size_t row = 0; row < dim; ++row) {
        const auto& from = gen.states[row];
        gen.entries[row * dim + row] =
            -static_cast<double>(binomial_pairs(from.num_blocks()));
        for (int a = 0; a < from.num_blocks(); ++a) {
            for (int b = a + 1; b < from.num_blocks(); ++b) {
                const auto merged = from.merge_blocks(a, b);
                const std::size_t col =
                    static_cast<std::size_t>(gen.state_index(merged));
                gen.entries[row * dim + col] = 1.0;
            }
        }
    }
    return gen;
}

namespace {

double max_abs(const std::vector<double>& m) {
    double v = 0.0;
    for (double x : m) v = std::max(v, std::abs(x));
    return v;
}

std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t dim) {
    std::vector<double> out(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            const double aik = a[i * dim + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] += aik * b[k * dim + j];
        }
    return out;
}

} // namespace

std::vector<double> transition_matrix(const GeneratorMatrix& generator, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw InputError("transition_matrix: time must be finite and nonnegative");
    const std::size_t dim = generator.states.size();

    std::vector<double> scaled = generator.entries;
    for (double& x : scaled) x *= t;

    int squarings = 0;
    double norm = max_abs(scaled);
    while (norm > 0.5) {
        for (double& x : scaled) x *= 0.5;
        norm *= 0.5;
        ++squarings;
    }

    std::vector<double> result(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) result[i * dim + i] = 1.0;
    std::vector<double> term = result;
    for (int k = 1; k <= 64; ++k) {
        term = multiply(term, scaled, dim);
        for (double& x : term) x /= k;
        for (std::size_t i = 0; i < term.size(); ++i) result[i] += term[i];
        if (max_abs(term) <= 1e-12) break;
    }
    for (int s = 0; s < squarings; ++s) result = multiply(result, result, dim);

    for (double& x : result) {
        if (x > -1e-12 && x < 0.0) x = 0.0;
        if (x > 1.0 && x < 1.0 + 1e-12) x = 1.0;
    }
    return result;
}

void matrix_to_csv(const GeneratorMatrix& generator, const std::vector<double>& matrix,
                   const std::string& path) {
    const std::size_t dim = generator.states.size();
    if (matrix.size() != dim * dim) throw InputError("matrix_to_csv: dimension mismatch");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write matrix to " + path);
    out << "partition";
    for (const auto& state : generator.states) out << ',' << '"' << state.label() << '"';
    out << '\n';
    char buffer[64];
    for (std::size_t row = 0; row < dim; ++row) {
        out << '"' << generator.states[row].label() << '"';
        for (std::size_t col = 0; col < dim; ++col) {
            std::snprintf(buffer, sizeof(buffer), ",%.17g", matrix[row * dim + col]);
            out << buffer;
        }
        out << '\n';
    }
}

} // namespace smcgen
