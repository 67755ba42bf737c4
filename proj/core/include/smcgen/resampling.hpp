#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "smcgen/rng.hpp"

namespace smcgen {

enum class Scheme { multinomial, residual, stratified, systematic };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name); // throws ConfigError on unknown names

enum class PermuteMode { on, off, automatic };

std::string_view permute_mode_name(PermuteMode mode);
PermuteMode parse_permute_mode(std::string_view name);

// True if the permutation wrapper should run for this scheme under the given
// mode. `automatic` turns it on for the three schemes that are not
// exchangeable on their own.
bool permutation_applies(Scheme scheme, PermuteMode mode);

// Normalized weight vector: entries nonnegative and finite, sum within 1e-12
// of one on entry, renormalized exactly on construction.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights);

    // Divides by the sum; accepts any nonnegative finite vector with a
    // positive sum.
    static WeightVector normalized(std::vector<double> raw);
    static WeightVector uniform(int n);

    int size() const { return static_cast<int>(weights_.size()); }
    std::span<const double> values() const { return weights_; }
    double operator[](int i) const { return weights_[static_cast<std::size_t>(i)]; }

    double sum_squares() const;

private:
    struct Renormalized {};
    WeightVector(std::vector<double> weights, Renormalized) : weights_(std::move(weights)) {}

    std::vector<double> weights_;
};

// Parent index per offspring slot, zero-based. The one-based convention is
// applied only at CSV boundaries.
using AncestorVector = std::vector<std::int32_t>;

// Throws InputError unless every entry lies in [0, num_particles).
void validate_ancestors(const AncestorVector& ancestors, int num_particles);

// Per-generation resampler with reusable workspaces, for hot loops that
// would otherwise reallocate cumulative sums every step. The weights span
// must already be normalized.
class Resampler {
public:
    explicit Resampler(Scheme scheme) : scheme_(scheme) {}

    Scheme scheme() const { return scheme_; }
    void operator()(std::span<const double> weights, Rng& rng, AncestorVector& out);

private:
    Scheme scheme_;
    std::vector<double> cumulative_;
    std::vector<double> offsets_;
    std::vector<double> residual_;
};

// N independent categorical draws with probabilities w. Draws use binary
// search over cumulative sums; a particle with weight exactly zero is never
// selected.
AncestorVector resample_multinomial(const WeightVector& weights, Rng& rng);

// floor(N w_i) deterministic copies per particle, remainder multinomial on
// the residual weights.
AncestorVector resample_residual(const WeightVector& weights, Rng& rng);

// Inverse CDF at one uniform per stratum [(i-1)/N, i/N).
AncestorVector resample_stratified(const WeightVector& weights, Rng& rng);

// Inverse CDF at a single shared uniform offset; offspring counts land in
// {floor(N w_i), ceil(N w_i)}.
AncestorVector resample_systematic(const WeightVector& weights, Rng& rng);

AncestorVector resample(Scheme scheme, const WeightVector& weights, Rng& rng);

// Applies a uniformly sampled permutation to the offspring slots, making the
// conditional law of the ancestor vector given offspring counts uniform over
// all consistent vectors.
void permute_ancestors_inplace(AncestorVector& ancestors, Rng& rng);
AncestorVector permute_ancestors(const AncestorVector& ancestors, Rng& rng);

} // namespace smcgen
