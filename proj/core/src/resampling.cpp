#include "smcgen/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smcgen/errors.hpp"

namespace smcgen {

std::string_view scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::multinomial: return "multinomial";
        case Scheme::residual: return "residual";
        case Scheme::stratified: return "stratified";
        case Scheme::systematic: return "systematic";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "multinomial") return Scheme::multinomial;
    if (name == "residual") return Scheme::residual;
    if (name == "stratified") return Scheme::stratified;
    if (name == "systematic") return Scheme::systematic;
    throw ConfigError("unknown resampling scheme: " + std::string(name));
}

std::string_view permute_mode_name(PermuteMode mode) {
    switch (mode) {
        case PermuteMode::on: return "on";
        case PermuteMode::off: return "off";
        case PermuteMode::automatic: return "auto";
    }
    return "unknown";
}

PermuteMode parse_permute_mode(std::string_view name) {
    if (name == "on") return PermuteMode::on;
    if (name == "off") return PermuteMode::off;
    if (name == "auto") return PermuteMode::automatic;
    throw ConfigError("unknown permute-ancestors mode: " + std::string(name));
}

bool permutation_applies(Scheme scheme, PermuteMode mode) {
    switch (mode) {
        case PermuteMode::on: return true;
        case PermuteMode::off: return false;
        case PermuteMode::automatic: return scheme != Scheme::multinomial;
    }
    return false;
}

namespace {

constexpr double kSumTolerance = 1e-12;

void check_entries(const std::vector<double>& weights) {
    if (weights.empty()) throw InputError("weight vector: empty");
    for (double w : weights) {
        if (!std::isfinite(w)) throw InputError("weight vector: nonfinite entry");
        if (w < 0.0) throw InputError("weight vector: negative entry");
    }
}

} // namespace

WeightVector::WeightVector(std::vector<double> weights) {
    check_entries(weights);
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw InputError("weight vector: sum " + std::to_string(sum) + " is not 1 within 1e-12");
    for (double& w : weights) w /= sum;
    weights_ = std::move(weights);
}

WeightVector WeightVector::normalized(std::vector<double> raw) {
    check_entries(raw);
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (!(sum > 0.0)) throw InputError("weight vector: sum must be positive");
    for (double& w : raw) w /= sum;
    return WeightVector(std::move(raw), Renormalized{});
}

WeightVector WeightVector::uniform(int n) {
    if (n < 1) throw InputError("weight vector: size must be positive");
    return WeightVector(std::vector<double>(n, 1.0 / n), Renormalized{});
}

double WeightVector::sum_squares() const {
    double s = 0.0;
    for (double w : weights_) s += w * w;
    return s;
}

void validate_ancestors(const AncestorVector& ancestors, int num_particles) {
    if (ancestors.empty()) throw InputError("ancestor vector: empty");
    for (std::int32_t a : ancestors)
        if (a < 0 || a >= num_particles) throw InputError("ancestor vector: index out of range");
}

namespace {

// Cumulative weights with the final entry pinned to 1 so that every uniform
// in [0, 1) lands in some stratum.
void build_cumulative(std::span<const double> weights, std::vector<double>& cum) {
    cum.resize(weights.size());
    double run = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        run += weights[i];
        cum[i] = run;
    }
    cum.back() = 1.0;
}

// First index whose cumulative weight strictly exceeds u. Zero-weight
// particles occupy empty half-open intervals and can never be returned.
// Branchless halving keeps the search off the branch predictor; the answer
// range is a superset at every step, so the odd/even split is safe.
std::int32_t draw_categorical(const std::vector<double>& cum, double u) {
    const double* base = cum.data();
    std::size_t lo = 0;
    std::size_t len = cum.size();
    while (len > 1) {
        const std::size_t half = len >> 1;
        lo += (base[lo + half - 1] <= u) ? half : 0;
        len -= half;
    }
    return static_cast<std::int32_t>(lo);
}

// Shared inverse-CDF walk for stratified/systematic: the query points
// (i + offsets[i]) / N are increasing, so one merge pass suffices.
void inverse_cdf_grid(std::span<const double> weights, const std::vector<double>& offsets,
                      std::vector<double>& cum, AncestorVector& out) {
    const std::size_t n = weights.size();
    build_cumulative(weights, cum);
    out.resize(n);
    std::size_t parent = 0;
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) + offsets[i]) * scale;
        while (cum[parent] <= u && parent + 1 < n) ++parent;
        out[i] = static_cast<std::int32_t>(parent);
    }
}

} // namespace

void Resampler::operator()(std::span<const double> weights, Rng& rng, AncestorVector& out) {
    const std::size_t n = weights.size();
    if (n == 0) throw InputError("resample: empty weights");
    switch (scheme_) {
        case Scheme::multinomial: {
            build_cumulative(weights, cumulative_);
            out.resize(n);
            for (auto& slot : out) slot = draw_categorical(cumulative_, rng.uniform());
            return;
        }
        case Scheme::residual: {
            out.clear();
            out.reserve(n);
            residual_.resize(n);
            double residual_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double scaled = static_cast<double>(n) * weights[i];
                const double floor_part = std::floor(scaled);
                for (int c = 0; c < static_cast<int>(floor_part); ++c)
                    out.push_back(static_cast<std::int32_t>(i));
                residual_[i] = scaled - floor_part;
                residual_sum += residual_[i];
            }
            const std::size_t remainder = n - out.size();
            if (remainder > 0) {
                for (auto& r : residual_) r /= residual_sum;
                build_cumulative(residual_, cumulative_);
                for (std::size_t c = 0; c < remainder; ++c)
                    out.push_back(draw_categorical(cumulative_, rng.uniform()));
            }
            return;
        }
        case Scheme::stratified: {
            offsets_.resize(n);
            for (auto& u : offsets_) u = rng.uniform();
            inverse_cdf_grid(weights, offsets_, cumulative_, out);
            return;
        }
        case Scheme::systematic: {
            offsets_.assign(n, rng.uniform());
            inverse_cdf_grid(weights, offsets_, cumulative_, out);
            return;
        }
    }
    throw InputError("resample: unknown scheme");
}

AncestorVector resample(Scheme scheme, const WeightVector& weights, Rng& rng) {
    Resampler resampler(scheme);
    AncestorVector out;
    resampler(weights.values(), rng, out);
    return out;
}

AncestorVector resample_multinomial(const WeightVector& weights, Rng& rng) {
    return resample(Scheme::multinomial, weights, rng);
}

AncestorVector resample_residual(const WeightVector& weights, Rng& rng) {
    return resample(Scheme::residual, weights, rng);
}

AncestorVector resample_stratified(const WeightVector& weights, Rng& rng) {
    return resample(Scheme::stratified, weights, rng);
}

AncestorVector resample_systematic(const WeightVector& weights, Rng& rng) {
    return resample(Scheme::systematic, weights, rng);
}

void permute_ancestors_inplace(AncestorVector& ancestors, Rng& rng) {
    for (std::size_t i = ancestors.size(); i > 1; --i)
        std::swap(ancestors[i - 1], ancestors[rng.uniform_index(i)]);
}

AncestorVector permute_ancestors(const AncestorVector& ancestors, Rng& rng) {
    AncestorVector out = ancestors;
    permute_ancestors_inplace(out, rng);
    return out;
}

} // namespace smcgen
