#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace smcgen {

// splitmix64 finalizer; used for seed derivation only, never as the stream
// generator itself.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic seed splitting: one master seed fans out to per-purpose,
// per-replicate streams. (stream, substream) pairs must be distinct across
// uses; collisions between different (stream, substream) pairs are as likely
// as splitmix64 collisions, i.e. negligible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t substream = 0) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = mix64(z);
    z += 0x9e3779b97f4a7c15ull * (substream + 1);
    return mix64(z);
}

// Random stream used throughout the library: mt19937-64 with an explicit
// Box-Muller transform for normal deviates. std::normal_distribution is
// implementation-defined, so we avoid it; given the same seed this class
// yields the same deviate sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr std::string_view algorithm() { return "mt19937-64/box-muller"; }

    std::uint64_t raw() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform over {0, 1, ..., n-1}, unbiased via rejection.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % n);
    }

    // Standard normal via Box-Muller; the sine deviate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Exponential with the given rate, strictly positive.
    double exponential(double rate) {
        double draw = 0.0;
        while (draw <= 0.0) draw = -std::log1p(-uniform()) / rate;
        return draw;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace smcgen
