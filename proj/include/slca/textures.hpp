#pragma once

#include <cstdint>
#include <random>

#include "slca/image.hpp"

namespace slca {

// Occluding random discs with power-law radii; produces edges and a roughly
// scale-invariant spectrum, values in [0, 1].
struct DeadLeavesConfig {
    double min_radius = 1.5;
    double max_radius = 40.0;
    double exponent = 3.0;   // radius density ~ r^-exponent
    double blur_sigma = 0.6;
    int max_discs = 200000;
};

Image dead_leaves(int height, int width, std::uint64_t seed, const DeadLeavesConfig& cfg = {});

// Sum of bicubically upsampled white-noise octaves, each finer octave
// attenuated by 2^-beta, rescaled to [0, 1].
Image octave_noise(int height, int width, std::uint64_t seed, double beta = 1.0);

// Seeded draws used throughout; one engine per independent stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    // [0, n)
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Mixes several integers into one seed (splitmix64 chain).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace slca
