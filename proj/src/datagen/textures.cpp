#include "slca/textures.hpp"

#include <algorithm>
#include <cmath>

#include "slca/errors.hpp"
#include "slca/filters.hpp"

namespace slca {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void rescale_unit(Image& img) {
    const auto v = img.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo, span = *hi - *lo;
    for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.5;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

Image dead_leaves(int height, int width, std::uint64_t seed, const DeadLeavesConfig& cfg) {
    if (height < 1 || width < 1) throw ConfigError("texture dimensions must be positive");
    if (!(cfg.min_radius > 0.0 && cfg.max_radius >= cfg.min_radius)) throw ConfigError("invalid disc radius range");
    Rng rng(seed);
    Image img(height, width, 0.0);
    std::vector<char> covered(img.size(), 0);
    std::size_t remaining = img.size();

    const double e = 1.0 - cfg.exponent;
    auto draw_radius = [&] {
        if (std::abs(e) < 1e-12) return cfg.min_radius * std::pow(cfg.max_radius / cfg.min_radius, rng.uniform());
        const double lo = std::pow(cfg.min_radius, e), hi = std::pow(cfg.max_radius, e);
        return std::pow(lo + rng.uniform() * (hi - lo), 1.0 / e);
    };

    // Front-to-back: each new disc only paints pixels not yet occluded.
    const double pad = cfg.max_radius;
    for (int d = 0; d < cfg.max_discs && remaining > 0; ++d) {
        const double cx = rng.uniform(-pad, width + pad), cy = rng.uniform(-pad, height + pad);
        const double r = draw_radius(), gray = rng.uniform();
        const int r0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int r1 = std::min(height - 1, static_cast<int>(std::ceil(cy + r)));
        const int c0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int c1 = std::min(width - 1, static_cast<int>(std::ceil(cx + r)));
        for (int y = r0; y <= r1; ++y) {
            for (int x = c0; x <= c1; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * width + x;
                if (covered[i] || (x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
                covered[i] = 1;
                img(y, x) = gray;
                --remaining;
            }
        }
    }
    return cfg.blur_sigma > 0.0 ? gaussian_blur(img, cfg.blur_sigma) : img;
}

Image octave_noise(int height, int width, std::uint64_t seed, double beta) {
    if (height < 1 || width < 1) throw ConfigError("texture dimensions must be positive");
    Rng rng(seed);
    Image out(height, width, 0.0);
    const int largest = std::max(height, width);
    double amplitude = 1.0;
    for (int cells = 2; cells <= largest; cells *= 2) {
        const int gh = std::max(2, (cells * height + largest - 1) / largest);
        const int gw = std::max(2, (cells * width + largest - 1) / largest);
        Image grid(gh, gw);
        for (double& v : grid.values()) v = rng.normal();
        out += resample(grid, height, width, Interpolation::Bicubic) * amplitude;
        amplitude *= std::pow(2.0, -beta);
    }
    rescale_unit(out);
    return out;
}

}  // namespace slca
