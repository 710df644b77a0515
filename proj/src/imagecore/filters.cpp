#include "slca/filters.hpp"

#include <algorithm>
#include <cmath>

#include "slca/errors.hpp"

namespace slca {

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian sigma must be positive");
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[i + radius] = w;
        total += w;
    }
    for (double& w : k) w /= total;
    return k;
}

Image separable_convolve(const Image& img, const std::vector<double>& kernel) {
    if (kernel.empty() || kernel.size() % 2 == 0) throw ConfigError("kernel length must be odd");
    const int radius = static_cast<int>(kernel.size() / 2);
    const int h = img.height(), w = img.width();

    Image tmp(h, w);
    std::vector<double> line;
    for (int r = 0; r < h; ++r) {
        auto src = img.row(r);
        auto dst = tmp.row(r);
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) acc += kernel[t + radius] * src[reflect_index(c + t, w)];
            dst[c] = acc;
        }
    }

    Image out(h, w);
    line.resize(h);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) line[r] = tmp(r, c);
        for (int r = 0; r < h; ++r) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) acc += kernel[t + radius] * line[reflect_index(r + t, h)];
            out(r, c) = acc;
        }
    }
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    return separable_convolve(img, gaussian_kernel(sigma));
}

Image dog_filter(const Image& img, double sigma_inner, double sigma_outer) {
    if (!(sigma_inner > 0.0) || !(sigma_inner < sigma_outer))
        throw ConfigError("DoG requires 0 < sigma_inner < sigma_outer");
    return gaussian_blur(img, sigma_inner) - gaussian_blur(img, sigma_outer);
}

NormalizedPair normalize_pair(const StereoPair& pair, double target_norm) {
    if (pair.left.empty()) throw ConfigError("cannot normalize an empty pair");
    if (!(target_norm > 0.0)) throw ConfigError("target norm must be positive");
    NormalizedPair out{pair, false};
    for (Image* half : {&out.pair.left, &out.pair.right}) {
        const double m = half->mean();
        for (double& v : half->values()) v -= m;
    }
    const double norm = std::sqrt(out.pair.squared_norm());
    if (norm == 0.0) {
        out.degenerate = true;
        return out;
    }
    const double s = target_norm / norm;
    out.pair.left *= s;
    out.pair.right *= s;
    return out;
}

namespace {

double triangle(double x) {
    x = std::abs(x);
    return x < 1.0 ? 1.0 - x : 0.0;
}

// Keys cubic convolution, a = -0.5.
double cubic(double x) {
    x = std::abs(x);
    const double a = -0.5;
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

struct Taps {
    std::vector<int> first;          // per output sample
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<int>> index;
};

Taps resample_taps(int in, int out, Interpolation method) {
    const double scale = static_cast<double>(out) / in;
    const double support = method == Interpolation::Bilinear ? 1.0 : 2.0;
    const double stretch = scale < 1.0 ? scale : 1.0;
    const double reach = support / stretch;
    Taps taps;
    taps.weights.resize(out);
    taps.index.resize(out);
    for (int j = 0; j < out; ++j) {
        const double u = (j + 0.5) / scale - 0.5;
        const int lo = static_cast<int>(std::floor(u - reach));
        const int hi = static_cast<int>(std::ceil(u + reach));
        double total = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double x = (u - i) * stretch;
            const double w = method == Interpolation::Bilinear ? triangle(x) : cubic(x);
            if (w == 0.0) continue;
            taps.index[j].push_back(reflect_index(i, in));
            taps.weights[j].push_back(w);
            total += w;
        }
        for (double& w : taps.weights[j]) w /= total;
    }
    return taps;
}

}  // namespace

Image resample(const Image& img, int out_height, int out_width, Interpolation method) {
    if (out_height < 1 || out_width < 1) throw ConfigError("resample output size must be positive");
    const Taps cols = resample_taps(img.width(), out_width, method);
    const Taps rows = resample_taps(img.height(), out_height, method);

    Image tmp(img.height(), out_width);
    for (int r = 0; r < img.height(); ++r) {
        auto src = img.row(r);
        for (int c = 0; c < out_width; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < cols.index[c].size(); ++t) acc += cols.weights[c][t] * src[cols.index[c][t]];
            tmp(r, c) = acc;
        }
    }
    Image out(out_height, out_width);
    for (int r = 0; r < out_height; ++r) {
        for (int c = 0; c < out_width; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < rows.index[r].size(); ++t) acc += rows.weights[r][t] * tmp(rows.index[r][t], c);
            out(r, c) = acc;
        }
    }
    return out;
}

Image downscale(const Image& img, double factor, Interpolation method) {
    if (!(factor > 0.0) || factor > 1.0) throw ConfigError("downscale factor must lie in (0, 1]");
    const int h = static_cast<int>(std::lround(img.height() * factor));
    const int w = static_cast<int>(std::lround(img.width() * factor));
    if (h < 1 || w < 1) throw ConfigError("downscale output would be empty");
    if (h == img.height() && w == img.width()) return img;
    return resample(img, h, w, method);
}

double PreprocessConfig::norm_for(int height, int width) const {
    if (target_norm > 0.0) return target_norm;
    return std::sqrt(static_cast<double>(height) * width) / kernel_size;
}

NormalizedPair preprocess_pair(const StereoPair& pair, const PreprocessConfig& cfg) {
    auto retina = [&](const Image& img) {
        const Image smooth = cfg.blur_sigma > 0.0 ? gaussian_blur(img, cfg.blur_sigma) : img;
        return dog_filter(smooth, cfg.dog_inner, cfg.dog_outer);
    };
    StereoPair filtered(retina(pair.left), retina(pair.right));
    return normalize_pair(filtered, cfg.norm_for(pair.height(), pair.width()));
}

}  // namespace slca
