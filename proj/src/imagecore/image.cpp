#include "slca/image.hpp"

#include <cmath>
#include <utility>

#include "slca/errors.hpp"

namespace slca {

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
    if (height < 1 || width < 1) throw ConfigError("image dimensions must be positive");
    values_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

Image::Image(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height < 1 || width < 1) throw ConfigError("image dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
        throw ConfigError("image value count does not match dimensions");
}

double Image::sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

double Image::squared_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

bool Image::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

Image Image::crop(int top, int left, int h, int w) const {
    if (top < 0 || left < 0 || h < 1 || w < 1 || top + h > height_ || left + w > width_)
        throw ConfigError("crop window outside image");
    Image out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) out(r, c) = (*this)(top + r, left + c);
    return out;
}

Image& Image::operator+=(const Image& other) {
    if (!same_shape(other)) throw ConfigError("image shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Image& Image::operator-=(const Image& other) {
    if (!same_shape(other)) throw ConfigError("image shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Image& Image::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

StereoPair::StereoPair(Image l, Image r) : left(std::move(l)), right(std::move(r)) {
    if (!left.same_shape(right)) throw ConfigError("stereo halves differ in size");
}

int reflect_index(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

}  // namespace slca
