#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace slca {

// Single-plane luminance image, row-major, real-valued.
class Image {
public:
    Image() = default;
    Image(int height, int width, double fill = 0.0);
    Image(int height, int width, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(int row, int col) { return values_[index(row, col)]; }
    double operator()(int row, int col) const { return values_[index(row, col)]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> row(int r) { return {values_.data() + index(r, 0), static_cast<std::size_t>(width_)}; }
    std::span<const double> row(int r) const {
        return {values_.data() + index(r, 0), static_cast<std::size_t>(width_)};
    }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    double sum() const;
    double squared_norm() const;
    double mean() const { return empty() ? 0.0 : sum() / static_cast<double>(size()); }
    bool all_finite() const;

    // Copy of the window [top, top+h) x [left, left+w); must lie inside the image.
    Image crop(int top, int left, int h, int w) const;

    Image& operator+=(const Image& other);
    Image& operator-=(const Image& other);
    Image& operator*=(double s);

    friend Image operator+(Image a, const Image& b) { return a += b; }
    friend Image operator-(Image a, const Image& b) { return a -= b; }
    friend Image operator*(Image a, double s) { return a *= s; }
    friend bool operator==(const Image& a, const Image& b) = default;

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> values_;
};

struct StereoPair {
    Image left;
    Image right;

    StereoPair() = default;
    StereoPair(Image l, Image r);

    int height() const noexcept { return left.height(); }
    int width() const noexcept { return left.width(); }
    double squared_norm() const { return left.squared_norm() + right.squared_norm(); }
    friend bool operator==(const StereoPair&, const StereoPair&) = default;
};

// Maps an arbitrary integer index into [0, n) by half-sample symmetric
// reflection (... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...).
int reflect_index(int i, int n) noexcept;

}  // namespace slca
