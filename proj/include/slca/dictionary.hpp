#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>
#include <json.hpp>

#include "slca/image.hpp"

namespace slca {

// K paired left/right kernels. Column k of weights() stacks the row-major
// left kernel over the row-major right kernel (2 * kernel_size^2 rows).
class Dictionary {
public:
    Dictionary(int count, int kernel_size = 16, int stride = 8);
    Dictionary(Eigen::MatrixXd weights, int kernel_size, int stride);

    // Seeded unit-variance noise, jointly normalized per kernel pair.
    static Dictionary random(int count, int kernel_size, int stride, std::uint64_t seed);

    int count() const noexcept { return static_cast<int>(weights_.cols()); }
    int kernel_size() const noexcept { return kernel_size_; }
    int stride() const noexcept { return stride_; }
    int patch_size() const noexcept { return kernel_size_ * kernel_size_; }

    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    Eigen::MatrixXd& weights() noexcept { return weights_; }

    Image left(int k) const;
    Image right(int k) const;
    void set_kernel(int k, const Image& left, const Image& right);

    // Rescales every kernel pair to joint unit norm; all-zero pairs throw.
    void normalize();
    // Largest deviation of ||left_k||^2 + ||right_k||^2 from one.
    double max_norm_error() const;

private:
    Eigen::MatrixXd weights_;
    int kernel_size_;
    int stride_;
};

// Dictionary file: tensor (K, 2, ks, ks) plus sidecar JSON with
// {kernel_size, stride, count} merged into `metadata`.
void save_dictionary(const std::filesystem::path& path, const Dictionary& dict, nlohmann::json metadata = {},
                     bool double_precision = false);
Dictionary load_dictionary(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

// Number of kernels giving the requested overcompleteness relative to the
// 2 * stride^2 input dimensions per coefficient position (128 for stride 8).
int kernels_for_overcompleteness(double ratio, int stride = 8);

}  // namespace slca
