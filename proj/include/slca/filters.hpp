#pragma once

#include <vector>

#include "slca/image.hpp"

namespace slca {

enum class Interpolation { Bilinear, Bicubic };

// Sampled 1-D Gaussian, radius ceil(4 sigma), weights summing to one.
std::vector<double> gaussian_kernel(double sigma);

// Separable convolution with a 1-D kernel of odd length (centered), applied
// along rows then columns, symmetric reflection at the borders.
Image separable_convolve(const Image& img, const std::vector<double>& kernel);

Image gaussian_blur(const Image& img, double sigma);

// gaussian_blur(sigma_inner) - gaussian_blur(sigma_outer).
Image dog_filter(const Image& img, double sigma_inner = 1.0, double sigma_outer = 5.5);

struct NormalizedPair {
    StereoPair pair;
    bool degenerate = false;  // nothing left after mean-centering
};

// Mean-centers each half, then scales both by one common factor so the
// concatenated pair has l2-norm target_norm.
NormalizedPair normalize_pair(const StereoPair& pair, double target_norm = 1.0);

// Separable resampling to an explicit output size. When shrinking, the
// interpolation kernel is stretched by the inverse scale (antialiasing).
Image resample(const Image& img, int out_height, int out_width, Interpolation method);

// Output dimensions round(input * factor), factor in (0, 1].
Image downscale(const Image& img, double factor, Interpolation method);

struct PreprocessConfig {
    double blur_sigma = 0.5;
    double dog_inner = 1.0;
    double dog_outer = 5.5;
    // Joint l2 norm after normalization. A value <= 0 selects the
    // patch-scaled norm sqrt(H*W)/kernel_size, under which one 2 x k x k
    // patch of the pair carries unit energy on average.
    double target_norm = 1.0;
    int kernel_size = 16;

    double norm_for(int height, int width) const;
};

// Gaussian blur, DoG per half, then joint normalization.
NormalizedPair preprocess_pair(const StereoPair& pair, const PreprocessConfig& cfg);

}  // namespace slca
