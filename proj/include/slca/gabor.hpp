#pragma once

#include <Eigen/Core>

#include "slca/image.hpp"

namespace slca {

// a + b exp(-(alpha x'^2 + 2 beta x'y' + gamma y'^2)) cos(2 pi f x' + kappa)
// with (x', y') the pixel offset from (x0, y0) rotated by phi, and the
// envelope of widths sigma_x, sigma_y rotated by theta relative to x'.
struct GaborParams {
    double a = 0.0;
    double b = 1.0;
    double x0 = 0.0;  // column, px
    double y0 = 0.0;  // row, px
    double phi = 0.0;
    double theta = 0.0;
    double sigma_x = 2.0;
    double sigma_y = 2.0;
    double f = 0.1;  // cycles / px
    double kappa = 0.0;

    double operator()(double x, double y) const;
    double n_x() const { return f * sigma_x; }
    double n_y() const { return f * sigma_y; }
};

Image render_gabor(const GaborParams& p, int height, int width);

// Representative of the symmetry class: b >= 0, f >= 0, phi in [0, pi),
// theta in [-pi/4, pi/4) (swapping the widths where needed), kappa in (-pi, pi].
GaborParams canonical(GaborParams p);

struct GaborFit {
    GaborParams params;
    double r2 = 0.0;
    double sse = 0.0;
};

struct GaborFitOptions {
    bool min_cycles = false;  // enforce n_x, n_y >= 0.25
    bool lock_theta = false;  // envelope axes fixed to the carrier (theta = 0)
    double sigma_min = 0.5;
    double sigma_max = 8.0;
    double f_max = 0.5;
    int orientation_starts = 8;
    int phase_starts = 4;
};

// Multi-start Levenberg-Marquardt; keeps the start with the smallest SSE.
// Throws DataError for zero-variance input.
GaborFit fit_gabor(const Image& kernel, const GaborFitOptions& opts = {});

double wrap_angle(double a);  // to (-pi, pi]

}  // namespace slca
