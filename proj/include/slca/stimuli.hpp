#pragma once

#include <cstdint>
#include <vector>

#include "slca/filters.hpp"
#include "slca/image.hpp"
#include "slca/labels.hpp"

namespace slca {

// Two crops of `crop` x `crop` px at a seeded random position, the right crop
// offset by (2 dx, 2 dy), each downscaled by one half. The resulting pair
// carries disparity (dx, dy) at output scale.
StereoPair make_shifted_pair(const Image& source, const DisparityLabel& label, int crop, std::uint64_t seed,
                             Interpolation method = Interpolation::Bilinear);

// Two verged pinhole cameras viewing a textured plane through the fixation
// point. Tilt is the image direction of increasing depth, measured
// counter-clockwise from the +x (right) axis; slant is the angle between the
// plane and the fronto-parallel plane.
struct SurfaceRig {
    double baseline = 0.07;      // m
    double distance = 1.0;       // m, cyclopean point to plane center
    double fov_deg = 11.8;       // horizontal field of view
    int height = 256;
    int width = 256;
    double texels_per_pixel = 1.0;  // texture sampling density at the fixation point

    double focal_px() const;
    double principal_x() const { return (width - 1) / 2.0; }
    double principal_y() const { return (height - 1) / 2.0; }
};

StereoPair render_slanted_plane(const Image& texture, const SurfaceLabel& label, const SurfaceRig& rig);

struct PlaneDisparity {
    double dx = 0.0;  // x_left - x_right
    double dy = 0.0;  // y_left - y_right
};

// Closed-form disparity of the plane point seen at `left_x, left_y` in the
// left image.
PlaneDisparity plane_disparity(const SurfaceRig& rig, const SurfaceLabel& label, double left_x, double left_y);

// Disparity magnitude change per slant step at `eccentricity` px right of the
// fixation point (tilt 0), for consecutive entries of `slants`.
std::vector<double> slant_step_increments(const SurfaceRig& rig, const std::vector<double>& slants,
                                          double eccentricity = 10.0);

// Returns `rig` with the baseline rescaled so that the mean increment
// reported by slant_step_increments equals `target_px`.
SurfaceRig calibrate_baseline(SurfaceRig rig, const std::vector<double>& slants, double eccentricity = 10.0,
                              double target_px = 1.0);

// Slant values between consecutive steps of the default surface grid
// (6, 24.3, 38.2, 48.2, 55.2 degrees).
std::vector<double> default_slant_steps();

}  // namespace slca

namespace slca {

// Fronto-parallel textured rectangles over a textured background, each with
// its own horizontal disparity, painted far to near. Ground truth is the
// disparity of the front-most surface at every left-image pixel.
struct SceneConfig {
    int height = 256;
    int width = 256;
    double background_disparity = 0.0;
    int layers = 3;
    double min_disparity = -20.0;
    double max_disparity = 20.0;
    double min_size = 0.2;  // rectangle side, fraction of the image side
    double max_size = 0.5;
    std::uint64_t seed = 0;
};

struct Scene {
    StereoPair pair;
    Image truth_dx;
    Image truth_dy;
};

Scene make_layered_scene(const SceneConfig& cfg);

}  // namespace slca
