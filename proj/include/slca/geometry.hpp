#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "slca/filters.hpp"
#include "slca/image.hpp"

namespace slca {

struct CameraIntrinsics {
    double fx = 1400.0;
    double fy = 1400.0;
    double px = 0.0;  // principal point, column
    double py = 0.0;  // principal point, row

    Eigen::Matrix3d matrix() const;
};

// Image coordinates: x = column, y = row, pixel centers on integers.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct ListingRotation {
    Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();  // unit axis, zero when s == p
    double angle = 0.0;                               // rad
};

// Rotation about an axis in the image plane, perpendicular to s - p, by
// atan(|s - p| / f). The sign is chosen so that x' = K R K^-1 x maps the
// point s onto the principal point p.
ListingRotation listing_rotation(Point2 s, Point2 p, double focal);

struct WarpResult {
    Image image;
    std::vector<std::uint8_t> valid;  // 1 where the source ray fell inside the input
};

// Inverse warp for x' = K R K^-1 x with bilinear sampling; out-of-view
// pixels are zero and flagged invalid.
WarpResult homography_warp(const Image& img, const CameraIntrinsics& K, const Eigen::Matrix3d& R);

struct FixationConfig {
    int crop_height = 256;
    int crop_width = 256;
    double max_angle_deg = 20.0;
    double downscale = 1.0;  // applied after warping, before cropping
    Interpolation method = Interpolation::Bicubic;
};

// Rotates each half towards its fixation point and crops around the
// principal point. Throws DataError when a rotation exceeds the angle budget
// or the crop leaves the valid warped region.
StereoPair make_virtual_fixation(const StereoPair& pair, Point2 fix_left, Point2 fix_right,
                                 const CameraIntrinsics& K, const FixationConfig& cfg = {});

}  // namespace slca
