#include "slca/stimuli.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "slca/errors.hpp"
#include "slca/textures.hpp"

namespace slca {

StereoPair make_shifted_pair(const Image& source, const DisparityLabel& label, int crop, std::uint64_t seed,
                             Interpolation method) {
    if (crop < 2) throw ConfigError("crop must be at least 2 px");
    const double sx = 2.0 * label.dx, sy = 2.0 * label.dy;
    const int ox = static_cast<int>(std::lround(sx)), oy = static_cast<int>(std::lround(sy));
    if (std::abs(sx - ox) > 1e-9 || std::abs(sy - oy) > 1e-9)
        throw ConfigError("disparity must be a multiple of 0.5 px");

    const int min_left = std::max(0, -ox), max_left = source.width() - crop - std::max(0, ox);
    const int min_top = std::max(0, -oy), max_top = source.height() - crop - std::max(0, oy);
    if (max_left < min_left || max_top < min_top) throw DataError("source image too small for the shifted crop");

    Rng rng(seed);
    const int left = min_left + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_left - min_left + 1)));
    const int top = min_top + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_top - min_top + 1)));

    const Image l = source.crop(top, left, crop, crop);
    const Image r = source.crop(top + oy, left + ox, crop, crop);
    return StereoPair(downscale(l, 0.5, method), downscale(r, 0.5, method));
}

double SurfaceRig::focal_px() const {
    return (width / 2.0) / std::tan(0.5 * fov_deg * M_PI / 180.0);
}

namespace {

struct Camera {
    Eigen::Vector3d center;
    Eigen::Matrix3d to_world;  // columns: camera x, y, z axes
};

// Cameras on the x axis, y pointing down, both verged at (0, 0, distance).
std::array<Camera, 2> verged_cameras(const SurfaceRig& rig) {
    const Eigen::Vector3d fixation(0.0, 0.0, rig.distance);
    std::array<Camera, 2> cams;
    for (int i = 0; i < 2; ++i) {
        Camera& cam = cams[i];
        cam.center = Eigen::Vector3d((i == 0 ? -0.5 : 0.5) * rig.baseline, 0.0, 0.0);
        const Eigen::Vector3d z = (fixation - cam.center).normalized();
        const Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z).normalized();
        const Eigen::Vector3d y = z.cross(x);
        cam.to_world.col(0) = x;
        cam.to_world.col(1) = y;
        cam.to_world.col(2) = z;
    }
    return cams;
}

struct Plane {
    Eigen::Vector3d point;
    Eigen::Matrix3d frame;  // columns: in-plane u, in-plane v, normal
};

Plane slanted_plane(const SurfaceRig& rig, const SurfaceLabel& label) {
    if (!(label.slant >= 0.0 && label.slant < 90.0)) throw ConfigError("slant must lie in [0, 90)");
    const double tilt = label.tilt * M_PI / 180.0, slant = label.slant * M_PI / 180.0;
    // Tilt direction in camera coordinates (y down, so counter-clockwise on screen).
    const Eigen::Vector3d hinge(std::sin(tilt), std::cos(tilt), 0.0);
    Plane p;
    p.point = Eigen::Vector3d(0.0, 0.0, rig.distance);
    p.frame = Eigen::AngleAxisd(-slant, hinge).toRotationMatrix();
    return p;
}

Eigen::Vector3d ray_through(const Camera& cam, const SurfaceRig& rig, double col, double row) {
    const double f = rig.focal_px();
    return cam.to_world * Eigen::Vector3d((col - rig.principal_x()) / f, (row - rig.principal_y()) / f, 1.0);
}

// Intersection parameter along `dir` from the camera center, or a
// non-positive value when the plane is behind the camera.
double intersect(const Camera& cam, const Plane& plane, const Eigen::Vector3d& dir) {
    const Eigen::Vector3d n = plane.frame.col(2);
    const double denom = n.dot(dir);
    if (std::abs(denom) < 1e-15) return -1.0;
    return n.dot(plane.point - cam.center) / denom;
}

Eigen::Vector2d project(const Camera& cam, const SurfaceRig& rig, const Eigen::Vector3d& world) {
    const Eigen::Vector3d c = cam.to_world.transpose() * (world - cam.center);
    const double f = rig.focal_px();
    return {f * c.x() / c.z() + rig.principal_x(), f * c.y() / c.z() + rig.principal_y()};
}

double sample_reflect(const Image& tex, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const int w = tex.width(), h = tex.height();
    auto at = [&](int r, int c) { return tex(reflect_index(r, h), reflect_index(c, w)); };
    return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) + fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

}  // namespace

StereoPair render_slanted_plane(const Image& texture, const SurfaceLabel& label, const SurfaceRig& rig) {
    if (rig.height < 1 || rig.width < 1 || !(rig.distance > 0.0) || !(rig.baseline >= 0.0))
        throw ConfigError("invalid surface rig");
    const Plane plane = slanted_plane(rig, label);
    const auto cams = verged_cameras(rig);
    const double texel = rig.distance / rig.focal_px() / rig.texels_per_pixel;  // m per texture px
    const double tcx = (texture.width() - 1) / 2.0, tcy = (texture.height() - 1) / 2.0;

    std::array<Image, 2> halves{Image(rig.height, rig.width), Image(rig.height, rig.width)};
    for (int i = 0; i < 2; ++i) {
        for (int r = 0; r < rig.height; ++r) {
            for (int c = 0; c < rig.width; ++c) {
                const Eigen::Vector3d dir = ray_through(cams[i], rig, c, r);
                const double t = intersect(cams[i], plane, dir);
                if (!(t > 0.0)) throw DataError("plane lies behind the camera");
                const Eigen::Vector3d local = plane.frame.transpose() * (cams[i].center + t * dir - plane.point);
                halves[i](r, c) = sample_reflect(texture, local.x() / texel + tcx, local.y() / texel + tcy);
            }
        }
    }
    return StereoPair(std::move(halves[0]), std::move(halves[1]));
}

PlaneDisparity plane_disparity(const SurfaceRig& rig, const SurfaceLabel& label, double left_x, double left_y) {
    const Plane plane = slanted_plane(rig, label);
    const auto cams = verged_cameras(rig);
    const Eigen::Vector3d dir = ray_through(cams[0], rig, left_x, left_y);
    const double t = intersect(cams[0], plane, dir);
    if (!(t > 0.0)) throw DataError("plane lies behind the camera");
    const Eigen::Vector2d right = project(cams[1], rig, cams[0].center + t * dir);
    return {left_x - right.x(), left_y - right.y()};
}

std::vector<double> slant_step_increments(const SurfaceRig& rig, const std::vector<double>& slants,
                                          double eccentricity) {
    std::vector<double> out;
    const double x = rig.principal_x() + eccentricity, y = rig.principal_y();
    for (std::size_t i = 1; i < slants.size(); ++i) {
        const double a = std::abs(plane_disparity(rig, {0.0, slants[i - 1]}, x, y).dx);
        const double b = std::abs(plane_disparity(rig, {0.0, slants[i]}, x, y).dx);
        out.push_back(b - a);
    }
    return out;
}

SurfaceRig calibrate_baseline(SurfaceRig rig, const std::vector<double>& slants, double eccentricity,
                              double target_px) {
    if (slants.size() < 2) throw ConfigError("calibration needs at least two slants");
    auto mean_step = [&](const SurfaceRig& r) {
        const auto inc = slant_step_increments(r, slants, eccentricity);
        return std::accumulate(inc.begin(), inc.end(), 0.0) / inc.size();
    };
    // Disparity is close to linear in the baseline; a few secant updates suffice.
    for (int it = 0; it < 20; ++it) {
        const double m = mean_step(rig);
        if (!(m > 0.0)) throw ConfigError("degenerate rig for calibration");
        if (std::abs(m - target_px) < 1e-12) break;
        rig.baseline *= target_px / m;
    }
    return rig;
}

std::vector<double> default_slant_steps() { return {6.0, 24.3, 38.2, 48.2, 55.2}; }

}  // namespace slca

namespace slca {

Scene make_layered_scene(const SceneConfig& cfg) {
    if (cfg.height < 1 || cfg.width < 1 || cfg.layers < 0) throw ConfigError("invalid scene size");
    if (!(cfg.min_disparity <= cfg.max_disparity) || !(cfg.min_size > 0.0 && cfg.min_size <= cfg.max_size && cfg.max_size <= 1.0))
        throw ConfigError("invalid scene ranges");
    struct Layer {
        double d;
        int top, left, h, w;  // left-view rectangle
        Image texture;
        int pad;
    };
    Rng rng(mix_seed(cfg.seed, 0x5ce9e));
    const double reach = std::max({std::abs(cfg.min_disparity), std::abs(cfg.max_disparity),
                                   std::abs(cfg.background_disparity)});
    const int pad = static_cast<int>(std::ceil(reach)) + 2;
    std::vector<Layer> layers;
    layers.push_back({cfg.background_disparity, 0, 0, cfg.height, cfg.width,
                      dead_leaves(cfg.height, cfg.width + 2 * pad, mix_seed(cfg.seed, 1)), pad});
    for (int i = 0; i < cfg.layers; ++i) {
        Layer l;
        l.d = rng.uniform(cfg.min_disparity, cfg.max_disparity);
        l.h = std::max(1, static_cast<int>(std::lround(rng.uniform(cfg.min_size, cfg.max_size) * cfg.height)));
        l.w = std::max(1, static_cast<int>(std::lround(rng.uniform(cfg.min_size, cfg.max_size) * cfg.width)));
        l.top = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.height - l.h + 1)));
        l.left = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.width - l.w + 1)));
        l.pad = pad;
        l.texture = dead_leaves(l.h, l.w + 2 * pad, mix_seed(cfg.seed, 2 + static_cast<std::uint64_t>(i)));
        layers.push_back(std::move(l));
    }
    // Larger crossed disparity is nearer; the background always stays behind.
    std::stable_sort(layers.begin() + 1, layers.end(), [](const Layer& a, const Layer& b) { return a.d < b.d; });

    Scene s{StereoPair(Image(cfg.height, cfg.width), Image(cfg.height, cfg.width)), Image(cfg.height, cfg.width),
            Image(cfg.height, cfg.width)};
    auto sample = [](const Image& t, int r, double x) {
        const int x0 = static_cast<int>(std::floor(x));
        const double fx = x - x0;
        const int w = t.width();
        const double v0 = t(r, std::clamp(x0, 0, w - 1)), v1 = t(r, std::clamp(x0 + 1, 0, w - 1));
        return fx == 0.0 ? v0 : (1 - fx) * v0 + fx * v1;
    };
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& l = layers[li];
        const bool background = li == 0;
        for (int r = l.top; r < l.top + l.h; ++r) {
            for (int c = 0; c < cfg.width; ++c) {
                // Left view: rectangle at [left, left + w).
                if (background || (c >= l.left && c < l.left + l.w)) {
                    s.pair.left(r, c) = sample(l.texture, r - l.top, c - l.left + l.pad);
                    s.truth_dx(r, c) = l.d;
                }
                // Right view: content shifted left by d, R(x) = L(x + d).
                const double xs = c + l.d;
                if (background || (xs >= l.left && xs < l.left + l.w))
                    s.pair.right(r, c) = sample(l.texture, r - l.top, xs - l.left + l.pad);
            }
        }
    }
    return s;
}

}  // namespace slca
