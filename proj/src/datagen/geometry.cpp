#include "slca/geometry.hpp"

#include <cmath>

#include "slca/errors.hpp"

namespace slca {

Eigen::Matrix3d CameraIntrinsics::matrix() const {
    Eigen::Matrix3d K;
    K << fx, 0.0, px, 0.0, fy, py, 0.0, 0.0, 1.0;
    return K;
}

ListingRotation listing_rotation(Point2 s, Point2 p, double focal) {
    if (!(focal > 0.0)) throw ConfigError("focal length must be positive");
    const double dx = s.x - p.x;
    const double dy = s.y - p.y;
    const double r = std::hypot(dx, dy);
    ListingRotation out;
    if (r == 0.0) return out;

    // Axis in the image plane, perpendicular to (dx, dy).
    const double ux = dy / r;
    const double uy = -dx / r;
    const double theta = std::atan(r / focal);
    const double c = std::cos(theta), sn = std::sin(theta), v = 1.0 - c;
    out.axis = {ux, uy, 0.0};
    out.angle = theta;
    out.matrix << c + ux * ux * v, ux * uy * v, uy * sn,
                  ux * uy * v, c + uy * uy * v, -ux * sn,
                  -uy * sn, ux * sn, c;
    return out;
}

namespace {

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace

WarpResult homography_warp(const Image& img, const CameraIntrinsics& K, const Eigen::Matrix3d& R) {
    if (!((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6) ||
        !(std::abs(R.determinant() - 1.0) < 1e-6))
        throw ConfigError("homography_warp requires a rotation matrix");
    const Eigen::Matrix3d Km = K.matrix();
    const Eigen::Matrix3d inverse_map = Km * R.transpose() * Km.inverse();

    const int h = img.height(), w = img.width();
    WarpResult out{Image(h, w), std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, 0)};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const Eigen::Vector3d src = inverse_map * Eigen::Vector3d(c, r, 1.0);
            if (!(src.z() > 0.0)) continue;
            const double x = snap(src.x() / src.z());
            const double y = snap(src.y() / src.z());
            if (x < 0.0 || y < 0.0 || x > w - 1 || y > h - 1) continue;
            const int x0 = std::min(static_cast<int>(x), w - 1), y0 = std::min(static_cast<int>(y), h - 1);
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            const double fx = x - x0, fy = y - y0;
            const double top = fx == 0.0 ? img(y0, x0) : (1.0 - fx) * img(y0, x0) + fx * img(y0, x1);
            const double bottom = fx == 0.0 ? img(y1, x0) : (1.0 - fx) * img(y1, x0) + fx * img(y1, x1);
            out.image(r, c) = fy == 0.0 ? top : (1.0 - fy) * top + fy * bottom;
            out.valid[static_cast<std::size_t>(r) * w + c] = 1;
        }
    }
    return out;
}

StereoPair make_virtual_fixation(const StereoPair& pair, Point2 fix_left, Point2 fix_right,
                                 const CameraIntrinsics& K, const FixationConfig& cfg) {
    if (!(cfg.downscale > 0.0) || cfg.downscale > 1.0) throw ConfigError("fixation downscale must lie in (0, 1]");
    const int h = pair.height(), w = pair.width();
    auto inside = [&](Point2 q) { return q.x >= 0 && q.y >= 0 && q.x <= w - 1 && q.y <= h - 1; };
    if (!inside(fix_left) || !inside(fix_right)) throw DataError("fixation point outside the image");

    const Point2 principal{K.px, K.py};
    const double focal = 0.5 * (K.fx + K.fy);
    const double max_angle = cfg.max_angle_deg * M_PI / 180.0;

    auto process = [&](const Image& half, Point2 fix) {
        const ListingRotation rot = listing_rotation(fix, principal, focal);
        if (rot.angle > max_angle) throw DataError("virtual rotation exceeds the angle budget");
        WarpResult warped = homography_warp(half, K, rot.matrix);
        Image mask(h, w);
        for (std::size_t i = 0; i < warped.valid.size(); ++i) mask.values()[i] = warped.valid[i];
        Image img = std::move(warped.image);
        double px = principal.x, py = principal.y;
        if (cfg.downscale < 1.0) {
            img = downscale(img, cfg.downscale, cfg.method);
            mask = downscale(mask, cfg.downscale, Interpolation::Bilinear);
            px = (px + 0.5) * img.width() / w - 0.5;
            py = (py + 0.5) * img.height() / h - 0.5;
        }
        const int top = static_cast<int>(std::lround(py - (cfg.crop_height - 1) / 2.0));
        const int left = static_cast<int>(std::lround(px - (cfg.crop_width - 1) / 2.0));
        if (top < 0 || left < 0 || top + cfg.crop_height > img.height() || left + cfg.crop_width > img.width())
            throw DataError("fixation crop exceeds the image");
        const Image crop_mask = mask.crop(top, left, cfg.crop_height, cfg.crop_width);
        for (double v : crop_mask.values())
            if (v < 1.0 - 1e-9) throw DataError("fixation crop exceeds the valid warped region");
        return img.crop(top, left, cfg.crop_height, cfg.crop_width);
    };
    return StereoPair(process(pair.left, fix_left), process(pair.right, fix_right));
}

}  // namespace slca
