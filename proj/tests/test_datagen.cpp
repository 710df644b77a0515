#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>

#include "slca/errors.hpp"
#include "slca/geometry.hpp"
#include "slca/labels.hpp"
#include "slca/stimuli.hpp"
#include "slca/textures.hpp"
#include "test_util.hpp"

using namespace slca;
using slca::testing::max_abs_diff;
using slca::testing::random_image;

namespace {

// Integer shift maximizing the normalized correlation of right(x) with left(x + d),
// evaluated on rows/cols away from the border.
int best_horizontal_shift(const Image& left, const Image& right, int max_shift) {
    int best = 0;
    double best_score = -1e300;
    for (int d = -max_shift; d <= max_shift; ++d) {
        double s = 0.0;
        for (int r = 0; r < left.height(); ++r)
            for (int c = max_shift; c < left.width() - max_shift; ++c) s += right(r, c) * left(r, c + d);
        if (s > best_score) {
            best_score = s;
            best = d;
        }
    }
    return best;
}

// Sub-pixel horizontal disparity at (row, col): left(x) matches right(x - d).
double probe_disparity(const StereoPair& p, int row, int col, int half = 6, double range = 4.0) {
    double best_d = 0.0, best = 1e300;
    for (double d = -range; d <= range + 1e-12; d += 0.01) {
        double s = 0.0;
        for (int r = row - half; r <= row + half; ++r)
            for (int c = col - half; c <= col + half; ++c) {
                const double x = c - d;
                const int x0 = static_cast<int>(std::floor(x));
                const double fx = x - x0;
                const double v = (1 - fx) * p.right(r, x0) + fx * p.right(r, x0 + 1);
                s += (p.left(r, c) - v) * (p.left(r, c) - v);
            }
        if (s < best) {
            best = s;
            best_d = d;
        }
    }
    return best_d;
}

Image smooth_texture(int n, std::uint64_t seed) { return octave_noise(n, n, seed, 1.5); }

}  // namespace

TEST(ListingRotation, IdentityAtPrincipalPoint) {
    const auto r = listing_rotation({10, 20}, {10, 20}, 1400);
    EXPECT_EQ(r.angle, 0.0);
    EXPECT_TRUE(r.matrix.isApprox(Eigen::Matrix3d::Identity(), 0.0));
}

TEST(ListingRotation, OrthonormalWithInPlaneAxis) {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const Point2 s{rng.uniform(-800, 800), rng.uniform(-800, 800)};
        const auto r = listing_rotation(s, {0, 0}, rng.uniform(100, 3000));
        EXPECT_LT((r.matrix.transpose() * r.matrix - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(r.matrix.determinant(), 1.0, 1e-12);
        EXPECT_EQ(r.axis.z(), 0.0);
        EXPECT_NEAR(r.axis.x() * s.x + r.axis.y() * s.y, 0.0, 1e-9);
    }
}

TEST(ListingRotation, MatchesAxisAngleOracle) {
    const Point2 p{320, 240};
    const Point2 s{420, 240};
    const auto r = listing_rotation(s, p, 1400);
    EXPECT_NEAR(r.angle, std::atan(100.0 / 1400.0), 1e-15);
    EXPECT_NEAR(r.angle, 0.07130, 1e-5);
    const Eigen::Matrix3d oracle = Eigen::AngleAxisd(r.angle, r.axis).toRotationMatrix();
    EXPECT_LT((oracle - r.matrix).cwiseAbs().maxCoeff(), 1e-14);
    // Perpendicular to the displacement (100, 0).
    EXPECT_NEAR(std::abs(r.axis.y()), 1.0, 1e-15);
}

TEST(ListingRotation, MapsFixationOntoPrincipalPoint) {
    CameraIntrinsics K{1400, 1400, 320, 240};
    const Point2 s{500, 130};
    const auto r = listing_rotation(s, {K.px, K.py}, K.fx);
    const Eigen::Vector3d x = K.matrix() * r.matrix * K.matrix().inverse() * Eigen::Vector3d(s.x, s.y, 1);
    EXPECT_NEAR(x.x() / x.z(), K.px, 1e-9);
    EXPECT_NEAR(x.y() / x.z(), K.py, 1e-9);
}

TEST(HomographyWarp, IdentityIsExact) {
    const Image img = random_image(20, 30, 1);
    const auto w = homography_warp(img, CameraIntrinsics{50, 50, 14.5, 9.5}, Eigen::Matrix3d::Identity());
    EXPECT_EQ(w.image, img);
    for (auto v : w.valid) EXPECT_EQ(v, 1);
}

TEST(HomographyWarp, RoundTripPsnr) {
    const Image img = smooth_texture(128, 3);
    const CameraIntrinsics K{300, 300, 63.5, 63.5};
    const auto R = listing_rotation({80, 70}, {K.px, K.py}, K.fx).matrix;
    const Image back = homography_warp(homography_warp(img, K, R).image, K, R.transpose()).image;
    double se = 0.0;
    int n = 0;
    for (int r = 32; r < 96; ++r)
        for (int c = 32; c < 96; ++c, ++n) se += std::pow(back(r, c) - img(r, c), 2);
    EXPECT_GT(10.0 * std::log10(1.0 / (se / n)), 30.0);
}

TEST(HomographyWarp, QuarterTurnAboutOpticalAxis) {
    const int n = 17;
    const Image img = random_image(n, n, 8);
    const CameraIntrinsics K{40, 40, (n - 1) / 2.0, (n - 1) / 2.0};
    const Eigen::Matrix3d R = Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const Image out = homography_warp(img, K, R).image;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) EXPECT_NEAR(out(r, c), img(n - 1 - c, r), 1e-9);
}

TEST(HomographyWarp, RejectsNonRotation) {
    Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
    S(0, 0) = 1.1;
    EXPECT_THROW(homography_warp(Image(4, 4), CameraIntrinsics{}, S), ConfigError);
}

TEST(VirtualFixation, CenterFixationIsCenterCrop) {
    const Image l = random_image(64, 64, 1), r = random_image(64, 64, 2);
    const CameraIntrinsics K{200, 200, 31.5, 31.5};
    FixationConfig cfg;
    cfg.crop_height = cfg.crop_width = 32;
    const StereoPair out = make_virtual_fixation(StereoPair(l, r), {31.5, 31.5}, {31.5, 31.5}, K, cfg);
    EXPECT_EQ(out.left, l.crop(16, 16, 32, 32));
    EXPECT_EQ(out.right, r.crop(16, 16, 32, 32));
}

TEST(VirtualFixation, AngleBudget) {
    const CameraIntrinsics K{1400, 1400, 255.5, 255.5};
    EXPECT_NEAR(listing_rotation({355.5, 255.5}, {K.px, K.py}, K.fx).angle * 180 / M_PI, 4.09, 0.01);
    const StereoPair big(smooth_texture(512, 1), smooth_texture(512, 2));
    FixationConfig cfg;
    cfg.crop_height = cfg.crop_width = 128;
    EXPECT_NO_THROW(make_virtual_fixation(big, {355.5, 255.5}, {355.5, 255.5}, K, cfg));

    // 21.8 degrees with a short focal length.
    const CameraIntrinsics wide{100, 100, 255.5, 255.5};
    EXPECT_THROW(make_virtual_fixation(big, {295.5, 255.5}, {255.5, 255.5}, wide, cfg), DataError);
    EXPECT_THROW(make_virtual_fixation(big, {600, 10}, {255.5, 255.5}, K, cfg), DataError);
}

TEST(ShiftedPair, ZeroDisparityHalvesIdentical) {
    const Image src = random_image(100, 100, 3);
    const StereoPair p = make_shifted_pair(src, {0, 0}, 64, 9);
    EXPECT_EQ(p.left, p.right);
    EXPECT_EQ(p.height(), 32);
}

TEST(ShiftedPair, VerticalEdgeShiftsByDisparity) {
    Image src(80, 120);
    for (int r = 0; r < 80; ++r)
        for (int c = 0; c < 120; ++c) src(r, c) = (c / 7) % 2 == 0 ? 0.0 : 1.0;  // vertical bars
    for (int c = 0; c < 120; ++c)  // break periodicity so the correlation peak is unique
        for (int r = 0; r < 80; ++r) src(r, c) += 0.3 * std::sin(0.05 * c * c);
    const StereoPair p = make_shifted_pair(src, {2, 0}, 64, 5);
    // Positive dx: right content shifted left, right(x) = left(x + 2).
    EXPECT_EQ(best_horizontal_shift(p.left, p.right, 5), 2);
    const StereoPair q = make_shifted_pair(src, {-1.5, 0}, 64, 5);
    EXPECT_EQ(best_horizontal_shift(q.left, q.right, 5), -1);  // -1.5 rounds toward the nearer integer peak
}

TEST(ShiftedPair, ExactShiftOnIntegerLabels) {
    const Image src = random_image(90, 90, 21);
    const StereoPair p = make_shifted_pair(src, {1, -2}, 64, 17);
    // Downscaled crops at offsets 2 px source = 1 px output: right(r, c) = left(r - 2, c + 1).
    for (int r = 4; r < 28; ++r)
        for (int c = 2; c < 28; ++c) EXPECT_NEAR(p.right(r, c), p.left(r - 2, c + 1), 1e-12);
}

TEST(ShiftedPair, SeedReproducibleAndErrors) {
    const Image src = random_image(90, 90, 21);
    EXPECT_EQ(make_shifted_pair(src, {1.5, 0.5}, 64, 4), make_shifted_pair(src, {1.5, 0.5}, 64, 4));
    EXPECT_THROW(make_shifted_pair(src, {0.25, 0}, 64, 4), ConfigError);
    EXPECT_THROW(make_shifted_pair(src, {20, 0}, 64, 4), DataError);
}

TEST(LabelGridTest, DefaultDisparityHas625Labels) {
    const LabelGrid g = LabelGrid::default_disparity();
    EXPECT_EQ(g.size(), 625u);
    EXPECT_EQ(g.label(0), (std::array<double, 2>{-6, -6}));
    EXPECT_EQ(g.label(1), (std::array<double, 2>{-5.5, -6}));
    EXPECT_EQ(g.index_of({0, 0}), 312u);
    EXPECT_THROW(g.index_of({0.25, 0}), ConfigError);
}

TEST(LabelGridTest, SurfaceGridAndJson) {
    const LabelGrid g = LabelGrid::default_surface();
    EXPECT_EQ(g.cols(), 36);
    EXPECT_EQ(g.rows(), 6);
    EXPECT_EQ(g.surface_label(37).tilt, 10.0);
    EXPECT_EQ(g.surface_label(37).slant, 6.0);
    EXPECT_EQ(LabelGrid::from_json(g.to_json()), g);
    EXPECT_THROW(LabelGrid::surface({0, 400}, {0}), ConfigError);
    EXPECT_THROW(LabelGrid::disparity(-1, 1, 0.3), ConfigError);
}

TEST(SlantedPlane, FrontoParallelZeroDisparityAtFixation) {
    SurfaceRig rig;
    rig.height = rig.width = 96;
    const Image tex = smooth_texture(400, 5);
    const StereoPair p = render_slanted_plane(tex, {0, 0}, rig);
    EXPECT_NEAR(plane_disparity(rig, {0, 0}, rig.principal_x(), rig.principal_y()).dx, 0.0, 1e-12);
    EXPECT_NEAR(probe_disparity(p, 48, 48), 0.0, 0.05);
    // Mirror symmetry: left(r, c) equals right(r, W-1-c) for a mirror-symmetric texture.
    Image sym = tex;
    for (int r = 0; r < tex.height(); ++r)
        for (int c = 0; c < tex.width(); ++c) sym(r, c) = 0.5 * (tex(r, c) + tex(r, tex.width() - 1 - c));
    const StereoPair q = render_slanted_plane(sym, {0, 0}, rig);
    for (int r = 0; r < 96; r += 5)
        for (int c = 0; c < 96; c += 5) EXPECT_NEAR(q.left(r, c), q.right(r, 95 - c), 1e-9);
}

TEST(SlantedPlane, CalibratedStepIsOnePixel) {
    const SurfaceRig rig = calibrate_baseline(SurfaceRig{}, default_slant_steps());
    for (double inc : slant_step_increments(rig, default_slant_steps())) EXPECT_NEAR(inc, 1.0, 0.25);
}

TEST(SlantedPlane, TiltHalfTurnNegatesDisparity) {
    const SurfaceRig rig = calibrate_baseline(SurfaceRig{}, default_slant_steps());
    const double cx = rig.principal_x(), cy = rig.principal_y();
    for (double tilt : {0.0, 40.0, 110.0})
        for (double e : {-10.0, 10.0}) {
            const double a = plane_disparity(rig, {tilt, 38.2}, cx + e, cy).dx;
            const double b = plane_disparity(rig, {tilt + 180.0, 38.2}, cx + e, cy).dx;
            // Negation holds to first order; perspective adds a few tenths.
            if (std::abs(a) > 0.5) {
                EXPECT_LT(a * b, 0.0) << tilt << " " << e;
            }
            EXPECT_NEAR(a, -b, 0.5) << tilt << " " << e;
        }
}

TEST(SlantedPlane, MirrorSwapsEyes) {
    // Reflecting x maps tilt t to 180 - t and swaps the eyes, so the point seen
    // at left x in one plane is seen at the mirrored right x in the other.
    const SurfaceRig rig = calibrate_baseline(SurfaceRig{}, default_slant_steps());
    const double cx = rig.principal_x(), cy = rig.principal_y();
    for (double tilt : {0.0, 40.0, 110.0})
        for (double e : {-10.0, 10.0}) {
            const PlaneDisparity d = plane_disparity(rig, {tilt, 38.2}, cx + e, cy + 3.0);
            const double xr = cx + e - d.dx, yr = cy + 3.0 - d.dy;
            const PlaneDisparity m = plane_disparity(rig, {180.0 - tilt + 360.0, 38.2}, 2 * cx - xr, yr);
            EXPECT_NEAR(m.dx, d.dx, 1e-9) << tilt << " " << e;
            EXPECT_NEAR(m.dy, -d.dy, 1e-9) << tilt << " " << e;
        }
}

TEST(SlantedPlane, RenderedProbeMatchesClosedForm) {
    SurfaceRig rig;
    rig.height = rig.width = 128;
    rig = calibrate_baseline(rig, default_slant_steps());
    const Image tex = smooth_texture(500, 6);
    // Small window: a wide one averages over the disparity gradient.
    for (double slant : {24.3, 48.2}) {
        const SurfaceLabel lab{0, slant};
        const StereoPair p = render_slanted_plane(tex, lab, rig);
        for (int e : {-10, 10}) {
            const int col = static_cast<int>(rig.principal_x() + 0.5) + e, row = static_cast<int>(rig.principal_y() + 0.5);
            EXPECT_NEAR(probe_disparity(p, row, col, 2), plane_disparity(rig, lab, col, row).dx, 0.2) << slant;
        }
    }
    EXPECT_THROW(render_slanted_plane(tex, {0, 90}, rig), ConfigError);
}

TEST(LayeredScene, TruthMatchesRightView) {
    SceneConfig cfg;
    cfg.height = cfg.width = 96;
    cfg.layers = 2;
    cfg.min_disparity = 3;
    cfg.max_disparity = 3;
    cfg.seed = 4;
    const Scene s = make_layered_scene(cfg);
    // R(x) = L(x + d) wherever the same uniform-disparity surface covers both.
    int checked = 0;
    for (int r = 0; r < 96; ++r)
        for (int c = 0; c + 3 < 96; ++c)
            if (s.truth_dx(r, c + 3) == 3.0 && (c == 0 || s.truth_dx(r, c + 2) == 3.0)) {
                EXPECT_NEAR(s.pair.right(r, c), s.pair.left(r, c + 3), 1e-12);
                ++checked;
            }
    EXPECT_GT(checked, 100);
    for (double v : s.truth_dy.values()) EXPECT_EQ(v, 0.0);
}

TEST(Textures, DeterministicAndInRange) {
    const Image a = dead_leaves(64, 48, 7), b = dead_leaves(64, 48, 7), c = dead_leaves(64, 48, 8);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (double v : a.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    const Image n = octave_noise(50, 70, 3);
    EXPECT_EQ(n, octave_noise(50, 70, 3));
    EXPECT_NEAR(*std::min_element(n.values().begin(), n.values().end()), 0.0, 1e-12);
    EXPECT_NEAR(*std::max_element(n.values().begin(), n.values().end()), 1.0, 1e-12);
    EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}
