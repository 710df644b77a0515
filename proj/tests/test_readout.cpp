#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "slca/errors.hpp"
#include "slca/inference.hpp"
#include "slca/savgol.hpp"
#include "slca/scale_space.hpp"
#include "slca/textures.hpp"
#include "slca/tuning.hpp"
#include "test_util.hpp"

using namespace slca;

namespace {

// One row of dx labels.
LabelGrid line_grid(int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(i);
    return LabelGrid(LabelKind::Disparity, v, {0.0});
}

BinaryCode make_code(int K, int M, int N) {
    BinaryCode c;
    c.kernels = K;
    c.rows = M;
    c.cols = N;
    c.bits.assign(static_cast<std::size_t>(K) * M * N, 0);
    return c;
}

void set_bit(BinaryCode& c, int k, int m, int n, bool v = true) {
    c.bits[(static_cast<std::size_t>(k) * c.rows + m) * c.cols + n] = v ? 1 : 0;
}

// Shared maps with probability[k * L + y] given directly.
TuningMaps shared_maps(const LabelGrid& grid, int K, std::vector<double> prob, std::uint64_t obs = 1000) {
    TuningMaps t;
    t.mode = TuningMode::Shared;
    t.grid = grid;
    t.kernels = K;
    t.probability = std::move(prob);
    t.ones.assign(t.probability.size(), 0);
    t.observations.assign(grid.size(), obs);
    return t;
}

Eigen::MatrixXd poly_field(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double x = c * 0.3 - 1.0, y = r * 0.2 + 0.5;
            m(r, c) = 1.5 - 2 * x + 0.7 * y + x * x - 0.4 * x * y + 0.9 * y * y + 0.3 * x * x * x - 0.2 * x * x * y +
                      0.15 * x * y * y - 0.05 * y * y * y;
        }
    return m;
}

}  // namespace

TEST(TuningShared, ClampedCertaintiesAndHalf) {
    const LabelGrid grid = line_grid(2);
    auto acc = TuningAccumulator::shared(grid, 3, 0);
    for (int rep = 0; rep < 2; ++rep) {
        BinaryCode always = make_code(3, 4, 4);
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) {
                set_bit(always, 0, m, n);
                if ((m + n + rep) % 2 == 0) set_bit(always, 2, m, n);
            }
        acc.add(0, always);
        acc.add(1, make_code(3, 4, 4));
    }
    const TuningMaps t = acc.finalize();
    EXPECT_EQ(t.observations[0], 32u);
    const double eps = 1.0 / (2 * 32.0);
    EXPECT_DOUBLE_EQ(t.epsilon(0), eps);
    EXPECT_DOUBLE_EQ(t.p(0, 0), 1 - eps);
    EXPECT_DOUBLE_EQ(t.p(1, 0), eps);
    EXPECT_DOUBLE_EQ(t.p(2, 0), 0.5);
    EXPECT_DOUBLE_EQ(t.p(0, 1), eps);
    for (double p : t.probability) {
        EXPECT_GE(p, eps);
        EXPECT_LE(p, 1 - eps);
    }
}

TEST(TuningShared, MarginDiscardsBorderCells) {
    const LabelGrid grid = LabelGrid::disparity(0, 0, 1);
    auto acc = TuningAccumulator::shared(grid, 1, 1);
    BinaryCode c = make_code(1, 5, 5);
    for (int i = 0; i < 5; ++i) set_bit(c, 0, 0, i);  // top border only
    set_bit(c, 0, 2, 2);
    acc.add(0, c);
    const TuningMaps t = acc.finalize();
    EXPECT_EQ(t.observations[0], 9u);
    EXPECT_EQ(t.ones[0], 1u);
    EXPECT_THROW(TuningAccumulator::shared(grid, 1, 3).add(0, c), DataError);
}

TEST(TuningShared, PermutationInvariantAndMergeable) {
    const LabelGrid grid = line_grid(3);
    Rng rng(3);
    std::vector<std::pair<std::size_t, BinaryCode>> data;
    for (int i = 0; i < 30; ++i) {
        BinaryCode c = make_code(4, 6, 6);
        for (auto& b : c.bits) b = rng.uniform() < 0.3;
        data.emplace_back(i % 3, c);
    }
    auto a = TuningAccumulator::shared(grid, 4), b = TuningAccumulator::shared(grid, 4),
         b2 = TuningAccumulator::shared(grid, 4);
    for (const auto& [y, c] : data) a.add(y, c);
    for (std::size_t i = data.size(); i-- > 0;) (i % 2 ? b : b2).add(data[i].first, data[i].second);
    b.merge(b2);
    EXPECT_EQ(a.finalize().probability, b.finalize().probability);
}

TEST(TuningShared, MissingLabelIsAnError) {
    auto acc = TuningAccumulator::shared(line_grid(2), 1, 0);
    acc.add(0, make_code(1, 2, 2));
    EXPECT_THROW(acc.finalize(), DataError);
}

TEST(TuningPerLocation, UniformDataMatchesShared) {
    const LabelGrid grid = line_grid(2);
    Rng rng(5);
    std::vector<std::vector<BinaryCode>> codes(2);
    for (int y = 0; y < 2; ++y)
        for (int i = 0; i < 20; ++i) {
            BinaryCode c = make_code(3, 9, 9);
            std::vector<std::uint8_t> pattern(3);
            for (auto& p : pattern) p = rng.uniform() < (y ? 0.7 : 0.2);
            for (int k = 0; k < 3; ++k)
                for (int m = 0; m < 9; ++m)
                    for (int n = 0; n < 9; ++n) set_bit(c, k, m, n, pattern[k]);
            codes[y].push_back(c);
        }
    const TuningMaps s = estimate_tuning_shared(codes, grid, 0);
    const TuningMaps p = estimate_tuning_perloc(codes, grid);
    EXPECT_EQ(p.probability.size(), 3u * 49 * 2);
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < 7; ++r)
            for (int c = 0; c < 7; ++c)
                for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(p.p(p.entry(k, r, c), y), s.p(k, y), 1e-12);
}

TEST(TuningPerLocation, CenterOnlyActivity) {
    const LabelGrid grid = LabelGrid::disparity(0, 0, 1);
    std::vector<std::vector<BinaryCode>> codes(1);
    for (int i = 0; i < 10; ++i) {
        BinaryCode c = make_code(1, 9, 9);
        set_bit(c, 0, 4, 4);
        codes[0].push_back(c);
    }
    const TuningMaps t = estimate_tuning_perloc(codes, grid);
    EXPECT_EQ(region_origin(9, 7), 1);
    const double eps = 0.05;
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) EXPECT_DOUBLE_EQ(t.p(t.entry(0, r, c), 0), r == 3 && c == 3 ? 1 - eps : eps);
}

TEST(TuningPerLocation, SurfaceTableShape) {
    const LabelGrid grid = LabelGrid::default_surface();
    auto acc = TuningAccumulator::per_location(grid, 2, 7, 7);
    for (std::size_t y = 0; y < grid.size(); ++y) acc.add(y, make_code(2, 9, 9));
    EXPECT_EQ(acc.finalize().probability.size(), 2u * 7 * 7 * grid.size());
}

TEST(TuningIo, RoundTrip) {
    const auto dir = slca::testing::scratch_dir("tuning");
    const LabelGrid grid = line_grid(3);
    auto acc = TuningAccumulator::per_location(grid, 2, 3, 3);
    Rng rng(1);
    for (std::size_t y = 0; y < 3; ++y)
        for (int i = 0; i < 4; ++i) {
            BinaryCode c = make_code(2, 5, 5);
            for (auto& b : c.bits) b = rng.uniform() < 0.5;
            acc.add(y, c);
        }
    const TuningMaps t = acc.finalize();
    save_tuning(dir / "t.lcat", t, {{"stride", 8}});
    nlohmann::json meta;
    const TuningMaps back = load_tuning(dir / "t.lcat", &meta);
    EXPECT_EQ(back.probability, t.probability);
    EXPECT_EQ(back.ones, t.ones);
    EXPECT_EQ(back.observations, t.observations);
    EXPECT_EQ(back.grid, t.grid);
    EXPECT_EQ(back.mode, TuningMode::PerLocation);
    EXPECT_EQ(meta["stride"], 8);
}

TEST(SavitzkyGolay, ReproducesCubicsInInterior) {
    const Eigen::MatrixXd m = poly_field(12, 15);
    const Eigen::MatrixXd s = savitzky_golay_2d(m, 3, 5);
    for (int r = 2; r < 10; ++r)
        for (int c = 2; c < 13; ++c) EXPECT_NEAR(s(r, c), m(r, c), 1e-9);
}

TEST(SavitzkyGolay, ConstantUnchangedEverywhere) {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(7, 9, 0.42);
    const Eigen::MatrixXd s = savitzky_golay_2d(m, 3, 5);
    EXPECT_LT((s - m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SavitzkyGolay, ImpulseMatchesNormalEquations) {
    // Independent construction: least squares over monomials x^i y^j, i + j <= 3.
    Eigen::MatrixXd V(25, 10);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            int col = 0;
            for (int i = 0; i <= 3; ++i)
                for (int j = 0; i + j <= 3; ++j) V(r * 5 + c, col++) = std::pow(c - 2.0, i) * std::pow(r - 2.0, j);
        }
    const Eigen::MatrixXd H = (V.transpose() * V).ldlt().solve(V.transpose());
    const Eigen::MatrixXd kernel = savitzky_golay_kernel(3, 5);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) EXPECT_NEAR(kernel(r, c), H(0, r * 5 + c), 1e-12);

    Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(9, 9);
    impulse(4, 4) = 1.0;
    EXPECT_NEAR(savitzky_golay_2d(impulse, 3, 5)(4, 4), H(0, 12), 1e-12);
}

TEST(SavitzkyGolay, WrapTreatsColumnsAsPeriodic) {
    Eigen::MatrixXd m(6, 12);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 12; ++c) m(r, c) = std::cos(2 * M_PI * c / 12.0) + 0.1 * r;
    const Eigen::MatrixXd w = savitzky_golay_2d(m, 3, 5, true);
    // Column 0 is treated like any interior column of the periodic signal.
    Eigen::MatrixXd shifted(6, 12);
    for (int c = 0; c < 12; ++c) shifted.col(c) = m.col((c + 6) % 12);
    const Eigen::MatrixXd ws = savitzky_golay_2d(shifted, 3, 5, true);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 12; ++c) EXPECT_NEAR(ws(r, c), w(r, (c + 6) % 12), 1e-12);
}

TEST(SavitzkyGolay, BadWindowsRejected) {
    EXPECT_THROW(savitzky_golay_2d(Eigen::MatrixXd::Zero(5, 5), 3, 4), ConfigError);
    EXPECT_THROW(savitzky_golay_2d(Eigen::MatrixXd::Zero(5, 5), 5, 5), ConfigError);
}

TEST(Infer, UniformTuningTiesToFirstLabel) {
    const LabelGrid grid = LabelGrid::disparity(-1, 1, 1);
    const TuningMaps t = shared_maps(grid, 2, std::vector<double>(2 * 9, 0.5));
    const Posterior p = infer_block(std::vector<std::uint8_t>{1, 0, 1, 1, 0, 0, 1, 0}, t);
    for (double s : p.scores) EXPECT_DOUBLE_EQ(s, p.scores[0]);
    EXPECT_EQ(p.argmax, 0u);
    EXPECT_EQ(p.active_count, 4);
    BinaryCode c = make_code(2, 5, 6);
    set_bit(c, 1, 2, 2);
    const LabelMap lm = infer_map(c, t);
    EXPECT_EQ(lm.rows, 4);
    EXPECT_EQ(lm.cols, 5);
    for (auto l : lm.label) EXPECT_EQ(l, 0u);
}

TEST(Infer, MatchesProductFormOnToy) {
    const LabelGrid grid = line_grid(3);
    const int K = 2;
    Rng rng(11);
    std::vector<double> prob(K * 3);
    for (auto& p : prob) p = rng.uniform(0.05, 0.95);
    const TuningMaps t = shared_maps(grid, K, prob);
    for (int mask = 0; mask < 256; ++mask) {
        std::vector<std::uint8_t> bits(8);
        for (int i = 0; i < 8; ++i) bits[i] = (mask >> i) & 1;
        const Posterior post = infer_block(bits, t);
        std::vector<double> product(3, 1.0);
        for (int y = 0; y < 3; ++y)
            for (int i = 0; i < 8; ++i) {
                const double p = prob[(i / 4) * 3 + y];
                product[y] *= bits[i] ? p : 1 - p;
            }
        std::size_t best = 0;
        for (std::size_t y = 1; y < 3; ++y)
            if (product[y] > product[best]) best = y;
        EXPECT_EQ(post.argmax, best);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (std::abs(product[a] - product[b]) > 1e-12 * product[a]) {
                    EXPECT_EQ(product[a] > product[b], post.scores[a] > post.scores[b]);
                }
    }
}

TEST(Infer, PlantedLabelMonteCarlo) {
    const LabelGrid grid = LabelGrid::disparity(-2, 2, 1);  // 25 labels
    const int K = 12;
    Rng rng(21);
    std::vector<double> prob(K * grid.size());
    for (auto& p : prob) p = rng.uniform() < 0.5 ? 0.15 : 0.85;
    const TuningMaps t = shared_maps(grid, K, prob);
    const std::size_t truth = 13;
    int hits = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        std::vector<std::uint8_t> bits(K * 4);
        for (int i = 0; i < K * 4; ++i) bits[i] = rng.uniform() < prob[(i / 4) * grid.size() + truth];
        hits += infer_block(bits, t).argmax == truth;
    }
    EXPECT_GT(hits, 950);
}

TEST(Infer, ScoreMonotonicityInActiveBit) {
    const LabelGrid grid = line_grid(2);
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> prob(3 * 2);
        for (auto& p : prob) p = rng.uniform(0.01, 0.99);
        const TuningMaps t = shared_maps(grid, 3, prob);
        std::vector<std::uint8_t> bits(12);
        for (auto& b : bits) b = rng.uniform() < 0.5;
        const int i = static_cast<int>(rng.below(12));
        bits[i] = 0;
        const Posterior off = infer_block(bits, t);
        bits[i] = 1;
        const Posterior on = infer_block(bits, t);
        const bool favors_a = prob[(i / 4) * 2 + 0] > prob[(i / 4) * 2 + 1];
        const double before = off.scores[0] - off.scores[1], after = on.scores[0] - on.scores[1];
        if (favors_a) {
            EXPECT_GE(after, before);
        } else {
            EXPECT_LE(after, before);
        }
    }
}

TEST(Infer, AllBlocksGiveFiniteScores) {
    const LabelGrid grid = line_grid(2);
    auto acc = TuningAccumulator::shared(grid, 2, 0);
    BinaryCode on = make_code(2, 2, 2);
    for (auto& b : on.bits) b = 1;
    acc.add(0, on);
    acc.add(1, make_code(2, 2, 2));
    const TuningMaps t = acc.finalize();
    for (int mask = 0; mask < 256; ++mask) {
        std::vector<std::uint8_t> bits(8);
        for (int i = 0; i < 8; ++i) bits[i] = (mask >> i) & 1;
        for (double s : infer_block(bits, t).scores) EXPECT_TRUE(std::isfinite(s));
    }
}

TEST(Infer, ModeMismatchRejected) {
    const LabelGrid grid = LabelGrid::disparity(0, 0, 1);
    auto perloc = TuningAccumulator::per_location(grid, 1, 1, 1);
    perloc.add(0, make_code(1, 3, 3));
    const TuningMaps p = perloc.finalize();
    EXPECT_THROW(infer(make_code(1, 3, 3), 0, 0, p), ConfigError);
    const TuningMaps s = shared_maps(grid, 1, {0.5});
    EXPECT_THROW(infer_surface(make_code(1, 3, 3), s), ConfigError);
}

TEST(InferSurface, UniformTiesAndPlantedDraws) {
    const LabelGrid grid = LabelGrid::surface({0, 90, 180, 270}, {0, 30});
    const int K = 3;
    TuningMaps t;
    t.mode = TuningMode::PerLocation;
    t.grid = grid;
    t.kernels = K;
    t.region_rows = t.region_cols = 7;
    t.observations.assign(grid.size(), 100);
    t.probability.assign(static_cast<std::size_t>(K) * 49 * grid.size(), 0.5);
    BinaryCode c = make_code(K, 9, 9);
    set_bit(c, 1, 4, 4);
    EXPECT_EQ(infer_surface(c, t).argmax, 0u);

    Rng rng(41);
    for (auto& p : t.probability) p = rng.uniform(0.1, 0.9);
    const std::size_t truth = 6;
    int hits = 0;
    for (int draw = 0; draw < 500; ++draw) {
        BinaryCode d = make_code(K, 9, 9);
        for (int k = 0; k < K; ++k)
            for (int r = 0; r < 7; ++r)
                for (int cc = 0; cc < 7; ++cc) set_bit(d, k, 1 + r, 1 + cc, rng.uniform() < t.p(t.entry(k, r, cc), truth));
        hits += infer_surface(d, t).argmax == truth;
    }
    EXPECT_GT(hits, 450);
}

TEST(SmoothTuning, KeepsClampAndFlag) {
    const LabelGrid grid = LabelGrid::surface({0, 60, 120, 180, 240, 300}, {0, 10, 20, 30, 40});
    auto acc = TuningAccumulator::per_location(grid, 1, 1, 1);
    Rng rng(2);
    for (std::size_t y = 0; y < grid.size(); ++y)
        for (int i = 0; i < 3; ++i) {
            BinaryCode c = make_code(1, 1, 1);
            c.bits[0] = rng.uniform() < 0.5;
            acc.add(y, c);
        }
    const TuningMaps s = smooth_tuning(acc.finalize());
    EXPECT_TRUE(s.smoothed);
    for (std::size_t y = 0; y < grid.size(); ++y) {
        EXPECT_GE(s.p(0, y), s.epsilon(y));
        EXPECT_LE(s.p(0, y), 1 - s.epsilon(y));
    }
}

TEST(ScaleSpace, ConfigErrorsAndCellAverage) {
    const Dictionary d = Dictionary::random(2, 16, 8, 1);
    const TuningMaps t = shared_maps(LabelGrid::disparity(0, 0, 1), 2, {0.5, 0.5});
    const StereoPair scene(Image(32, 32), Image(32, 32));
    ScaleSpaceConfig cfg;
    cfg.scales = {};
    EXPECT_THROW(scale_space_infer(scene, d, t, cfg), ConfigError);
    cfg.scales = {0.5, 1.0};
    EXPECT_THROW(scale_space_infer(scene, d, t, cfg), ConfigError);

    Image img(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) img(r, c) = r < 8 ? 1.0 : 3.0;
    const Image avg = cell_average(img, 2, 2, 8);
    EXPECT_DOUBLE_EQ(avg(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(avg(1, 0), 3.0);
}

TEST(ScaleSpace, ZeroTextureSceneIsMasked) {
    const Dictionary d = Dictionary::random(4, 16, 8, 1);
    const TuningMaps t = shared_maps(LabelGrid::disparity(-1, 1, 1), 4, std::vector<double>(4 * 9, 0.3));
    ScaleSpaceConfig cfg;
    cfg.scales = {1.0, 0.5};
    const ScaleSpaceResult r = scale_space_infer(StereoPair(Image(64, 64, 0.5), Image(64, 64, 0.5)), d, t, cfg);
    EXPECT_EQ(r.rows, 8);
    EXPECT_EQ(r.cols, 8);
    for (std::size_t i = 0; i < r.dx.size(); ++i) {
        EXPECT_TRUE(r.masked(i));
        EXPECT_EQ(r.active_count[i], 0);
    }
}
