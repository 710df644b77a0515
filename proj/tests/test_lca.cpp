#include <gtest/gtest.h>

#include <cmath>

#include "slca/dictionary.hpp"
#include "slca/errors.hpp"
#include "slca/filters.hpp"
#include "slca/learn.hpp"
#include "slca/lca.hpp"
#include "test_util.hpp"

using namespace slca;
using slca::testing::random_image;

namespace {

// Direct stamping oracle: add the kernel pair at coefficient (m, n).
void stamp(StereoPair& p, const Dictionary& d, int k, int m, int n, double a) {
    const CodeGeometry g = CodeGeometry::for_image(p.height(), p.width(), d.kernel_size(), d.stride());
    const Image l = d.left(k), r = d.right(k);
    for (int i = 0; i < d.kernel_size(); ++i)
        for (int j = 0; j < d.kernel_size(); ++j) {
            const int y = g.top(m) + i, x = g.left(n) + j;
            if (y < 0 || x < 0 || y >= p.height() || x >= p.width()) continue;
            p.left(y, x) += a * l(i, j);
            p.right(y, x) += a * r(i, j);
        }
}

StereoPair random_pair(int h, int w, std::uint64_t seed) {
    return normalize_pair(StereoPair(random_image(h, w, seed, -1, 1), random_image(h, w, seed + 1000, -1, 1))).pair;
}

}  // namespace

TEST(Threshold, HardNonNegative) {
    EXPECT_EQ(threshold(0.0, 0.0), 0.0);
    EXPECT_EQ(threshold(0.0, 0.3), 0.0);
    EXPECT_EQ(threshold(0.5, 0.1), 0.5);
    EXPECT_EQ(threshold(0.09, 0.1), 0.0);
    EXPECT_EQ(threshold(0.1, 0.1), 0.0);
    EXPECT_EQ(threshold(-2.0, 0.1), 0.0);
}

TEST(DictionaryTest, RandomIsJointlyNormalized) {
    const Dictionary d = Dictionary::random(20, 16, 8, 3);
    EXPECT_LT(d.max_norm_error(), 1e-9);
    EXPECT_EQ(d.weights().rows(), 512);
    EXPECT_EQ(Dictionary::random(20, 16, 8, 3).weights(), d.weights());
    EXPECT_THROW(Dictionary(3, 16, 5), ConfigError);
}

TEST(DictionaryTest, KernelCountsForOvercompleteness) {
    EXPECT_EQ(kernels_for_overcompleteness(0.66), 85);
    EXPECT_EQ(kernels_for_overcompleteness(1), 128);
    EXPECT_EQ(kernels_for_overcompleteness(3), 384);
    EXPECT_EQ(kernels_for_overcompleteness(8), 1024);
    EXPECT_EQ(kernels_for_overcompleteness(16), 2048);
}

TEST(DictionaryTest, SaveLoadRoundTrip) {
    const auto dir = slca::testing::scratch_dir("dict");
    const Dictionary d = Dictionary::random(5, 16, 8, 9);
    save_dictionary(dir / "d64.lcat", d, {{"note", "x"}}, true);
    nlohmann::json meta;
    const Dictionary back = load_dictionary(dir / "d64.lcat", &meta);
    EXPECT_EQ(back.weights(), d.weights());
    EXPECT_EQ(meta["stride"], 8);
    EXPECT_EQ(meta["note"], "x");
    save_dictionary(dir / "d32.lcat", d);
    const Dictionary f = load_dictionary(dir / "d32.lcat");
    EXPECT_LT(f.max_norm_error(), 1e-9);
    EXPECT_LT((f.weights() - d.weights()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Geometry, LayoutCoversEveryPixelFourTimes) {
    const CodeGeometry g = CodeGeometry::for_image(64, 48, 16, 8);
    EXPECT_EQ(g.rows, 9);
    EXPECT_EQ(g.cols, 7);
    EXPECT_EQ(g.top(0), -8);
    std::vector<int> cover(64 * 48, 0);
    for (int m = 0; m < g.rows; ++m)
        for (int n = 0; n < g.cols; ++n)
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j) {
                    const int y = g.top(m) + i, x = g.left(n) + j;
                    if (y >= 0 && x >= 0 && y < 64 && x < 48) ++cover[y * 48 + x];
                }
    for (int c : cover) EXPECT_EQ(c, 4);
    EXPECT_THROW(CodeGeometry::for_image(60, 64, 16, 8), DataError);
}

TEST(Reconstruct, ZeroCodeGivesZeroPair) {
    const Dictionary d = Dictionary::random(4, 16, 8, 1);
    const CodeState c(CodeGeometry::for_image(32, 32, 16, 8), 4);
    const StereoPair r = reconstruct(d, c);
    EXPECT_EQ(r.squared_norm(), 0.0);
}

TEST(Reconstruct, SingleAndOverlappingCoefficientsMatchStamping) {
    const Dictionary d = Dictionary::random(3, 16, 8, 2);
    const CodeGeometry g = CodeGeometry::for_image(40, 40, 16, 8);
    CodeState c(g, 3);
    c.activation(1, 2, 2) = 1.0;
    StereoPair oracle(Image(40, 40), Image(40, 40));
    stamp(oracle, d, 1, 2, 2, 1.0);
    StereoPair r = reconstruct(d, c);
    EXPECT_LT(slca::testing::max_abs_diff(r.left, oracle.left), 1e-14);
    EXPECT_LT(slca::testing::max_abs_diff(r.right, oracle.right), 1e-14);

    c.activation(2, 2, 3) = 0.7;  // overlaps the first in an 8 px band
    c.activation(0, 0, 0) = 0.4;  // clipped at the border
    stamp(oracle, d, 2, 2, 3, 0.7);
    stamp(oracle, d, 0, 0, 0, 0.4);
    r = reconstruct(d, c);
    EXPECT_LT(slca::testing::max_abs_diff(r.left, oracle.left), 1e-14);
    EXPECT_LT(slca::testing::max_abs_diff(r.right, oracle.right), 1e-14);
}

TEST(Reconstruct, AdjointOfCorrelation) {
    const Dictionary d = Dictionary::random(6, 16, 8, 4);
    const CodeGeometry g = CodeGeometry::for_image(48, 40, 16, 8);
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        CodeState c(g, 6);
        for (int i = 0; i < c.a.size(); ++i) c.a.data()[i] = rng.normal();
        const StereoPair img(random_image(48, 40, trial, -1, 1), random_image(48, 40, trial + 50, -1, 1));
        const StereoPair r = reconstruct(d, c);
        double lhs = 0.0;
        for (std::size_t i = 0; i < r.left.size(); ++i)
            lhs += r.left.values()[i] * img.left.values()[i] + r.right.values()[i] * img.right.values()[i];
        const Eigen::MatrixXd corr = extract_patches(img, g).transpose() * d.weights();
        const double rhs = (corr.array() * c.a.array()).sum();
        EXPECT_NEAR(lhs, rhs, 1e-6 * std::abs(lhs));
    }
}

TEST(Patches, AccumulateIsAdjointOfExtract) {
    const CodeGeometry g = CodeGeometry::for_image(32, 24, 16, 8);
    const StereoPair x(random_image(32, 24, 1), random_image(32, 24, 2));
    Eigen::MatrixXd y = Eigen::MatrixXd::Random(512, g.positions());
    const double lhs = (extract_patches(x, g).array() * y.array()).sum();
    const StereoPair back = accumulate_patches(y, g);
    double rhs = 0.0;
    for (std::size_t i = 0; i < x.left.size(); ++i)
        rhs += x.left.values()[i] * back.left.values()[i] + x.right.values()[i] * back.right.values()[i];
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs));
}

TEST(EnergyTest, ZeroInputZeroCode) {
    const Dictionary d = Dictionary::random(4, 16, 8, 1);
    const CodeState c(CodeGeometry::for_image(32, 32, 16, 8), 4);
    const Energy e = energy(StereoPair(Image(32, 32), Image(32, 32)), d, c, 0.1);
    EXPECT_EQ(e.residual, 0.0);
    EXPECT_EQ(e.count, 0);
    EXPECT_EQ(e.total, 0.0);
}

TEST(EnergyTest, ZeroCodeOnNormalizedPairIsHalf) {
    const Dictionary d = Dictionary::random(4, 16, 8, 1);
    const CodeState c(CodeGeometry::for_image(32, 32, 16, 8), 4);
    const Energy e = energy(random_pair(32, 32, 3), d, c, 0.1);
    EXPECT_NEAR(e.residual, 0.5, 1e-12);
    EXPECT_EQ(e.count, 0);
}

TEST(EnergyTest, CountMatchesBruteForce) {
    const Dictionary d = Dictionary::random(5, 16, 8, 1);
    const CodeGeometry g = CodeGeometry::for_image(32, 32, 16, 8);
    CodeState c(g, 5);
    Rng rng(2);
    long expected = 0;
    for (int i = 0; i < c.a.size(); ++i) {
        const double v = rng.uniform() < 0.3 ? rng.uniform(0.0, 0.4) : 0.0;
        c.a.data()[i] = v;
        expected += v > 0.2 ? 1 : 0;
    }
    const StereoPair p = random_pair(32, 32, 4);
    const Energy e = energy(p, d, c, 0.2);
    EXPECT_EQ(e.count, expected);
    const StereoPair r = reconstruct(d, c);
    const double residual = 0.5 * ((p.left - r.left).squared_norm() + (p.right - r.right).squared_norm());
    EXPECT_NEAR(e.residual, residual, 1e-12);
    EXPECT_NEAR(e.total, residual + 0.2 * expected, 1e-12);
    EXPECT_NEAR(e.objective, residual + 0.5 * 0.04 * expected, 1e-12);
}

TEST(Encode, ZeroInputStaysZero) {
    const Dictionary d = Dictionary::random(4, 16, 8, 1);
    LcaConfig cfg;
    cfg.iterations = 50;
    const EncodeResult r = encode(StereoPair(Image(32, 32), Image(32, 32)), d, cfg);
    EXPECT_EQ(r.code.a.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.code.u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encode, PlantedAtomIsRecovered) {
    const Dictionary d = Dictionary::random(16, 16, 8, 5);
    StereoPair p(Image(48, 48), Image(48, 48));
    stamp(p, d, 7, 3, 2, 1.0);
    LcaConfig cfg;
    cfg.lambda = 0.1;
    const EncodeResult r = encode(p, d, cfg);
    Eigen::Index pos, k;
    r.code.a.maxCoeff(&pos, &k);
    EXPECT_EQ(k, 7);
    EXPECT_EQ(pos, 3 * r.code.geometry.cols + 2);
    const BinaryCode b = binarize(r.code);
    EXPECT_EQ(b.active_count(), 1u);
    EXPECT_NEAR(r.code.activation(7, 3, 2), 1.0, 0.05);
}

TEST(Encode, DeterministicAndTraceConsistent) {
    const Dictionary d = Dictionary::random(8, 16, 8, 6);
    const StereoPair p = random_pair(32, 32, 9);
    LcaConfig cfg;
    cfg.lambda = 0.02;
    const EncodeResult a = encode(p, d, cfg), b = encode(p, d, cfg);
    EXPECT_EQ(a.code.u, b.code.u);
    EXPECT_EQ(a.iterations, b.iterations);
    ASSERT_EQ(a.trace.size(), static_cast<std::size_t>(a.iterations) + 1);
    const Energy last = energy(p, d, a.code, cfg.lambda);
    EXPECT_NEAR(last.residual, a.trace.back().residual, 1e-12);
    EXPECT_EQ(last.count, a.trace.back().count);
}

TEST(Encode, ObjectiveDescends) {
    const Dictionary d = Dictionary::random(16, 16, 8, 7);
    LcaConfig cfg;
    cfg.lambda = 0.05;
    std::size_t steps = 0, violations = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const EncodeResult r = encode(random_pair(32, 32, 100 + s), d, cfg);
        for (std::size_t t = 6; t < r.trace.size(); ++t, ++steps)
            if (r.trace[t].objective > r.trace[t - 1].objective * (1 + 1e-12)) ++violations;
    }
    EXPECT_GT(steps, 0u);
    EXPECT_EQ(violations, 0u);
}

TEST(Encode, SparsityNonIncreasingInLambda) {
    const Dictionary d = Dictionary::random(16, 16, 8, 8);
    std::vector<double> mean_active;
    for (double lambda : {0.01, 0.03, 0.1}) {
        LcaConfig cfg;
        cfg.lambda = lambda;
        cfg.iterations = 200;
        double total = 0.0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            PreprocessConfig pre;
            total += static_cast<double>(binarize(encode(random_pair(32, 32, 300 + s), d, cfg).code).active_count());
        }
        mean_active.push_back(total / 100);
    }
    EXPECT_GE(mean_active[0], mean_active[1]);
    EXPECT_GE(mean_active[1], mean_active[2]);
}

TEST(Encode, NonOverlappingSupportFixedPoint) {
    const Dictionary d = Dictionary::random(10, 16, 8, 10);
    StereoPair p(Image(64, 64), Image(64, 64));
    // Supports two cells apart never overlap.
    stamp(p, d, 1, 1, 1, 0.8);
    stamp(p, d, 4, 1, 5, 1.2);
    stamp(p, d, 8, 5, 3, 0.9);
    LcaConfig cfg;
    const BinaryCode b = binarize(encode(p, d, cfg).code);
    EXPECT_EQ(b.active_count(), 3u);
    EXPECT_EQ(b(1, 1, 1), 1);
    EXPECT_EQ(b(4, 1, 5), 1);
    EXPECT_EQ(b(8, 5, 3), 1);
}

TEST(Encode, InvalidConfigRejected) {
    LcaConfig cfg;
    cfg.step = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.step = 0.1;
    cfg.lambda = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.lambda = 0.1;
    cfg.iterations = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Encode, MatchesDenseResidualDynamics) {
    // Reference dynamics straight from the definition: drive is the
    // correlation of each kernel window with the current residual.
    for (int stride : {8, 4}) {
        const Dictionary d = Dictionary::random(5, 16, stride, 17);
        const StereoPair x = random_pair(24, 40, 5);
        LcaConfig cfg;
        cfg.lambda = 0.05;
        cfg.iterations = 25;
        cfg.tolerance = 0.0;
        const CodeGeometry g = CodeGeometry::for_image(24, 40, 16, stride);
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(g.positions(), 5), a = u;
        for (int t = 0; t < cfg.iterations; ++t) {
            a = u.unaryExpr([&](double v) { return threshold(v, cfg.lambda); });
            StereoPair res = x;
            for (int p = 0; p < g.positions(); ++p)
                for (int k = 0; k < 5; ++k)
                    if (a(p, k) != 0.0) stamp(res, d, k, p / g.cols, p % g.cols, -a(p, k));
            for (int p = 0; p < g.positions(); ++p)
                for (int k = 0; k < 5; ++k) {
                    const Image l = d.left(k), r = d.right(k);
                    double drive = 0.0;
                    for (int i = 0; i < 16; ++i)
                        for (int j = 0; j < 16; ++j) {
                            const int y = g.top(p / g.cols) + i, xx = g.left(p % g.cols) + j;
                            if (y < 0 || xx < 0 || y >= 24 || xx >= 40) continue;
                            drive += l(i, j) * res.left(y, xx) + r(i, j) * res.right(y, xx);
                        }
                    u(p, k) += cfg.step * (drive + a(p, k) - u(p, k));
                }
        }
        a = u.unaryExpr([&](double v) { return threshold(v, cfg.lambda); });
        const EncodeResult e = encode(x, d, cfg);
        EXPECT_LT((e.code.u - u).cwiseAbs().maxCoeff(), 1e-10) << stride;
        EXPECT_LT((e.code.a - a).cwiseAbs().maxCoeff(), 1e-10) << stride;
    }
}

TEST(Encode, DivergenceReportsIteration) {
    Dictionary d = Dictionary::random(2, 16, 8, 1);
    d.weights() *= 1e200;  // lateral term overflows
    LcaConfig cfg;
    cfg.step = 1.0;
    cfg.lambda = 0.0;
    try {
        encode(random_pair(32, 32, 1), d, cfg);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.iteration(), 1);
    }
}

TEST(Binarize, ThresholdAtZero) {
    CodeState c(CodeGeometry::for_image(16, 16, 16, 8), 2);
    c.activation(0, 0, 0) = 0.3;
    c.activation(1, 2, 1) = 1e-9;
    const BinaryCode b = binarize(c);
    EXPECT_EQ(b(0, 0, 0), 1);
    EXPECT_EQ(b(1, 2, 1), 1);
    EXPECT_EQ(b(0, 1, 1), 0);
    EXPECT_EQ(b.active_count(), 2u);
    const BinaryCode z = binarize(CodeState(CodeGeometry::for_image(16, 16, 16, 8), 2));
    EXPECT_EQ(z.active_count(), 0u);
}

TEST(Binarize, CountMatchesEnergyAfterEncoding) {
    const Dictionary d = Dictionary::random(8, 16, 8, 11);
    LcaConfig cfg;
    cfg.lambda = 0.03;
    const StereoPair p = random_pair(32, 32, 12);
    const EncodeResult r = encode(p, d, cfg);
    EXPECT_EQ(static_cast<long>(binarize(r.code).active_count()), energy(p, d, r.code, cfg.lambda).count);
}

TEST(Learn, EmptySetRejectedAndZeroPairsLeaveKernels) {
    LearnConfig lc;
    lc.kernels = 4;
    lc.epochs = 2;
    LcaConfig ec;
    ec.iterations = 20;
    EXPECT_THROW(learn(std::span<const StereoPair>{}, lc, ec), DataError);
    const std::vector<StereoPair> zeros(3, StereoPair(Image(32, 32), Image(32, 32)));
    const TrainingState s = learn(zeros, lc, ec);
    EXPECT_EQ(s.dict.weights(), Dictionary::random(4, 16, 8, lc.seed).weights());
    EXPECT_EQ(s.epochs_done, 2);
}

TEST(Learn, EpochsZeroReturnsInit) {
    LearnConfig lc;
    lc.kernels = 3;
    lc.epochs = 0;
    const std::vector<StereoPair> pairs{random_pair(32, 32, 1)};
    const TrainingState s = learn(pairs, lc, LcaConfig{});
    EXPECT_TRUE(s.log.empty());
    EXPECT_LT(s.dict.max_norm_error(), 1e-9);
}

TEST(Learn, NormStaysUnitAndWorkersDoNotMatter) {
    std::vector<StereoPair> pairs;
    for (std::uint64_t s = 0; s < 12; ++s) pairs.push_back(random_pair(32, 32, 40 + s));
    LearnConfig lc;
    lc.kernels = 6;
    lc.epochs = 2;
    lc.batch_size = 4;
    LcaConfig ec;
    ec.lambda = 0.05;
    ec.iterations = 60;
    std::size_t callbacks = 0;
    const TrainingState a = learn(pairs, lc, ec, std::nullopt, [&](const TrainingState& st) {
        ++callbacks;
        EXPECT_LT(st.dict.max_norm_error(), 1e-9);
    });
    EXPECT_EQ(callbacks, 2u);
    lc.workers = 4;
    const TrainingState b = learn(pairs, lc, ec);
    EXPECT_EQ(a.dict.weights(), b.dict.weights());
    ASSERT_EQ(a.log.size(), 2u);
    EXPECT_EQ(a.log[1].pairs, 12);
}

TEST(Learn, CheckpointResumeMatchesUninterrupted) {
    const auto dir = slca::testing::scratch_dir("ckpt");
    std::vector<StereoPair> pairs;
    for (std::uint64_t s = 0; s < 8; ++s) pairs.push_back(random_pair(32, 32, 60 + s));
    LearnConfig lc;
    lc.kernels = 4;
    lc.epochs = 3;
    lc.batch_size = 3;
    LcaConfig ec;
    ec.lambda = 0.05;
    ec.iterations = 40;
    const TrainingState full = learn(pairs, lc, ec);

    lc.epochs = 1;
    save_checkpoint(dir / "c.lcat", learn(pairs, lc, ec));
    TrainingState resumed = load_checkpoint(dir / "c.lcat");
    EXPECT_EQ(resumed.epochs_done, 1);
    lc.epochs = 3;
    const TrainingState done = learn(pairs, lc, ec, std::move(resumed));
    EXPECT_EQ(done.dict.weights(), full.dict.weights());
    EXPECT_EQ(done.log.size(), 3u);
}
