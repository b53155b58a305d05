#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

using namespace radarsim;

namespace {

const WaveformParams kAvg = WaveformParams::raddet_average();

// Chi-square statistic of `xs` over `bins` equal bins of [0, hi).
double chi_square(const std::vector<double>& xs, double hi, int bins)
{
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (double x : xs) h[std::min(static_cast<std::size_t>(x / hi * bins), static_cast<std::size_t>(bins - 1))] += 1;
    const double e = static_cast<double>(xs.size()) / bins;
    double c = 0;
    for (double o : h) c += (o - e) * (o - e) / e;
    return c;
}

// Upper 1% point of chi-square with 15 degrees of freedom.
constexpr double kChi2_15_001 = 30.578;

}  // namespace

TEST(Synthesis, EmptyListGivesZeroCube)
{
    const CubeShape s{16, 8, 16};
    EXPECT_EQ(synthesize_naive({}, kAvg, s).max_value(), 0.0f);
    EXPECT_EQ(synthesize_fast({}, kAvg, s).max_value(), 0.0f);
}

TEST(Synthesis, SinglePointPeakIsTwoG)
{
    const CubeShape s{32, 16, 32};
    const std::vector<ReflectionPoint> pts{{12, 7, 20, 1.0}};
    for (const auto& cube : {synthesize_naive<double>(pts, kAvg, s), synthesize_fast<double>(pts, kAvg, s)}) {
        EXPECT_EQ(cube.argmax(), (BinIndex{12, 7, 20}));
        EXPECT_NEAR(cube(12, 7, 20), 2 * kAvg.g(), 1e-12);
    }
}

TEST(Synthesis, LinearInIntensity)
{
    std::mt19937_64 rng(5);
    const CubeShape s{32, 8, 32};
    const auto pts = testutil::random_points(rng, s, 15);
    std::vector<ReflectionPoint> doubled;
    for (const auto& p : pts) doubled.push_back(p.with_intensity(2 * p.intensity()));
    const auto a = synthesize_naive<double>(pts, kAvg, s);
    const auto b = synthesize_naive<double>(doubled, kAvg, s);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.values()[i], 2 * a.values()[i], 1e-12 * b.max_value());
}

TEST(Synthesis, Superposition)
{
    std::mt19937_64 rng(6);
    const CubeShape s{32, 8, 32};
    for (int t = 0; t < 10; ++t) {
        const auto a = testutil::random_points(rng, s, 10);
        const auto b = testutil::random_points(rng, s, 10);
        auto ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto ca = synthesize_naive<double>(a, kAvg, s), cb = synthesize_naive<double>(b, kAvg, s);
        const auto cab = synthesize_naive<double>(ab, kAvg, s);
        const auto fa = synthesize_fast<double>(a, kAvg, s), fb = synthesize_fast<double>(b, kAvg, s);
        const auto fab = synthesize_fast<double>(ab, kAvg, s);
        const double scale = cab.max_value();
        for (std::size_t i = 0; i < cab.size(); ++i) {
            EXPECT_NEAR(cab.values()[i], ca.values()[i] + cb.values()[i], 1e-12 * scale);
            EXPECT_NEAR(fab.values()[i], fa.values()[i] + fb.values()[i], 1e-5 * scale);
        }
    }
}

TEST(Synthesis, IntegerShiftCovariance)
{
    const CubeShape s{48, 16, 64};
    const std::vector<ReflectionPoint> a{{15.3, 5.4, 20.2, 1.0}};
    const std::vector<ReflectionPoint> b{{18.3, 7.4, 25.2, 1.0}};
    const auto ca = synthesize_naive<double>(a, kAvg, s);
    const auto cb = synthesize_naive<double>(b, kAvg, s);
    for (std::size_t r = 0; r + 3 < s.n_range; ++r)
        for (std::size_t d = 0; d + 2 < s.n_doppler; ++d)
            for (std::size_t az = 0; az + 5 < s.n_azimuth; ++az) ASSERT_NEAR(cb(r + 3, d + 2, az + 5), ca(r, d, az), 1e-12);
}

TEST(Synthesis, OutOfBoundsPointRejected)
{
    const CubeShape s{16, 8, 16};
    const std::vector<ReflectionPoint> pts{{1, 1, 1, 1}, {16.0, 1, 1, 1}};
    EXPECT_THROW(synthesize_naive(pts, kAvg, s), DataError);
    EXPECT_THROW(synthesize_fast(pts, kAvg, s), DataError);
}

TEST(Synthesis, FastMatchesNaiveOnRandomScenes)
{
    std::mt19937_64 rng(2024);
    const std::vector<CubeShape> shapes{{32, 8, 32}, {64, 16, 64}, {40, 12, 24}, {16, 8, 128}};
    for (int seed = 0; seed < 100; ++seed) {
        const auto& s = shapes[static_cast<std::size_t>(seed) % shapes.size()];
        const WaveformParams wp(testutil::uni(rng, 2.4, 2.8), testutil::uni(rng, 0.5, 0.7), 6 + seed % 5,
                                0.1 * (1 + seed % 3), testutil::uni(rng, 0.5, 3.0));
        const auto pts = testutil::random_points(rng, s, 10 + static_cast<std::size_t>(seed % 41));
        const auto naive = synthesize_naive<double>(pts, wp, s);
        const auto fast = synthesize_fast<double>(pts, wp, s);
        EXPECT_LT(testutil::rel_frobenius(fast, naive), 1e-5) << "seed " << seed;
        for (double v : fast.values()) ASSERT_GE(v, 0.0);
    }
}

TEST(Synthesis, OutputIndependentOfThreadCount)
{
    std::mt19937_64 rng(8);
    const CubeShape s{64, 16, 64};
    const auto pts = testutil::random_points(rng, s, 300);
    const auto one = synthesize_fast(pts, kAvg, s, 1);
    for (unsigned t : {2u, 3u, 8u, 64u, 200u}) EXPECT_TRUE(synthesize_fast(pts, kAvg, s, t) == one) << t;
}

TEST(Synthesis, FullSizeTopPeaksMatchNaive)
{
    const auto grid = RadarGrid::raddet_like();
    std::mt19937_64 rng(77);
    auto pts = testutil::random_points(rng, grid.shape(), 200, 0.5, 1.0);
    const auto noise = sample_noise_points(grid, NoiseConfig{2000, 0.001, 0.05, 9});
    pts.insert(pts.end(), noise.begin(), noise.end());
    const auto fast = synthesize_fast(pts, kAvg, grid);
    const auto naive = synthesize_naive(pts, kAvg, grid);
    EXPECT_LT(testutil::rel_frobenius(fast, naive), 1e-5);

    auto top20 = [](const RadarCube& c) {
        std::vector<std::size_t> idx(c.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + 20, idx.end(), [&](std::size_t a, std::size_t b) {
            return c.values()[a] > c.values()[b] || (c.values()[a] == c.values()[b] && a < b);
        });
        return std::set<std::size_t>(idx.begin(), idx.begin() + 20);
    };
    EXPECT_EQ(top20(fast), top20(naive));
}

TEST(NoiseSampling, CountKindBoundsAndDeterminism)
{
    const auto grid = RadarGrid::raddet_like();
    EXPECT_TRUE(sample_noise_points(grid, NoiseConfig{0, 0.001, 0.05, 1}).empty());
    const NoiseConfig cfg{500, 0.001, 0.05, 123};
    const auto a = sample_noise_points(grid, cfg);
    const auto b = sample_noise_points(grid, cfg);
    ASSERT_EQ(a.size(), 500u);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, sample_noise_points(grid, NoiseConfig{500, 0.001, 0.05, 124}));
    for (const auto& p : a) {
        EXPECT_EQ(p.kind(), PointKind::Noise);
        EXPECT_TRUE(p.inside(grid.shape()));
        EXPECT_GE(p.intensity(), 0.001);
        EXPECT_LE(p.intensity(), 0.05);
    }
    EXPECT_THROW(sample_noise_points(grid, NoiseConfig{1, 0.1, 0.05, 0}), InvalidArgument);
}

TEST(NoiseSampling, UniformAxesAndLogUniformIntensity)
{
    const auto grid = RadarGrid::raddet_like();
    const auto pts = sample_noise_points(grid, NoiseConfig{10000, 0.001, 0.05, 31});
    std::vector<double> r, d, a, li;
    for (const auto& p : pts) {
        r.push_back(p.r_bin());
        d.push_back(p.d_bin());
        a.push_back(p.a_bin());
        li.push_back(std::log(p.intensity() / 0.001));
    }
    EXPECT_LT(chi_square(r, 256, 16), kChi2_15_001);
    EXPECT_LT(chi_square(d, 64, 16), kChi2_15_001);
    EXPECT_LT(chi_square(a, 256, 16), kChi2_15_001);
    EXPECT_LT(chi_square(li, std::log(50.0), 16), kChi2_15_001);

    // intensity_min = 0 degrades to uniform on [0, max].
    const auto u = sample_noise_points(grid, NoiseConfig{10000, 0.0, 0.05, 32});
    std::vector<double> iv;
    for (const auto& p : u) iv.push_back(p.intensity());
    EXPECT_LT(chi_square(iv, 0.05, 16), kChi2_15_001);
}

TEST(SynthesizeScene, EmptyDeterministicAndArgmax)
{
    const auto grid = RadarGrid::raddet_like();
    const auto empty = synthesize_scene({}, SensorPose{}, grid, kAvg, NoiseConfig{0, 0, 0, 0});
    EXPECT_EQ(empty.cube.max_value(), 0.0f);
    EXPECT_TRUE(empty.scene_points.empty());

    const std::vector<ActorPoint> actors{{10.0, 0.0, 0.0, 0.0, 1.0, 1}};
    const NoiseConfig noise{2000, 0.001, 0.05, 4};
    const auto a = synthesize_scene(actors, SensorPose{}, grid, kAvg, noise);
    const auto b = synthesize_scene(actors, SensorPose{}, grid, kAvg, noise);
    EXPECT_TRUE(a.cube == b.cube);
    EXPECT_EQ(a.points.size(), 2001u);

    const auto proj = project_to_bins(actors, SensorPose{}, grid);
    const BinIndex expect{static_cast<std::size_t>(std::floor(proj[0].r_bin() + 0.5)),
                          static_cast<std::size_t>(std::floor(proj[0].d_bin() + 0.5)),
                          static_cast<std::size_t>(std::floor(proj[0].a_bin() + 0.5))};
    EXPECT_EQ(a.cube.argmax(), expect);
    ASSERT_EQ(a.scene_points.size(), 1u);
    EXPECT_EQ(a.scene_points.indices()[0], expect);
}
