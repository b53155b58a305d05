#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace radarsim;

namespace {

const CubeShape kShape{128, 16, 64};

// Five reflectors on separate (range, Doppler) cells of the isolation lattice.
std::vector<ReflectionPoint> five_isolated(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const double cells[5][2] = {{10, 3}, {38, 12}, {66, 3}, {94, 12}, {94, 3}};
    std::vector<ReflectionPoint> pts;
    for (const auto& c : cells)
        pts.emplace_back(c[0] + testutil::uni(rng, -0.4, 0.4), c[1] + testutil::uni(rng, -0.4, 0.4),
                         testutil::uni(rng, 10, 54), testutil::uni(rng, 0.8, 1.2));
    return pts;
}

void expect_recovered(const WaveformFit& f, const WaveformParams& truth, double sigma_tol = 0.05)
{
    EXPECT_NEAR(f.sigma, truth.sigma(), sigma_tol);
    ASSERT_TRUE(f.g.has_value());
    EXPECT_NEAR(*f.g, truth.g(), 0.02);
    EXPECT_EQ(f.n_window, truth.n_window());
    EXPECT_EQ(f.p_window, truth.p_window());
    EXPECT_NEAR(f.s_doppler, truth.s_doppler(), 0.1);
}

}  // namespace

TEST(Fitting, NoiselessRoundTripAtAverageParams)
{
    const WaveformParams wp(2.6, 0.6, 8, 0.1, 2.0);
    const auto pts = five_isolated(1);
    const auto cube = synthesize_fast(pts, wp, kShape);
    const auto f = fit_waveform_params(cube, pts);
    EXPECT_EQ(f.peaks.size(), 5u);
    expect_recovered(f, wp);
    EXPECT_LT(f.residuals.range, 1e-3);
    EXPECT_LT(f.residuals.doppler, 1e-3);
    EXPECT_LT(f.residuals.azimuth, 1e-3);
}

TEST(Fitting, NoisyRoundTrip)
{
    const WaveformParams wp(2.6, 0.6, 8, 0.1, 2.0);
    auto pts = five_isolated(2);
    // default noise level, count scaled to the grid
    const auto noise =
        sample_noise_points(kShape, NoiseConfig::relative_to(peak_scene_intensity(pts), io::default_noise_count(kShape), 5));
    pts.insert(pts.end(), noise.begin(), noise.end());
    const auto cube = synthesize_fast(pts, wp, kShape);
    const auto f = fit_waveform_params(cube, pts);  // noise-kind points are skipped
    EXPECT_EQ(f.peaks.size(), 5u);
    EXPECT_NEAR(f.sigma, 2.6, 0.15);
}

TEST(Fitting, CornerOfTheGrid)
{
    const WaveformParams wp(2.4, 0.5, 10, 0.3, 2.0);
    const auto pts = five_isolated(3);
    expect_recovered(fit_waveform_params(synthesize_fast(pts, wp, kShape), pts), wp);
}

TEST(Fitting, GridSubsetRoundTrip)
{
    int k = 0;
    for (double sigma : {2.4, 2.6, 2.8})
        for (int n : {6, 8, 10})
            for (double p : {0.1, 0.3}) {
                const WaveformParams wp(sigma, 0.5 + 0.1 * (k % 3), n, p, 2.0);
                const auto pts = five_isolated(100 + static_cast<std::uint64_t>(k++));
                SCOPED_TRACE(::testing::Message() << sigma << " " << n << " " << p);
                expect_recovered(fit_waveform_params(synthesize_fast(pts, wp, kShape), pts), wp);
            }
}

TEST(Fitting, CfarPeaksLeaveGUndetermined)
{
    const WaveformParams wp(2.6, 0.6, 8, 0.1, 2.0);
    const auto pts = five_isolated(4);
    const auto cube = synthesize_fast(pts, wp, kShape);
    const auto peaks = cfar_extract(cube, CfarConfig{2, 4, 5.0, 0.3 * cube.max_value()});
    FitOptions opt;
    opt.reference_intensities = false;
    const auto f = fit_waveform_params(cube, peaks, opt);
    EXPECT_FALSE(f.g.has_value());
    EXPECT_THROW((void)f.params(), DataError);
    EXPECT_NEAR(f.sigma, 2.6, 0.05);
    EXPECT_EQ(f.n_window, 8);
    EXPECT_EQ(f.p_window, 0.1);
    EXPECT_NEAR(f.s_doppler, 2.0, 0.1);
}

TEST(Fitting, MeanAggregation)
{
    const WaveformParams wp(2.5, 0.7, 7, 0.2, 2.0);
    const auto pts = five_isolated(5);
    FitOptions opt;
    opt.aggregation = Aggregation::Mean;
    expect_recovered(fit_waveform_params(synthesize_fast(pts, wp, kShape), pts, opt), wp);
}

TEST(Fitting, InsufficientIsolatedPeaks)
{
    const WaveformParams wp = WaveformParams::raddet_average();
    const std::vector<ReflectionPoint> pts{{30, 8, 20, 1.0}, {36, 9, 40, 1.0}};
    const auto cube = synthesize_fast(pts, wp, kShape);
    try {
        fit_waveform_params(cube, pts);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient isolated peaks"), std::string::npos);
    }
    EXPECT_THROW(fit_waveform_params(cube, std::vector<ReflectionPoint>{}), DataError);
}

TEST(IsolatedPeaks, Rules)
{
    const FitOptions opt;
    const std::vector<ReflectionPoint> pts{
        {30, 8, 20, 1.0},                    // 0: near 1
        {36, 9, 40, 1.0},                    // 1: near 0
        {80, 8, 20, 1.0},                    // 2: has only a weak and a noise neighbour
        {85, 9, 50, 0.04},                   // 3: weak, too close to 2 itself
        {82, 8, 30, 0.9, PointKind::Noise},  // 4: noise, ignored
        {110, 4, 20, 1.0},                   // 5: same-row sidelobe detection next to it
        {110, 5, 40, 0.25},                  // 6: sidelobe of 5
    };
    EXPECT_EQ(isolated_peaks(pts, opt), (std::vector<std::size_t>{2, 5}));
}
