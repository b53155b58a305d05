#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "test_util.hpp"

using namespace radarsim;

namespace {

// Brute-force O(pad^2) complex DFT of the zero-padded window, fft-shifted and
// peak-normalized. Shares nothing with the library implementation.
std::vector<double> dft_oracle(int n_window, double p, std::size_t pad)
{
    std::vector<std::complex<double>> x(pad, 0.0);
    for (int n = 0; n < n_window; ++n)
        x[static_cast<std::size_t>(n)] = (1 - p) - p * std::cos(2 * std::numbers::pi * n / (n_window - 1));
    std::vector<double> mag(pad);
    for (std::size_t k = 0; k < pad; ++k) {
        std::complex<double> s = 0;
        for (std::size_t n = 0; n < pad; ++n)
            s += x[n] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(pad));
        mag[(k + pad / 2) % pad] = std::abs(s);
    }
    const double m = *std::max_element(mag.begin(), mag.end());
    for (auto& v : mag) v /= m;
    return mag;
}

// Largest sidelobe of the Dirichlet kernel |sin(pi k N / pad) / (N sin(pi k / pad))|
// by a dense scan past the first null.
double dirichlet_sidelobe(int n, double pad)
{
    double best = 0;
    const double first_null = pad / n;
    for (double k = first_null; k <= pad / 2; k += first_null * 1e-5) {
        const double v = std::abs(std::sin(std::numbers::pi * k * n / pad) / (n * std::sin(std::numbers::pi * k / pad)));
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

TEST(RangeProfile, AnalyticValues)
{
    const std::vector<double> offs{3.0, 3.0 + 2.6, 3.0 - 2.6};
    const auto v = eval_range_profile(2.6, 3.0, offs);
    EXPECT_NEAR(v[0], 1.0, 1e-12);
    EXPECT_NEAR(v[1], std::exp(-0.5), 1e-12);
    EXPECT_NEAR(v[2], 0.606531, 1e-6);
    EXPECT_THROW(eval_range_profile(0.0, 0.0, offs), InvalidArgument);
}

TEST(RangeProfile, MatchesScalarLoop)
{
    std::vector<double> offs;
    for (int i = -10; i <= 10; ++i) offs.push_back(i);
    const auto v = eval_range_profile(2.6, 0.0, offs);
    for (std::size_t i = 0; i < offs.size(); ++i) {
        const double r = offs[i];
        EXPECT_NEAR(v[i], std::exp(-(r * r) / (2 * 2.6 * 2.6)), 1e-12);
    }
}

TEST(DopplerProfile, AnalyticValues)
{
    const double g = 0.6, s = 2.0, c = 5.0;
    const std::vector<double> offs{c, c + s / 3, c - s / 3, c + s, c - 1.5 * s, c + 0.1 * s};
    const auto v = eval_doppler_profile(g, s, c, offs);
    EXPECT_NEAR(v[0], 2 * g, 1e-12);
    EXPECT_NEAR(v[1], 2.0 / 3.0 * g, 1e-12);
    EXPECT_NEAR(v[2], 2.0 / 3.0 * g, 1e-12);
    EXPECT_EQ(v[3], 0.0);
    EXPECT_EQ(v[4], 0.0);
    EXPECT_NEAR(v[5], g * (2 - 0.4), 1e-12);
    EXPECT_THROW(eval_doppler_profile(0.0, 2.0, 0.0, offs), InvalidArgument);
    EXPECT_THROW(eval_doppler_profile(0.6, 0.0, 0.0, offs), InvalidArgument);
}

TEST(AzimuthProfile, RectangularWindowMatchesDftOracle)
{
    for (int n : {6, 8, 16}) {
        const auto oracle = dft_oracle(n, 0.0, 256);
        const AzimuthSpectrum spec(n, 0.0, 256);
        const auto prof = eval_azimuth_profile(n, 0.0, 256, 128.0);
        for (std::size_t k = 0; k < 256; ++k) {
            EXPECT_NEAR(spec.values()[k], oracle[k], 1e-9) << "N=" << n << " k=" << k;
            EXPECT_NEAR(prof[k], oracle[k], 1e-9) << "N=" << n << " k=" << k;
        }
    }
}

TEST(AzimuthProfile, TaperedWindowMatchesDftOracle)
{
    for (int n : {6, 7, 8, 9, 10})
        for (double p : {0.1, 0.2, 0.3}) {
            const auto oracle = dft_oracle(n, p, 64);
            const AzimuthSpectrum spec(n, p, 64);
            for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(spec.values()[k], oracle[k], 1e-9);
        }
}

TEST(AzimuthProfile, NullsPeakAndShift)
{
    const auto prof = eval_azimuth_profile(8, 0.0, 256, 128.0);
    EXPECT_DOUBLE_EQ(prof[128], 1.0);
    EXPECT_NEAR(prof[128 + 32], 0.0, 1e-12);
    EXPECT_NEAR(prof[128 - 32], 0.0, 1e-12);
    EXPECT_GT(prof[128 + 31], 0.0);

    // Integer centring moves the peak, truncating rather than wrapping.
    const auto shifted = eval_azimuth_profile(8, 0.1, 64, 10.0);
    const auto base = eval_azimuth_profile(8, 0.1, 64, 32.0);
    EXPECT_DOUBLE_EQ(shifted[10], 1.0);
    for (std::size_t j = 0; j < 64; ++j) {
        const long src = static_cast<long>(j) + 22;
        EXPECT_EQ(shifted[j], src < 64 ? base[static_cast<std::size_t>(src)] : 0.0);
    }
    // Fractional centring interpolates linearly between lattice samples.
    const auto frac = eval_azimuth_profile(8, 0.1, 64, 32.25);
    for (std::size_t j = 1; j < 63; ++j)
        EXPECT_NEAR(frac[j], 0.75 * base[j] + 0.25 * base[j - 1], 1e-15);

    for (int n : {3, 6, 10})
        for (double p : {0.0, 0.3, 0.45}) EXPECT_DOUBLE_EQ(AzimuthSpectrum(n, p, 64).values()[32], 1.0);
    // p > 0.5 gives negative taps and the maximum leaves DC; still normalized to 1.
    for (int n : {3, 6, 10}) {
        const AzimuthSpectrum hi(n, 0.9, 64);
        EXPECT_DOUBLE_EQ(*std::max_element(hi.values().begin(), hi.values().end()), 1.0);
        EXPECT_LT(hi.values()[32], 1.0);
    }
    EXPECT_THROW(eval_azimuth_profile(8, 0.1, 7, 3.0), InvalidArgument);
}

TEST(AzimuthProfile, MonotoneMainLobe)
{
    for (int n : {6, 7, 8, 9, 10})
        for (double p : {0.0, 0.1, 0.2, 0.3}) {
            const AzimuthSpectrum spec(n, p, 256);
            const auto v = spec.values();
            const auto lp = derive_lobe_params(n, p, 256);
            const auto half = static_cast<std::size_t>(std::floor(lp.rs() / 2));
            for (std::size_t k = 0; k < half; ++k) {
                EXPECT_GE(v[128 + k] + 1e-15, v[128 + k + 1]);
                EXPECT_GE(v[128 - k] + 1e-15, v[128 - k - 1]);
            }
        }
}

TEST(LobeParams, RectangularWindowWidths)
{
    EXPECT_NEAR(derive_lobe_params(8, 0.0, 256).rs(), 64.0, 1e-9);
    EXPECT_NEAR(derive_lobe_params(16, 0.0, 256).rs(), 32.0, 1e-9);
    EXPECT_NEAR(derive_lobe_params(6, 0.0, 256).rs(), 2.0 * 256.0 / 6.0, 1e-9);
}

TEST(LobeParams, RectangularSidelobeMatchesDirichletScan)
{
    for (int n : {6, 8, 16}) {
        const double oracle = dirichlet_sidelobe(n, 256.0);
        EXPECT_NEAR(derive_lobe_params(n, 0.0, 256).lambda(), oracle, 1e-6) << "N=" << n;
    }
    // The first sidelobe of the finite Dirichlet kernel (0.2292 for N=8)
    // lies above the continuous sinc limit 0.2172 and converges to it.
    const double l8 = derive_lobe_params(8, 0.0, 256).lambda();
    EXPECT_NEAR(l8, 0.2292, 1e-4);
    EXPECT_GT(l8, 0.2172);
    EXPECT_NEAR(derive_lobe_params(128, 0.0, 8192).lambda(), 0.2172, 2e-4);
}

TEST(LobeParams, LambdaBelowOneAndHeavyTaperHasSmallSidelobes)
{
    for (int n = 3; n <= 16; ++n)
        for (double p : {0.0, 0.1, 0.2, 0.3, 0.5, 0.9}) {
            const auto lp = derive_lobe_params(n, p, 256);
            EXPECT_LT(lp.lambda(), 1.0);
            EXPECT_GE(lp.lambda(), 0.0);
            EXPECT_GT(lp.rs(), 0.0);
        }
    // The Hann window (p = 0.5) has its first sidelobe near -31.5 dB.
    EXPECT_NEAR(derive_lobe_params(64, 0.5, 4096).lambda(), 0.0267, 1e-3);
}

TEST(LobeParams, MeasuredFromEmittedProfileMatchesDerived)
{
    // Sampled measurement versus the continuous derivation; the lattice limits
    // agreement to the interpolation error of the null refinement.
    for (int n : {6, 8, 10})
        for (double p : {0.0, 0.1, 0.2, 0.3}) {
            const auto derived = derive_lobe_params(n, p, 256);
            const auto measured = measure_lobes(eval_azimuth_profile(n, p, 256, 128.0));
            EXPECT_NEAR(measured.rs(), derived.rs(), 0.01 * derived.rs()) << n << " " << p;
            EXPECT_NEAR(measured.lambda(), derived.lambda(), 0.01) << n << " " << p;
        }
}

TEST(FitWindowFromLobes, RoundTrips)
{
    const std::vector<int> ns{6, 7, 8, 9, 10};
    const std::vector<double> ps{0.1, 0.2, 0.3};
    auto wf = fit_window_from_lobes(derive_lobe_params(8, 0.1, 256), 256, ns, ps);
    EXPECT_EQ(wf.n_window, 8);
    EXPECT_EQ(wf.p_window, 0.1);
    wf = fit_window_from_lobes(derive_lobe_params(6, 0.3, 256), 256, ns, ps);
    EXPECT_EQ(wf.n_window, 6);
    EXPECT_EQ(wf.p_window, 0.3);
    for (int n : ns)
        for (double p : ps) {
            wf = fit_window_from_lobes(derive_lobe_params(n, p, 64), 64, ns, ps);
            EXPECT_EQ(wf.n_window, n);
            EXPECT_EQ(wf.p_window, p);
            EXPECT_NEAR(wf.error, 0.0, 1e-20);
        }
    const std::vector<int> one_n{7};
    const std::vector<double> one_p{0.2};
    wf = fit_window_from_lobes(LobeParams(3.0, 0.5), 256, one_n, one_p);
    EXPECT_EQ(wf.n_window, 7);
    EXPECT_EQ(wf.p_window, 0.2);
    EXPECT_THROW(fit_window_from_lobes(LobeParams(3.0, 0.5), 256, std::vector<int>{}, ps), InvalidArgument);
}

TEST(FitWindowFromLobes, TieBreaksTowardSmallerNThenP)
{
    const std::vector<int> ns{9, 7};
    const std::vector<double> ps{0.3, 0.2};
    auto same = [](int, double) { return LobeParams(10.0, 0.1); };
    const auto wf = fit_window_from_lobes(LobeParams(10.0, 0.1), ns, ps, same);
    EXPECT_EQ(wf.n_window, 7);
    EXPECT_EQ(wf.p_window, 0.2);
}

TEST(PsfKernel, TapCountsAndPeak)
{
    const WaveformParams wp(2.6, 0.6, 8, 0.1, 2.0);
    const RadarGrid grid(64, 16, 64, 1, 1, 1.5);
    const auto k = psf_kernel(wp, grid);
    EXPECT_EQ(k.range_taps.size(), 23u);
    EXPECT_EQ(k.doppler_taps.size(), 5u);
    EXPECT_EQ(k.range_taps.front().offset, -11);
    auto center = [](const std::vector<Tap>& t) {
        return static_cast<std::size_t>(std::find_if(t.begin(), t.end(), [](const Tap& x) { return x.offset == 0; }) -
                                        t.begin());
    };
    const auto i = center(k.range_taps), j = center(k.doppler_taps), l = center(k.azimuth_taps);
    EXPECT_DOUBLE_EQ(k.range_taps[i].weight, 1.0);
    EXPECT_DOUBLE_EQ(k.doppler_taps[j].weight, 1.2);
    EXPECT_DOUBLE_EQ(k.azimuth_taps[l].weight, 1.0);
    EXPECT_DOUBLE_EQ(k.at(i, j, l), 2 * 0.6);
}

TEST(PsfKernel, MatchesDirectTripleLoop)
{
    const WaveformParams wp(2.6, 0.6, 8, 0.1, 2.0);
    const RadarGrid grid(64, 16, 64, 1, 1, 1.5);
    const auto oracle_az = dft_oracle(8, 0.1, 64);
    for (auto [dr, dd, da] : {std::tuple{0.0, 0.0, 0.0}, std::tuple{0.3, -0.2, 0.45}, std::tuple{-0.5, 0.49, -0.25}}) {
        const auto k = psf_kernel(wp, grid, dr, dd, da);
        for (std::size_t i = 0; i < k.range_taps.size(); ++i)
            for (std::size_t j = 0; j < k.doppler_taps.size(); ++j)
                for (std::size_t l = 0; l < k.azimuth_taps.size(); ++l) {
                    const double x = k.range_taps[i].offset - dr;
                    const double sr = std::exp(-x * x / (2 * 2.6 * 2.6));
                    const double u = std::abs(k.doppler_taps[j].offset - dd) / 2.0;
                    const double sd = 0.6 * std::max({1 - u, 2 - 4 * u, 0.0});
                    // Linear interpolation of the oracle spectrum at offset - da.
                    const double pos = k.azimuth_taps[l].offset - da + 32;
                    const double fl = std::floor(pos);
                    const auto i0 = static_cast<long>(fl);
                    auto at = [&](long q) { return q >= 0 && q < 64 ? oracle_az[static_cast<std::size_t>(q)] : 0.0; };
                    const double sa = (1 - (pos - fl)) * at(i0) + (pos - fl) * at(i0 + 1);
                    ASSERT_NEAR(k.at(i, j, l), sr * sd * sa, 1e-10);
                }
    }
}

TEST(PsfKernel, SymmetryNonNegativityAndTruncation)
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 30; ++t) {
        const WaveformParams wp(testutil::uni(rng, 0.5, 4), testutil::uni(rng, 0.1, 1), 6 + t % 5, 0.1 * (t % 4),
                                testutil::uni(rng, 0.5, 4));
        const RadarGrid grid(64, 16, 128, 1, 1, 1.5);
        const auto k0 = psf_kernel(wp, grid);
        for (std::size_t i = 0; i < k0.range_taps.size(); ++i)
            EXPECT_EQ(k0.range_taps[i].weight, k0.range_taps[k0.range_taps.size() - 1 - i].weight);
        for (std::size_t i = 0; i < k0.doppler_taps.size(); ++i)
            EXPECT_EQ(k0.doppler_taps[i].weight, k0.doppler_taps[k0.doppler_taps.size() - 1 - i].weight);

        const auto k = psf_kernel(wp, grid, testutil::uni(rng, -0.5, 0.5), testutil::uni(rng, -0.5, 0.5),
                                  testutil::uni(rng, -0.5, 0.5));
        for (const auto* taps : {&k.range_taps, &k.doppler_taps, &k.azimuth_taps}) {
            ASSERT_FALSE(taps->empty());
            for (const auto& tp : *taps) {
                EXPECT_TRUE(std::isfinite(tp.weight));
                EXPECT_GE(tp.weight, 0.0);
            }
        }
        double peak = 0;
        for (const auto& tp : k.azimuth_taps) peak = std::max(peak, tp.weight);
        EXPECT_GE(k.azimuth_taps.front().weight, kAzimuthTruncation * peak);
        EXPECT_GE(k.azimuth_taps.back().weight, kAzimuthTruncation * peak);
    }
}
