#pragma once

// Recovers waveform parameters from a cube: per isolated peak, 1D slices
// through the peak are fitted axis by axis and the per-peak estimates are
// aggregated.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "radarsim/cube.hpp"
#include "radarsim/geometry.hpp"
#include "radarsim/psf.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

enum class Aggregation { Median, Mean };

struct FitOptions {
    std::vector<int> n_values{6, 7, 8, 9, 10};
    std::vector<double> p_values{0.1, 0.2, 0.3};
    double sigma_max = 2.8;        ///< sets the range half window ceil(4 sigma_max)
    double s_doppler_min = 0.25;
    double s_doppler_max = 4.0;    ///< sets the Doppler half window ceil(s_doppler_max)
    double range_threshold = 0.1;  ///< range samples used by the log-parabola fit, relative to the peak
    double isolation_ratio = 0.05; ///< weaker neighbours than this never disqualify a peak
    double sidelobe_ratio = 0.3;   ///< same-row detections up to this ratio are treated as sidelobes
    /// Peak intensities are the true reflector intensities, which makes g
    /// identifiable. Cell values (e.g. CFAR output) leave g undetermined,
    /// because a cube cannot separate g from the reflector intensity.
    bool reference_intensities = true;
    Aggregation aggregation = Aggregation::Median;
};

/// RMS of slice residuals relative to the slice peak, per axis.
struct FitResiduals {
    double range = 0;
    double doppler = 0;
    double azimuth = 0;
};

struct PeakFit {
    std::size_t peak_index = 0;
    BinIndex bin;
    double sigma = 0;
    double r_center = 0;
    int n_window = 0;
    double p_window = 0;
    LobeParams lobes{1.0, 0.0};
    double a_center = 0;
    double doppler_amplitude = 0;
    double d_center = 0;
    double s_doppler = 0;
    std::optional<double> g;
    FitResiduals residuals;
};

struct WaveformFit {
    double sigma = 0;
    std::optional<double> g;
    int n_window = 0;
    double p_window = 0;
    double s_doppler = 0;
    LobeParams lobes{1.0, 0.0};
    FitResiduals residuals;
    std::vector<PeakFit> peaks;

    /// Fitted parameters; throws when g could not be identified.
    WaveformParams params() const
    {
        if (!g) throw DataError("fit: g is undetermined without reference intensities");
        return {sigma, *g, n_window, p_window, s_doppler};
    }
};

namespace detail {

struct RangeFit {
    double sigma, center, residual;
};

template <typename T>
std::optional<RangeFit> fit_range_slice(const BasicRadarCube<T>& cube, const BinIndex& b, int half, double threshold)
{
    const auto n = static_cast<long>(cube.shape().n_range);
    const double v0 = cube(b.r, b.d, b.a);
    if (!(v0 > 0)) return std::nullopt;
    const long c = static_cast<long>(b.r);
    long lo = c, hi = c;
    while (lo - 1 >= 0 && c - (lo - 1) <= half && cube(static_cast<std::size_t>(lo - 1), b.d, b.a) >= threshold * v0) --lo;
    while (hi + 1 < n && (hi + 1) - c <= half && cube(static_cast<std::size_t>(hi + 1), b.d, b.a) >= threshold * v0) ++hi;
    if (hi - lo + 1 < 3) return std::nullopt;

    // Weighted least squares of ln v = c0 + c1 t + c2 t^2 with weights v^2.
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (long r = lo; r <= hi; ++r) {
        const double v = cube(static_cast<std::size_t>(r), b.d, b.a);
        if (!(v > 0)) return std::nullopt;
        const double t = static_cast<double>(r - c);
        const double w = v * v;
        const Eigen::Vector3d row(1.0, t, t * t);
        ata += w * row * row.transpose();
        atb += w * std::log(v) * row;
    }
    const Eigen::Vector3d coef = ata.ldlt().solve(atb);
    if (!(coef[2] < 0)) return std::nullopt;
    const double sigma = std::sqrt(-1.0 / (2.0 * coef[2]));
    const double center = static_cast<double>(c) - coef[1] / (2.0 * coef[2]);
    double ss = 0;
    for (long r = lo; r <= hi; ++r) {
        const double t = static_cast<double>(r - c);
        const double model = std::exp(coef[0] + coef[1] * t + coef[2] * t * t);
        const double e = (cube(static_cast<std::size_t>(r), b.d, b.a) - model) / v0;
        ss += e * e;
    }
    return RangeFit{sigma, center, std::sqrt(ss / static_cast<double>(hi - lo + 1))};
}

struct DopplerFit {
    double amplitude, center, s_doppler, residual;
};

/// Least-squares fit of A * template(|d - c| / s) to the Doppler slice. The
/// amplitude is solved in closed form; (c, s) by a coarse grid followed by a
/// shrinking pattern search.
template <typename T>
std::optional<DopplerFit> fit_doppler_slice(const BasicRadarCube<T>& cube, const BinIndex& b, int half, double s_min,
                                            double s_max)
{
    const auto n = static_cast<long>(cube.shape().n_doppler);
    const long c0 = static_cast<long>(b.d);
    std::vector<double> pos, val;
    for (long d = std::max(0L, c0 - half); d <= std::min(n - 1, c0 + half); ++d) {
        pos.push_back(static_cast<double>(d));
        val.push_back(cube(b.r, static_cast<std::size_t>(d), b.a));
    }
    const double vpk = cube(b.r, b.d, b.a);
    if (!(vpk > 0) || pos.size() < 3) return std::nullopt;

    auto evaluate = [&](double c, double s, double& amp) {
        double tt = 0, tv = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            const double t = doppler_template((pos[i] - c) / s);
            tt += t * t;
            tv += t * val[i];
        }
        amp = tt > 0 ? tv / tt : 0.0;
        double ss = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            const double e = val[i] - amp * doppler_template((pos[i] - c) / s);
            ss += e * e;
        }
        return ss;
    };

    double best_c = static_cast<double>(c0), best_s = 0.5 * (s_min + s_max), best_a = 0;
    double best = std::numeric_limits<double>::infinity();
    const double cs = 0.05;
    for (double dc = -1.0; dc <= 1.0 + 1e-12; dc += cs) {
        for (double s = s_min; s <= s_max + 1e-12; s += cs) {
            double a;
            const double e = evaluate(static_cast<double>(c0) + dc, s, a);
            if (e < best) {
                best = e;
                best_c = static_cast<double>(c0) + dc;
                best_s = s;
                best_a = a;
            }
        }
    }
    for (double step = cs; step > 1e-10; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int k = 0; k < 8; ++k) {
                static constexpr int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
                const double c = best_c + dirs[k][0] * step;
                const double s = std::clamp(best_s + dirs[k][1] * step, s_min, s_max);
                double a;
                const double e = evaluate(c, s, a);
                if (e < best) {
                    best = e;
                    best_c = c;
                    best_s = s;
                    best_a = a;
                    improved = true;
                }
            }
        }
    }
    return DopplerFit{best_a, best_c, best_s, std::sqrt(best / static_cast<double>(pos.size())) / vpk};
}

struct AzimuthFit {
    int n_window;
    double p_window;
    LobeParams lobes;
    double center;
    double amplitude;
    double residual;
};

inline double profile_residual(std::span<const double> slice, const AzimuthSpectrum& spec, double center, double& amp)
{
    double tt = 0, tv = 0;
    for (std::size_t j = 0; j < slice.size(); ++j) {
        const double t = spec.at_offset(static_cast<double>(j) - center);
        tt += t * t;
        tv += t * slice[j];
    }
    amp = tt > 0 ? tv / tt : 0.0;
    double ss = 0;
    for (std::size_t j = 0; j < slice.size(); ++j) {
        const double e = slice[j] - amp * spec.at_offset(static_cast<double>(j) - center);
        ss += e * e;
    }
    return ss;
}

/// Azimuth slice: the lobes are measured directly, and (N, p) is the search
/// candidate whose profile, centred identically and sampled on the same
/// lattice, measures closest. The centre is then refined by least squares
/// for the chosen window and the selection repeated once.
template <typename T>
AzimuthFit fit_azimuth_slice(const BasicRadarCube<T>& cube, const BinIndex& b, double center_guess,
                             const FitOptions& opt)
{
    const std::size_t n_a = cube.shape().n_azimuth;
    std::vector<double> slice(n_a);
    for (std::size_t a = 0; a < n_a; ++a) slice[a] = cube(b.r, b.d, a);
    const LobeParams measured = measure_lobes(slice);

    auto select = [&](double center) {
        return fit_window_from_lobes(measured, opt.n_values, opt.p_values, [&](int n, double p) {
            return measure_lobes(eval_azimuth_profile(n, p, n_a, center));
        });
    };

    double center = center_guess;
    WindowFit wf = select(center);
    double amp = 0, ss = 0;
    for (int pass = 0; pass < 2; ++pass) {
        const AzimuthSpectrum spec(wf.n_window, wf.p_window, n_a);
        auto cost = [&](double c) {
            double a;
            return profile_residual(slice, spec, c, a);
        };
        // Dense scan around the integer peak, then golden-section polish.
        const double base = static_cast<double>(b.a);
        double best_c = center, best = cost(center);
        for (int i = -100; i <= 100; ++i) {
            const double c = base + 0.01 * i;
            const double e = cost(c);
            if (e < best) {
                best = e;
                best_c = c;
            }
        }
        center = golden_section(cost, best_c - 0.01, best_c + 0.01, false, 1e-13);
        if (cost(best_c) < cost(center)) center = best_c;
        ss = profile_residual(slice, spec, center, amp);
        const WindowFit again = select(center);
        if (again.n_window == wf.n_window && again.p_window == wf.p_window) break;
        wf = again;
    }
    const double vpk = cube(b.r, b.d, b.a);
    const double rms = std::sqrt(ss / static_cast<double>(n_a)) / (vpk > 0 ? vpk : 1.0);
    return {wf.n_window, wf.p_window, measured, center, amp, rms};
}

inline double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double lower_median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

inline double mean_of(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// Indices of peaks with no comparable neighbour inside the fitting window.
/// Only scene-kind points are fitted or count as neighbours.
///
/// A neighbour disqualifies a peak when its intensity is at least
/// isolation_ratio of the peak's and it lies within twice the range and
/// Doppler half windows; azimuth is ignored because azimuth sidelobes span
/// the whole axis. Weaker detections on the peak's own row are sidelobes.
inline std::vector<std::size_t> isolated_peaks(std::span<const ReflectionPoint> peaks, const FitOptions& opt)
{
    const double hr = 2.0 * range_half_width(opt.sigma_max);
    const double hd = 2.0 * doppler_half_width(opt.s_doppler_max);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const auto& p = peaks[i];
        if (p.kind() != PointKind::Scene || !(p.intensity() > 0)) continue;
        bool ok = true;
        for (std::size_t j = 0; j < peaks.size() && ok; ++j) {
            if (j == i) continue;
            const auto& q = peaks[j];
            if (q.kind() != PointKind::Scene || q.intensity() < opt.isolation_ratio * p.intensity()) continue;
            const double dr = std::abs(q.r_bin() - p.r_bin());
            const double dd = std::abs(q.d_bin() - p.d_bin());
            if (dr > hr || dd > hd) continue;
            if (dr <= 1.0 && dd <= 1.0 && q.intensity() <= opt.sidelobe_ratio * p.intensity()) continue;
            ok = false;
        }
        if (ok) out.push_back(i);
    }
    return out;
}

/// Fits waveform parameters from the isolated peaks of `cube`.
///
/// Per peak: sigma from a weighted log-parabola on the range slice; window
/// (N, p) and lobes from the azimuth slice; g and s_doppler from the Doppler
/// template fit. g needs reference intensities (see FitOptions). Final values
/// are the median (or mean) over peaks; N and p use the lower median.
template <typename T>
WaveformFit fit_waveform_params(const BasicRadarCube<T>& cube, std::span<const ReflectionPoint> peaks,
                                const FitOptions& opt = {})
{
    detail::require(!opt.n_values.empty() && !opt.p_values.empty(), "fit_waveform_params: empty search ranges");
    detail::require(opt.s_doppler_min > 0 && opt.s_doppler_min < opt.s_doppler_max,
                    "fit_waveform_params: bad s_doppler range");
    detail::check_inside(peaks, cube.shape(), "fit_waveform_params");
    const auto& shape = cube.shape();
    const int h_r = range_half_width(opt.sigma_max);
    const int h_d = doppler_half_width(opt.s_doppler_max) + 1;

    WaveformFit result;
    for (std::size_t idx : isolated_peaks(peaks, opt)) {
        const auto& p = peaks[idx];
        const BinIndex b{detail::nearest_bin(p.r_bin(), shape.n_range), detail::nearest_bin(p.d_bin(), shape.n_doppler),
                         detail::nearest_bin(p.a_bin(), shape.n_azimuth)};
        const auto rf = detail::fit_range_slice(cube, b, h_r, opt.range_threshold);
        if (!rf) continue;
        const auto df = detail::fit_doppler_slice(cube, b, h_d, opt.s_doppler_min, opt.s_doppler_max);
        if (!df) continue;
        const auto af = detail::fit_azimuth_slice(cube, b, p.a_bin(), opt);

        PeakFit pf;
        pf.peak_index = idx;
        pf.bin = b;
        pf.sigma = rf->sigma;
        pf.r_center = rf->center;
        pf.n_window = af.n_window;
        pf.p_window = af.p_window;
        pf.lobes = af.lobes;
        pf.a_center = af.center;
        pf.doppler_amplitude = df->amplitude;
        pf.d_center = df->center;
        pf.s_doppler = df->s_doppler;
        pf.residuals = {rf->residual, df->residual, af.residual};
        if (opt.reference_intensities) {
            const AzimuthSpectrum spec(af.n_window, af.p_window, shape.n_azimuth);
            const double x = static_cast<double>(b.r) - rf->center;
            const double sr = std::exp(-x * x / (2.0 * rf->sigma * rf->sigma));
            const double sa = spec.at_offset(static_cast<double>(b.a) - af.center);
            const double den = p.intensity() * sr * sa;
            if (den > 0 && df->amplitude > 0) pf.g = df->amplitude / den;
        }
        result.peaks.push_back(pf);
    }
    if (result.peaks.empty()) throw DataError("fit_waveform_params: insufficient isolated peaks");

    auto collect = [&](auto field) {
        std::vector<double> v;
        for (const auto& pf : result.peaks) v.push_back(field(pf));
        return v;
    };
    const bool median = opt.aggregation == Aggregation::Median;
    auto agg = [&](const std::vector<double>& v) { return median ? detail::median_of(v) : detail::mean_of(v); };

    result.sigma = agg(collect([](const PeakFit& f) { return f.sigma; }));
    result.s_doppler = agg(collect([](const PeakFit& f) { return f.s_doppler; }));
    const auto ns = collect([](const PeakFit& f) { return static_cast<double>(f.n_window); });
    const auto ps = collect([](const PeakFit& f) { return f.p_window; });
    if (median) {
        result.n_window = static_cast<int>(detail::lower_median_of(ns));
        result.p_window = detail::lower_median_of(ps);
    } else {
        result.n_window = static_cast<int>(std::lround(detail::mean_of(ns)));
        const double pm = detail::mean_of(ps);
        result.p_window = *std::min_element(opt.p_values.begin(), opt.p_values.end(),
                                            [&](double a, double b) { return std::abs(a - pm) < std::abs(b - pm); });
    }
    result.lobes = LobeParams(agg(collect([](const PeakFit& f) { return f.lobes.rs(); })),
                              agg(collect([](const PeakFit& f) { return f.lobes.lambda(); })));
    result.residuals = {agg(collect([](const PeakFit& f) { return f.residuals.range; })),
                        agg(collect([](const PeakFit& f) { return f.residuals.doppler; })),
                        agg(collect([](const PeakFit& f) { return f.residuals.azimuth; }))};

    std::vector<double> gs;
    for (const auto& pf : result.peaks)
        if (pf.g) gs.push_back(*pf.g);
    if (!gs.empty()) result.g = agg(gs);
    return result;
}

}  // namespace radarsim
