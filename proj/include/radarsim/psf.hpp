#pragma once

// One-dimensional slice functions of the standard reflection signal and the
// truncated separable kernel built from them.
//
//   range    S_R(r) = exp(-(r - r0)^2 / (2 sigma^2))
//   doppler  S_D(d) = g * max{1 - u, 2 - 4u, 0},  u = |d - d0| / s_doppler
//   azimuth  S_A(a) = |DFT((1 - p) - p cos(2 pi n / (N - 1)))| centred on a0
//
// S_R and S_A peak at 1, S_D peaks at 2g.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "radarsim/error.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

inline std::vector<double> eval_range_profile(double sigma, double center, std::span<const double> offsets)
{
    detail::require(sigma > 0 && std::isfinite(sigma), "eval_range_profile: sigma must be > 0");
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> out(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double x = offsets[i] - center;
        out[i] = std::exp(-x * x * inv);
    }
    return out;
}

/// Doppler template with unit gradient, as a function of the scaled distance u.
inline double doppler_template(double u)
{
    u = std::abs(u);
    return std::max({1.0 - u, 2.0 - 4.0 * u, 0.0});
}

inline std::vector<double> eval_doppler_profile(double g, double s_doppler, double center,
                                                std::span<const double> offsets)
{
    detail::require(g > 0 && std::isfinite(g), "eval_doppler_profile: g must be > 0");
    detail::require(s_doppler > 0 && std::isfinite(s_doppler), "eval_doppler_profile: s_doppler must be > 0");
    std::vector<double> out(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) out[i] = g * doppler_template((offsets[i] - center) / s_doppler);
    return out;
}

/// (1 - p) - p cos(2 pi n / (N - 1)) for n = 0 .. N-1.
inline std::vector<double> window_samples(int n_window, double p_window)
{
    detail::require(n_window >= 3, "window_samples: n_window must be >= 3");
    detail::require(p_window >= 0 && p_window < 1, "window_samples: p_window must lie in [0, 1)");
    std::vector<double> w(static_cast<std::size_t>(n_window));
    const double den = static_cast<double>(n_window - 1);
    for (int n = 0; n < n_window; ++n)
        w[static_cast<std::size_t>(n)] = (1.0 - p_window) - p_window * std::cos(2.0 * std::numbers::pi * n / den);
    return w;
}

/// Normalized, fft-shifted magnitude spectrum of the zero-padded azimuth
/// window. Index pad/2 holds DC. Also provides the linearly interpolated
/// continuous profile used for fractional centring.
class AzimuthSpectrum {
public:
    AzimuthSpectrum(int n_window, double p_window, std::size_t pad_length)
    {
        detail::require(n_window >= 3, "AzimuthSpectrum: n_window must be >= 3");
        detail::require(p_window >= 0 && p_window < 1, "AzimuthSpectrum: p_window must lie in [0, 1)");
        if (pad_length < static_cast<std::size_t>(n_window))
            throw InvalidArgument("AzimuthSpectrum: pad_length must be >= n_window");

        const auto w = window_samples(n_window, p_window);
        const std::size_t pad = pad_length;
        half_ = static_cast<std::ptrdiff_t>(pad / 2);
        values_.assign(pad, 0.0);
        // Only the first N samples of the padded sequence are nonzero, so the
        // transform is a direct O(N * pad) sum. Phases are reduced mod pad
        // before scaling to keep them exact.
        for (std::size_t k = 0; k < pad; ++k) {
            double re = 0, im = 0;
            for (std::size_t n = 0; n < w.size(); ++n) {
                const double ph = 2.0 * std::numbers::pi * static_cast<double>((k * n) % pad) / static_cast<double>(pad);
                re += w[n] * std::cos(ph);
                im -= w[n] * std::sin(ph);
            }
            const std::size_t j = (k + static_cast<std::size_t>(half_)) % pad;
            values_[j] = std::hypot(re, im);
        }
        const double peak = *std::max_element(values_.begin(), values_.end());
        for (auto& v : values_) v /= peak;
    }

    std::size_t pad_length() const { return values_.size(); }
    std::ptrdiff_t dc_index() const { return half_; }
    std::span<const double> values() const { return values_; }

    /// Profile value at a real offset x (bins) from the peak, by linear
    /// interpolation. Zero outside the padded spectrum.
    double at_offset(double x) const
    {
        const double pos = x + static_cast<double>(half_);
        const double fl = std::floor(pos);
        const double t = pos - fl;
        const auto i0 = static_cast<std::ptrdiff_t>(fl);
        return (1.0 - t) * sample(i0) + (t > 0 ? t * sample(i0 + 1) : 0.0);
    }

private:
    double sample(std::ptrdiff_t i) const
    {
        return (i >= 0 && i < static_cast<std::ptrdiff_t>(values_.size())) ? values_[static_cast<std::size_t>(i)] : 0.0;
    }

    std::vector<double> values_;
    std::ptrdiff_t half_ = 0;
};

/// Azimuth profile of length pad_length with its peak moved to `center`.
inline std::vector<double> eval_azimuth_profile(int n_window, double p_window, std::size_t pad_length, double center)
{
    detail::require(std::isfinite(center), "eval_azimuth_profile: center must be finite");
    const AzimuthSpectrum spec(n_window, p_window, pad_length);
    std::vector<double> out(pad_length);
    for (std::size_t j = 0; j < pad_length; ++j) out[j] = spec.at_offset(static_cast<double>(j) - center);
    return out;
}

namespace detail {

/// Real amplitude of the window's transform at a continuous frequency k
/// (in bins of a pad-point DFT), with the linear phase of the symmetric
/// window removed.
inline double window_amplitude(std::span<const double> w, double k, double pad)
{
    const double mid = 0.5 * static_cast<double>(w.size() - 1);
    double s = 0;
    for (std::size_t n = 0; n < w.size(); ++n)
        s += w[n] * std::cos(2.0 * std::numbers::pi * k * (static_cast<double>(n) - mid) / pad);
    return s;
}

template <typename F>
double golden_section(F&& f, double lo, double hi, bool maximize, double tol = 1e-12)
{
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    auto cost = [&](double x) { return maximize ? -f(x) : f(x); };
    double a = lo, b = hi;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = cost(c), fd = cost(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = cost(d);
        }
    }
    return 0.5 * (a + b);
}

template <typename F>
double bisect_root(F&& f, double lo, double hi)
{
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;  // adjacent doubles
        const double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // the endpoint closer to the root
    return std::abs(flo) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace detail

/// Main-lobe width and peak ratio of the continuous window spectrum.
///
/// Rs is the null-to-null distance, in bins of a pad_length-point transform,
/// between the first minima either side of DC. lambda is the largest local
/// maximum outside the main lobe relative to the DC peak, 0 when there is
/// none.
inline LobeParams derive_lobe_params(int n_window, double p_window, std::size_t pad_length)
{
    detail::require(pad_length >= static_cast<std::size_t>(n_window), "derive_lobe_params: pad_length must be >= n_window");
    const auto w = window_samples(n_window, p_window);
    const double pad = static_cast<double>(pad_length);
    auto amp = [&](double k) { return detail::window_amplitude(w, k, pad); };
    auto mag = [&](double k) { return std::abs(amp(k)); };

    const double peak = mag(0.0);
    const double nyquist = 0.5 * pad;
    const double step = pad / (static_cast<double>(n_window) * 256.0);

    // Walk out from DC to the first minimum of |A|.
    double k_null = nyquist;
    double prev_k = 0, prev_a = amp(0.0);
    double prev_m = std::abs(prev_a);
    bool found = false;
    for (double k = step; k <= nyquist + 0.5 * step; k += step) {
        const double kk = std::min(k, nyquist);
        const double a = amp(kk);
        const double m = std::abs(a);
        if ((a < 0) != (prev_a < 0)) {
            k_null = detail::bisect_root(amp, prev_k, kk);
            found = true;
            break;
        }
        if (m > prev_m) {
            k_null = detail::golden_section(mag, std::max(0.0, prev_k - step), kk, false);
            found = true;
            break;
        }
        prev_k = kk;
        prev_a = a;
        prev_m = m;
    }
    if (!found) return LobeParams(2.0 * nyquist, 0.0);

    // Largest local maximum between the first null and Nyquist. The spectrum
    // is symmetric about both DC and Nyquist, so this covers every sidelobe.
    double best = 0;
    prev_k = k_null;
    prev_m = mag(k_null);
    bool rising = false;
    for (double k = k_null + step; k <= nyquist + 0.5 * step; k += step) {
        const double kk = std::min(k, nyquist);
        const double m = mag(kk);
        if (m > prev_m) {
            rising = true;
        } else if (rising && m < prev_m) {
            const double km = detail::golden_section(mag, prev_k - step, kk, true);
            best = std::max(best, mag(km));
            rising = false;
        }
        prev_k = kk;
        prev_m = m;
    }
    if (rising) best = std::max(best, mag(nyquist));
    const double lambda = std::min(best / peak, std::nextafter(1.0, 0.0));
    return LobeParams(2.0 * k_null, lambda);
}

/// Lobe parameters measured from an integer-sampled profile.
///
/// The peak is the first global maximum. Each first minimum is located by
/// walking outward while samples strictly decrease, then refined to sub-bin
/// precision by intersecting the two straight flanks of the null.
inline LobeParams measure_lobes(std::span<const double> s)
{
    detail::require(s.size() >= 3, "measure_lobes: need at least 3 samples");
    const auto peak_it = std::max_element(s.begin(), s.end());
    const auto pk = static_cast<std::size_t>(peak_it - s.begin());
    const double peak = *peak_it;
    detail::require(peak > 0, "measure_lobes: profile is identically zero");

    std::size_t lm = pk;
    while (lm > 0 && s[lm - 1] < s[lm]) --lm;
    std::size_t rm = pk;
    while (rm + 1 < s.size() && s[rm + 1] < s[rm]) ++rm;

    auto refine = [&](std::size_t m) {
        if (m == 0 || m + 1 >= s.size()) return static_cast<double>(m);
        const double y0 = s[m - 1], y1 = s[m], y2 = s[m + 1];
        double shift = 0;
        if (y0 > y2) {
            const double c = y0 - y1;
            if (c > 0) shift = y1 / c;
        } else {
            const double c = y2 - y1;
            if (c > 0) shift = -y1 / c;
        }
        return static_cast<double>(m) + std::clamp(shift, -0.5, 0.5);
    };
    const double rs = std::max(refine(rm) - refine(lm), std::numeric_limits<double>::min());

    double best = 0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        if (k >= lm && k <= rm) continue;
        if (s[k] > s[k - 1] && s[k] >= s[k + 1]) best = std::max(best, s[k]);
    }
    return LobeParams(rs, std::min(best / peak, std::nextafter(1.0, 0.0)));
}

struct WindowFit {
    int n_window = 0;
    double p_window = 0;
    double error = 0;  ///< squared relative error of (Rs, lambda) at the optimum
};

/// Grid search for the window (N, p) whose lobe parameters best match
/// `target`. `measure(N, p)` returns the lobes of a candidate; by default the
/// continuous spectrum is used. Ties go to smaller N, then smaller p.
template <typename Measure>
WindowFit fit_window_from_lobes(const LobeParams& target, std::span<const int> n_values,
                                std::span<const double> p_values, Measure&& measure)
{
    detail::require(!n_values.empty() && !p_values.empty(), "fit_window_from_lobes: search ranges must be non-empty");
    std::vector<int> ns(n_values.begin(), n_values.end());
    std::vector<double> ps(p_values.begin(), p_values.end());
    std::sort(ns.begin(), ns.end());
    std::sort(ps.begin(), ps.end());

    const double lam_scale = target.lambda() > 0 ? target.lambda() : 1.0;
    WindowFit best{ns.front(), ps.front(), std::numeric_limits<double>::infinity()};
    for (int n : ns) {
        for (double p : ps) {
            const LobeParams c = measure(n, p);
            const double er = (c.rs() - target.rs()) / target.rs();
            const double el = (c.lambda() - target.lambda()) / lam_scale;
            const double err = er * er + el * el;
            if (err < best.error) best = {n, p, err};
        }
    }
    return best;
}

inline WindowFit fit_window_from_lobes(const LobeParams& target, std::size_t pad_length, std::span<const int> n_values,
                                       std::span<const double> p_values)
{
    return fit_window_from_lobes(target, n_values, p_values,
                                 [&](int n, double p) { return derive_lobe_params(n, p, pad_length); });
}

struct Tap {
    int offset = 0;
    double weight = 0;
};

/// Truncated separable kernel. The full kernel at (i, j, k) is
/// range_taps[i].weight * doppler_taps[j].weight * azimuth_taps[k].weight,
/// placed at the integer base bin plus the tap offsets.
struct SeparableKernel {
    std::vector<Tap> range_taps;
    std::vector<Tap> doppler_taps;
    std::vector<Tap> azimuth_taps;
    double delta_r = 0;
    double delta_d = 0;
    double delta_a = 0;

    double at(std::size_t i, std::size_t j, std::size_t k) const
    {
        return range_taps[i].weight * doppler_taps[j].weight * azimuth_taps[k].weight;
    }
};

/// Relative level below which azimuth tails are cut.
inline constexpr double kAzimuthTruncation = 1e-4;

inline int range_half_width(double sigma) { return static_cast<int>(std::ceil(4.0 * sigma)); }
inline int doppler_half_width(double s_doppler) { return static_cast<int>(std::ceil(s_doppler)); }

namespace detail {

inline std::vector<Tap> range_taps(double sigma, double delta)
{
    const int k = range_half_width(sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::vector<Tap> taps;
    taps.reserve(static_cast<std::size_t>(2 * k + 1));
    for (int o = -k; o <= k; ++o) {
        const double x = o - delta;
        taps.push_back({o, std::exp(-x * x * inv)});
    }
    return taps;
}

inline std::vector<Tap> doppler_taps(double g, double s_doppler, double delta)
{
    const int k = doppler_half_width(s_doppler);
    std::vector<Tap> taps;
    taps.reserve(static_cast<std::size_t>(2 * k + 1));
    for (int o = -k; o <= k; ++o) taps.push_back({o, g * doppler_template((o - delta) / s_doppler)});
    return taps;
}

/// Azimuth taps over the whole padded spectrum, with both tails cut where
/// they fall below kAzimuthTruncation of the largest tap.
inline std::vector<Tap> azimuth_taps(const AzimuthSpectrum& spec, double delta)
{
    const auto pad = static_cast<int>(spec.pad_length());
    const auto h = static_cast<int>(spec.dc_index());
    std::vector<Tap> taps;
    taps.reserve(static_cast<std::size_t>(pad + 1));
    double peak = 0;
    for (int o = -h; o <= pad - h; ++o) {
        const double v = spec.at_offset(o - delta);
        taps.push_back({o, v});
        peak = std::max(peak, v);
    }
    const double cut = kAzimuthTruncation * peak;
    auto lo = std::find_if(taps.begin(), taps.end(), [&](const Tap& t) { return t.weight >= cut; });
    auto hi = std::find_if(taps.rbegin(), taps.rend(), [&](const Tap& t) { return t.weight >= cut; }).base();
    return {lo, hi};
}

}  // namespace detail

/// Kernel of one reflector with the given sub-bin offsets from its base bin.
inline SeparableKernel psf_kernel(const WaveformParams& params, const AzimuthSpectrum& spectrum, double delta_r,
                                  double delta_d, double delta_a)
{
    detail::require(detail::finite_all({delta_r, delta_d, delta_a}), "psf_kernel: offsets must be finite");
    SeparableKernel k;
    k.delta_r = delta_r;
    k.delta_d = delta_d;
    k.delta_a = delta_a;
    k.range_taps = detail::range_taps(params.sigma(), delta_r);
    k.doppler_taps = detail::doppler_taps(params.g(), params.s_doppler(), delta_d);
    k.azimuth_taps = detail::azimuth_taps(spectrum, delta_a);
    return k;
}

inline SeparableKernel psf_kernel(const WaveformParams& params, const RadarGrid& grid, double delta_r = 0,
                                  double delta_d = 0, double delta_a = 0)
{
    const AzimuthSpectrum spec(params.n_window(), params.p_window(), grid.n_azimuth());
    return psf_kernel(params, spec, delta_r, delta_d, delta_a);
}

}  // namespace radarsim
