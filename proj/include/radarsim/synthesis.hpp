#pragma once

// Radar cube synthesis: the cube is the intensity-weighted sum of one
// separable point spread function per reflector, scene and noise alike.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "radarsim/cube.hpp"
#include "radarsim/geometry.hpp"
#include "radarsim/psf.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

/// Random noise reflectors. Intensities are log-uniform on
/// [intensity_min, intensity_max]; uniform on [0, intensity_max] when
/// intensity_min is 0.
struct NoiseConfig {
    std::size_t count = 2000;
    double intensity_min = 0.001;
    double intensity_max = 0.05;
    std::uint64_t seed = 0;

    void validate() const
    {
        detail::require(std::isfinite(intensity_min) && std::isfinite(intensity_max),
                        "NoiseConfig: intensities must be finite");
        detail::require(intensity_min >= 0 && intensity_min <= intensity_max,
                        "NoiseConfig: need 0 <= intensity_min <= intensity_max");
    }

    /// Default noise level: [0.001, 0.05] times the peak scene intensity.
    static NoiseConfig relative_to(double peak_intensity, std::size_t count = 2000, std::uint64_t seed = 0,
                                   double lo = 0.001, double hi = 0.05)
    {
        return NoiseConfig{count, lo * peak_intensity, hi * peak_intensity, seed};
    }
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline std::vector<ReflectionPoint> sample_noise_points(const CubeShape& shape, const NoiseConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::vector<ReflectionPoint> out;
    out.reserve(cfg.count);
    const bool log_uniform = cfg.intensity_min > 0;
    const double lmin = log_uniform ? std::log(cfg.intensity_min) : 0.0;
    const double lmax = log_uniform ? std::log(cfg.intensity_max) : 0.0;
    for (std::size_t i = 0; i < cfg.count; ++i) {
        const double r = detail::uniform01(rng) * static_cast<double>(shape.n_range);
        const double d = detail::uniform01(rng) * static_cast<double>(shape.n_doppler);
        const double a = detail::uniform01(rng) * static_cast<double>(shape.n_azimuth);
        const double u = detail::uniform01(rng);
        double intensity = log_uniform ? std::exp(lmin + u * (lmax - lmin)) : u * cfg.intensity_max;
        intensity = std::clamp(intensity, cfg.intensity_min, cfg.intensity_max);
        out.emplace_back(r, d, a, intensity, PointKind::Noise);
    }
    return out;
}

inline std::vector<ReflectionPoint> sample_noise_points(const RadarGrid& grid, const NoiseConfig& cfg)
{
    return sample_noise_points(grid.shape(), cfg);
}

namespace detail {

struct Placement {
    long base = 0;
    double delta = 0;
};

inline Placement place(double x)
{
    const double b = std::floor(x + 0.5);
    return {static_cast<long>(b), x - b};
}

}  // namespace detail

/// Reference synthesis. Every cell of every kernel support is evaluated
/// directly from the three slice functions. Accumulation follows input order.
template <typename T = float>
BasicRadarCube<T> synthesize_naive(std::span<const ReflectionPoint> points, const WaveformParams& params,
                                   const CubeShape& shape)
{
    detail::check_inside(points, shape, "synthesize_naive");
    std::vector<double> acc(shape.cells(), 0.0);
    const AzimuthSpectrum spec(params.n_window(), params.p_window(), shape.n_azimuth);
    const auto n_r = static_cast<long>(shape.n_range);
    const auto n_d = static_cast<long>(shape.n_doppler);
    const auto n_a = static_cast<long>(shape.n_azimuth);
    const double inv2s2 = 1.0 / (2.0 * params.sigma() * params.sigma());

    for (const auto& p : points) {
        const auto pr = detail::place(p.r_bin());
        const auto pd = detail::place(p.d_bin());
        const auto pa = detail::place(p.a_bin());
        const SeparableKernel support = psf_kernel(params, spec, pr.delta, pd.delta, pa.delta);
        const auto az = eval_azimuth_profile(params.n_window(), params.p_window(), shape.n_azimuth, p.a_bin());
        for (const auto& tr : support.range_taps) {
            const long r = pr.base + tr.offset;
            if (r < 0 || r >= n_r) continue;
            for (const auto& td : support.doppler_taps) {
                const long d = pd.base + td.offset;
                if (d < 0 || d >= n_d) continue;
                for (const auto& ta : support.azimuth_taps) {
                    const long a = pa.base + ta.offset;
                    if (a < 0 || a >= n_a) continue;
                    const double x = static_cast<double>(r) - p.r_bin();
                    const double sr = std::exp(-x * x * inv2s2);
                    const double sd =
                        params.g() * doppler_template((static_cast<double>(d) - p.d_bin()) / params.s_doppler());
                    const double sa = az[static_cast<std::size_t>(a)];
                    acc[static_cast<std::size_t>((r * n_d + d) * n_a + a)] += p.intensity() * sr * sd * sa;
                }
            }
        }
    }
    return detail::finish_cube<T>(shape, acc);
}

template <typename T = float>
BasicRadarCube<T> synthesize_naive(std::span<const ReflectionPoint> points, const WaveformParams& params,
                                   const RadarGrid& grid)
{
    return synthesize_naive<T>(points, params, grid.shape());
}

namespace detail {

/// Per-point taps clipped to the cube, ready for accumulation.
struct PreparedPoint {
    long r0 = 0;           // first range bin
    long d0 = 0;           // first doppler bin
    long a0 = 0;           // first azimuth bin
    std::vector<double> range;    // I * S_R per range bin
    std::vector<double> doppler;  // S_D per doppler bin
    std::size_t az_offset = 0;    // into the shared azimuth row buffer
    std::size_t az_len = 0;
};

}  // namespace detail

/// Fast synthesis. The azimuth spectrum is computed once and shared by every
/// point; each point then contributes an outer product of precomputed
/// range, Doppler and azimuth taps restricted to the cube. Range rows are
/// split across `threads` workers, and every cell still receives its terms in
/// input order, so the output does not depend on the thread count.
template <typename T = float>
BasicRadarCube<T> synthesize_fast(std::span<const ReflectionPoint> points, const WaveformParams& params,
                                  const CubeShape& shape, unsigned threads = 1)
{
    detail::check_inside(points, shape, "synthesize_fast");
    std::vector<double> acc(shape.cells(), 0.0);
    if (points.empty()) return detail::finish_cube<T>(shape, acc);

    const AzimuthSpectrum spec(params.n_window(), params.p_window(), shape.n_azimuth);
    const auto n_r = static_cast<long>(shape.n_range);
    const auto n_d = static_cast<long>(shape.n_doppler);
    const auto n_a = static_cast<long>(shape.n_azimuth);

    std::vector<detail::PreparedPoint> prepared;
    prepared.reserve(points.size());
    std::vector<double> az_rows;
    for (const auto& p : points) {
        const auto pr = detail::place(p.r_bin());
        const auto pd = detail::place(p.d_bin());
        const auto pa = detail::place(p.a_bin());
        const auto rt = detail::range_taps(params.sigma(), pr.delta);
        const auto dt = detail::doppler_taps(params.g(), params.s_doppler(), pd.delta);
        const auto at = detail::azimuth_taps(spec, pa.delta);

        detail::PreparedPoint pp;
        for (const auto& t : rt) {
            const long r = pr.base + t.offset;
            if (r < 0 || r >= n_r) continue;
            if (pp.range.empty()) pp.r0 = r;
            pp.range.push_back(p.intensity() * t.weight);
        }
        for (const auto& t : dt) {
            const long d = pd.base + t.offset;
            if (d < 0 || d >= n_d) continue;
            if (pp.doppler.empty()) pp.d0 = d;
            pp.doppler.push_back(t.weight);
        }
        pp.az_offset = az_rows.size();
        for (const auto& t : at) {
            const long a = pa.base + t.offset;
            if (a < 0 || a >= n_a) continue;
            if (az_rows.size() == pp.az_offset) pp.a0 = a;
            az_rows.push_back(t.weight);
        }
        pp.az_len = az_rows.size() - pp.az_offset;
        if (!pp.range.empty() && !pp.doppler.empty() && pp.az_len > 0) prepared.push_back(std::move(pp));
    }

    auto accumulate = [&](long r_begin, long r_end) {
        for (const auto& pp : prepared) {
            const long r_lo = std::max(pp.r0, r_begin);
            const long r_hi = std::min(pp.r0 + static_cast<long>(pp.range.size()), r_end);
            if (r_lo >= r_hi) continue;
            const double* az = az_rows.data() + pp.az_offset;
            for (long r = r_lo; r < r_hi; ++r) {
                const double wr = pp.range[static_cast<std::size_t>(r - pp.r0)];
                for (std::size_t j = 0; j < pp.doppler.size(); ++j) {
                    const double w = wr * pp.doppler[j];
                    if (w == 0.0) continue;
                    const long d = pp.d0 + static_cast<long>(j);
                    double* row = acc.data() + (r * n_d + d) * n_a + pp.a0;
                    for (std::size_t k = 0; k < pp.az_len; ++k) row[k] += w * az[k];
                }
            }
        }
    };

    const unsigned workers = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(n_r));
    if (workers == 1) {
        accumulate(0, n_r);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const long b = n_r * static_cast<long>(w) / static_cast<long>(workers);
            const long e = n_r * static_cast<long>(w + 1) / static_cast<long>(workers);
            pool.emplace_back(accumulate, b, e);
        }
        for (auto& t : pool) t.join();
    }
    return detail::finish_cube<T>(shape, acc);
}

template <typename T = float>
BasicRadarCube<T> synthesize_fast(std::span<const ReflectionPoint> points, const WaveformParams& params,
                                  const RadarGrid& grid, unsigned threads = 1)
{
    return synthesize_fast<T>(points, params, grid.shape(), threads);
}

struct SceneSynthesis {
    RadarCube cube;
    ScenePointSet scene_points;
    std::vector<ReflectionPoint> points;  ///< scene points followed by noise points
};

/// Projects actors, appends sampled noise reflectors and synthesizes.
inline SceneSynthesis synthesize_scene(std::span<const ActorPoint> actors, const SensorPose& pose,
                                       const RadarGrid& grid, const WaveformParams& params, const NoiseConfig& noise,
                                       unsigned threads = 1, double intensity_scale = kDefaultIntensityScale)
{
    auto points = project_to_bins(actors, pose, grid, intensity_scale);
    auto scene = scene_point_set(points, grid.shape());
    auto noise_points = sample_noise_points(grid, noise);
    points.insert(points.end(), noise_points.begin(), noise_points.end());
    auto cube = synthesize_fast<float>(points, params, grid, threads);
    return {std::move(cube), std::move(scene), std::move(points)};
}

/// Scene-only intensity peak of a point list (0 when there are no scene points).
inline double peak_scene_intensity(std::span<const ReflectionPoint> points)
{
    double m = 0;
    for (const auto& p : points)
        if (p.kind() == PointKind::Scene) m = std::max(m, p.intensity());
    return m;
}

}  // namespace radarsim
