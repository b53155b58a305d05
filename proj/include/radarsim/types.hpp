#pragma once

// Domain value types shared by every module. All of them validate on
// construction and are immutable afterwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "radarsim/error.hpp"

namespace radarsim {

namespace detail {

inline bool finite_all(std::initializer_list<double> xs)
{
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double rad)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(rad, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    if (w > std::numbers::pi) w -= two_pi;
    return w;
}

/// Bin counts of a cube, axis order (range, doppler, azimuth).
struct CubeShape {
    std::size_t n_range = 0;
    std::size_t n_doppler = 0;
    std::size_t n_azimuth = 0;

    std::size_t cells() const { return n_range * n_doppler * n_azimuth; }
    friend bool operator==(const CubeShape&, const CubeShape&) = default;
};

/// Bin counts plus physical resolution of each axis.
///
/// The Doppler bin floor(n_doppler / 2) is zero radial velocity. Azimuth
/// maps linearly in angle across `azimuth_fov`, centred on boresight, and
/// does not wrap.
class RadarGrid {
public:
    RadarGrid(std::size_t n_range, std::size_t n_doppler, std::size_t n_azimuth,
              double range_resolution, double doppler_resolution, double azimuth_fov)
        : shape_{n_range, n_doppler, n_azimuth},
          range_resolution_(range_resolution),
          doppler_resolution_(doppler_resolution),
          azimuth_fov_(azimuth_fov)
    {
        detail::require(n_range >= 8 && n_doppler >= 8 && n_azimuth >= 8,
                        "RadarGrid: every bin count must be >= 8");
        detail::require(detail::finite_all({range_resolution, doppler_resolution, azimuth_fov}),
                        "RadarGrid: resolutions must be finite");
        detail::require(range_resolution > 0 && doppler_resolution > 0,
                        "RadarGrid: resolutions must be strictly positive");
        detail::require(azimuth_fov > 0 && azimuth_fov <= std::numbers::pi,
                        "RadarGrid: azimuth_fov must lie in (0, pi]");
    }

    /// 256 x 64 x 256 cube over 50 m, +-13 m/s and a 90 degree field of view.
    static RadarGrid raddet_like()
    {
        return RadarGrid(256, 64, 256, 50.0 / 256.0, 0.417, std::numbers::pi / 2.0);
    }

    const CubeShape& shape() const { return shape_; }
    std::size_t n_range() const { return shape_.n_range; }
    std::size_t n_doppler() const { return shape_.n_doppler; }
    std::size_t n_azimuth() const { return shape_.n_azimuth; }
    std::size_t cells() const { return shape_.cells(); }
    double range_resolution() const { return range_resolution_; }
    double doppler_resolution() const { return doppler_resolution_; }
    double azimuth_fov() const { return azimuth_fov_; }

    double doppler_center() const { return static_cast<double>(shape_.n_doppler / 2); }
    double max_range() const { return static_cast<double>(shape_.n_range) * range_resolution_; }

    friend bool operator==(const RadarGrid&, const RadarGrid&) = default;

private:
    CubeShape shape_;
    double range_resolution_;
    double doppler_resolution_;
    double azimuth_fov_;
};

/// Radar attribute parameters of the point spread function.
///
/// sigma: range Gaussian std-dev in bins. g: Doppler gradient. n_window and
/// p_window: length and parameter of the azimuth window. s_doppler: Doppler
/// support scale in bins, the distance at which the Doppler profile reaches 0.
class WaveformParams {
public:
    WaveformParams(double sigma, double g, int n_window, double p_window, double s_doppler = 2.0)
        : sigma_(sigma), g_(g), n_window_(n_window), p_window_(p_window), s_doppler_(s_doppler)
    {
        detail::require(detail::finite_all({sigma, g, p_window, s_doppler}),
                        "WaveformParams: values must be finite");
        detail::require(sigma > 0, "WaveformParams: sigma must be > 0");
        detail::require(g > 0, "WaveformParams: g must be > 0");
        detail::require(n_window >= 3, "WaveformParams: n_window must be >= 3");
        detail::require(p_window >= 0 && p_window < 1, "WaveformParams: p_window must lie in [0, 1)");
        detail::require(s_doppler > 0, "WaveformParams: s_doppler must be > 0");
    }

    /// Average attributes measured on RADDet.
    static WaveformParams raddet_average() { return WaveformParams(2.6, 0.6, 8, 0.1, 2.0); }

    double sigma() const { return sigma_; }
    double g() const { return g_; }
    int n_window() const { return n_window_; }
    double p_window() const { return p_window_; }
    double s_doppler() const { return s_doppler_; }

    WaveformParams with_sigma(double s) const { return {s, g_, n_window_, p_window_, s_doppler_}; }
    WaveformParams with_g(double g) const { return {sigma_, g, n_window_, p_window_, s_doppler_}; }

    friend bool operator==(const WaveformParams&, const WaveformParams&) = default;

private:
    double sigma_;
    double g_;
    int n_window_;
    double p_window_;
    double s_doppler_;
};

/// Main-lobe width (null to null, azimuth bins) and peak ratio of the azimuth beam.
class LobeParams {
public:
    LobeParams(double rs, double lambda) : rs_(rs), lambda_(lambda)
    {
        detail::require(detail::finite_all({rs, lambda}), "LobeParams: values must be finite");
        detail::require(rs > 0, "LobeParams: rs must be > 0");
        detail::require(lambda >= 0 && lambda < 1, "LobeParams: lambda must lie in [0, 1)");
    }

    double rs() const { return rs_; }
    double lambda() const { return lambda_; }

private:
    double rs_;
    double lambda_;
};

enum class PointKind : std::uint8_t { Scene, Noise };

inline const char* to_string(PointKind k) { return k == PointKind::Scene ? "scene" : "noise"; }

/// A reflector at fractional (range, doppler, azimuth) bin coordinates.
class ReflectionPoint {
public:
    ReflectionPoint(double r_bin, double d_bin, double a_bin, double intensity,
                    PointKind kind = PointKind::Scene, std::optional<std::int64_t> actor_id = std::nullopt)
        : r_(r_bin), d_(d_bin), a_(a_bin), intensity_(intensity), kind_(kind), actor_id_(actor_id)
    {
        detail::require(detail::finite_all({r_bin, d_bin, a_bin, intensity}),
                        "ReflectionPoint: coordinates and intensity must be finite");
        detail::require(intensity >= 0, "ReflectionPoint: intensity must be >= 0");
        detail::require(!actor_id || kind == PointKind::Scene,
                        "ReflectionPoint: only scene points carry an actor id");
    }

    double r_bin() const { return r_; }
    double d_bin() const { return d_; }
    double a_bin() const { return a_; }
    double intensity() const { return intensity_; }
    PointKind kind() const { return kind_; }
    const std::optional<std::int64_t>& actor_id() const { return actor_id_; }

    bool inside(const CubeShape& s) const
    {
        return r_ >= 0 && r_ < static_cast<double>(s.n_range) && d_ >= 0 &&
               d_ < static_cast<double>(s.n_doppler) && a_ >= 0 && a_ < static_cast<double>(s.n_azimuth);
    }

    ReflectionPoint with_intensity(double i) const { return {r_, d_, a_, i, kind_, actor_id_}; }
    ReflectionPoint as_noise(double i) const { return {r_, d_, a_, i, PointKind::Noise, std::nullopt}; }

    friend bool operator==(const ReflectionPoint&, const ReflectionPoint&) = default;

private:
    double r_;
    double d_;
    double a_;
    double intensity_;
    PointKind kind_;
    std::optional<std::int64_t> actor_id_;
};

/// A reflector in the world frame.
struct ActorPoint {
    double x = 0;
    double y = 0;
    double vx = 0;
    double vy = 0;
    double rcs = 1.0;
    std::int64_t actor_id = 0;

    void validate() const
    {
        detail::require(detail::finite_all({x, y, vx, vy, rcs}), "ActorPoint: values must be finite");
        detail::require(rcs >= 0, "ActorPoint: rcs must be >= 0");
    }
};

/// Sensor position, heading and ego velocity in the world frame.
class SensorPose {
public:
    SensorPose() = default;
    SensorPose(double x, double y, double heading, double vx = 0, double vy = 0)
        : x_(x), y_(y), heading_(0), vx_(vx), vy_(vy)
    {
        detail::require(detail::finite_all({x, y, heading, vx, vy}), "SensorPose: values must be finite");
        heading_ = wrap_angle(heading);
    }

    double x() const { return x_; }
    double y() const { return y_; }
    double heading() const { return heading_; }
    double vx() const { return vx_; }
    double vy() const { return vy_; }

    /// Pose moved by (dx, dy) in the world frame and rotated by dheading.
    SensorPose moved(double dx, double dy, double dheading) const
    {
        return {x_ + dx, y_ + dy, heading_ + dheading, vx_, vy_};
    }

    friend bool operator==(const SensorPose&, const SensorPose&) = default;

private:
    double x_ = 0;
    double y_ = 0;
    double heading_ = 0;
    double vx_ = 0;
    double vy_ = 0;
};

struct BinIndex {
    std::size_t r = 0;
    std::size_t d = 0;
    std::size_t a = 0;

    friend auto operator<=>(const BinIndex&, const BinIndex&) = default;
};

/// Sorted, unique set of integer bins holding scene reflectors.
class ScenePointSet {
public:
    ScenePointSet() = default;
    explicit ScenePointSet(std::vector<BinIndex> idx) : idx_(std::move(idx))
    {
        std::sort(idx_.begin(), idx_.end());
        idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    }

    const std::vector<BinIndex>& indices() const { return idx_; }
    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }

    bool inside(const CubeShape& s) const
    {
        return std::all_of(idx_.begin(), idx_.end(), [&](const BinIndex& b) {
            return b.r < s.n_range && b.d < s.n_doppler && b.a < s.n_azimuth;
        });
    }

private:
    std::vector<BinIndex> idx_;
};

}  // namespace radarsim
