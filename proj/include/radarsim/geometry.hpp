#pragma once

// World-to-bin projection, radar-equation intensities and the reflection
// environment tensor.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radarsim/cube.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

/// Scale such that a 1 m^2 reflector at 10 m has intensity 1.
inline constexpr double kDefaultIntensityScale = 1.0e4;

/// k * rcs / range^4.
inline double radar_equation_intensity(double rcs, double range, double k = kDefaultIntensityScale)
{
    detail::require(std::isfinite(rcs) && std::isfinite(range) && std::isfinite(k),
                    "radar_equation_intensity: inputs must be finite");
    detail::require(range > 0, "radar_equation_intensity: range must be > 0 (degenerate geometry)");
    detail::require(rcs >= 0, "radar_equation_intensity: rcs must be >= 0");
    detail::require(k > 0, "radar_equation_intensity: k must be > 0");
    const double r2 = range * range;
    return k * rcs / (r2 * r2);
}

/// Fractional bin coordinates of one world point seen from `pose`.
struct BinCoordinates {
    double range_m = 0;
    double bearing = 0;  ///< relative to heading, radians, in (-pi, pi]
    double radial_velocity = 0;
    double r_bin = 0;
    double d_bin = 0;
    double a_bin = 0;
};

inline BinCoordinates to_bin_coordinates(const ActorPoint& actor, const SensorPose& pose, const RadarGrid& grid)
{
    const double dx = actor.x - pose.x();
    const double dy = actor.y - pose.y();
    BinCoordinates c;
    c.range_m = std::hypot(dx, dy);
    c.bearing = wrap_angle(std::atan2(dy, dx) - pose.heading());
    if (c.range_m > 0) {
        const double rvx = actor.vx - pose.vx();
        const double rvy = actor.vy - pose.vy();
        c.radial_velocity = (rvx * dx + rvy * dy) / c.range_m;
    }
    c.r_bin = c.range_m / grid.range_resolution();
    c.d_bin = grid.doppler_center() + c.radial_velocity / grid.doppler_resolution();
    c.a_bin = (c.bearing + 0.5 * grid.azimuth_fov()) / grid.azimuth_fov() * static_cast<double>(grid.n_azimuth());
    return c;
}

/// Projects world reflectors into fractional bins.
///
/// Actors outside the field of view, beyond maximum range, at zero range, or
/// with a Doppler bin outside the grid are dropped. Output keeps input order.
inline std::vector<ReflectionPoint> project_to_bins(std::span<const ActorPoint> actors, const SensorPose& pose,
                                                    const RadarGrid& grid,
                                                    double intensity_scale = kDefaultIntensityScale)
{
    std::vector<ReflectionPoint> out;
    out.reserve(actors.size());
    const auto n_r = static_cast<double>(grid.n_range());
    const auto n_d = static_cast<double>(grid.n_doppler());
    const auto n_a = static_cast<double>(grid.n_azimuth());
    for (const auto& actor : actors) {
        actor.validate();
        const auto c = to_bin_coordinates(actor, pose, grid);
        if (!(c.range_m > 0)) continue;
        if (std::abs(c.bearing) > 0.5 * grid.azimuth_fov()) continue;
        if (!(c.r_bin < n_r)) continue;
        if (!(c.a_bin >= 0 && c.a_bin < n_a)) continue;
        if (!(c.d_bin >= 0 && c.d_bin < n_d)) continue;
        out.emplace_back(c.r_bin, c.d_bin, c.a_bin, radar_equation_intensity(actor.rcs, c.range_m, intensity_scale),
                         PointKind::Scene, actor.actor_id);
    }
    return out;
}

namespace detail {

/// Nearest integer bin, clamped to the last bin of the axis.
inline std::size_t nearest_bin(double x, std::size_t n)
{
    auto b = static_cast<std::size_t>(std::floor(x + 0.5));
    return b < n ? b : n - 1;
}

inline void check_inside(std::span<const ReflectionPoint> points, const CubeShape& shape, const char* who)
{
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].inside(shape))
            throw DataError(std::string(who) + ": point " + std::to_string(i) + " lies outside the grid");
    }
}

}  // namespace detail

/// Nearest integer bins of every scene-kind point.
inline ScenePointSet scene_point_set(std::span<const ReflectionPoint> points, const CubeShape& shape)
{
    detail::check_inside(points, shape, "scene_point_set");
    std::vector<BinIndex> scene;
    for (const auto& p : points) {
        if (p.kind() != PointKind::Scene) continue;
        scene.push_back({detail::nearest_bin(p.r_bin(), shape.n_range), detail::nearest_bin(p.d_bin(), shape.n_doppler),
                         detail::nearest_bin(p.a_bin(), shape.n_azimuth)});
    }
    return ScenePointSet(std::move(scene));
}

/// Scatters reflectors into the environment tensor at their nearest integer
/// bins. Colliding points sum. Returns the tensor and the bins that received
/// at least one scene point.
template <typename T = float>
std::pair<BasicRadarCube<T>, ScenePointSet> build_environment_tensor(std::span<const ReflectionPoint> points,
                                                                     const CubeShape& shape)
{
    detail::check_inside(points, shape, "build_environment_tensor");
    std::vector<double> acc(shape.cells(), 0.0);
    std::vector<BinIndex> scene;
    for (const auto& p : points) {
        BinIndex b{detail::nearest_bin(p.r_bin(), shape.n_range), detail::nearest_bin(p.d_bin(), shape.n_doppler),
                   detail::nearest_bin(p.a_bin(), shape.n_azimuth)};
        acc[(b.r * shape.n_doppler + b.d) * shape.n_azimuth + b.a] += p.intensity();
        if (p.kind() == PointKind::Scene) scene.push_back(b);
    }
    return {detail::finish_cube<T>(shape, acc), ScenePointSet(std::move(scene))};
}

template <typename T = float>
std::pair<BasicRadarCube<T>, ScenePointSet> build_environment_tensor(std::span<const ReflectionPoint> points,
                                                                     const RadarGrid& grid)
{
    return build_environment_tensor<T>(points, grid.shape());
}

}  // namespace radarsim
