#pragma once

// Scene edits. Edits act on reflector and actor lists and the cube is then
// re-synthesized; cube pixels are never modified directly.

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "radarsim/synthesis.hpp"

namespace radarsim {

/// Same reflectors, new radar attributes.
inline RadarCube modify_attributes(std::span<const ReflectionPoint> points, const WaveformParams& new_params,
                                   const RadarGrid& grid, unsigned threads = 1)
{
    return synthesize_fast<float>(points, new_params, grid, threads);
}

/// Re-simulates the scene from a new sensor pose. Actors are in the world
/// frame, so range, bearing and radial velocity are all recomputed; noise is
/// re-sampled from `noise` and is therefore identical for a fixed seed.
inline RadarCube translate_sensor(std::span<const ActorPoint> actors, const SensorPose& new_pose,
                                  const RadarGrid& grid, const WaveformParams& params, const NoiseConfig& noise,
                                  unsigned threads = 1, double intensity_scale = kDefaultIntensityScale)
{
    return synthesize_scene(actors, new_pose, grid, params, noise, threads, intensity_scale).cube;
}

/// Demotes every reflector of `actor_id` to a noise reflector of intensity
/// `noise_floor`. List length and order are preserved.
inline std::vector<ReflectionPoint> remove_actor(std::span<const ReflectionPoint> points, std::int64_t actor_id,
                                                 double noise_floor)
{
    detail::require(std::isfinite(noise_floor) && noise_floor >= 0, "remove_actor: noise_floor must be >= 0");
    std::set<std::int64_t> known;
    for (const auto& p : points)
        if (p.actor_id()) known.insert(*p.actor_id());
    if (!known.count(actor_id)) {
        std::string ids;
        for (auto id : known) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        throw DataError("remove_actor: unknown actor id " + std::to_string(actor_id) + " (known: " +
                        (ids.empty() ? "none" : ids) + ")");
    }
    std::vector<ReflectionPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (p.actor_id() && *p.actor_id() == actor_id)
            out.push_back(p.as_noise(noise_floor));
        else
            out.push_back(p);
    }
    return out;
}

/// Median intensity of the noise reflectors in a list, 0 if there are none.
inline double median_noise_intensity(std::span<const ReflectionPoint> points)
{
    std::vector<double> v;
    for (const auto& p : points)
        if (p.kind() == PointKind::Noise) v.push_back(p.intensity());
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

}  // namespace radarsim
