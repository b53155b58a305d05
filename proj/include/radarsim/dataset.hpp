#pragma once

// Synthetic dataset generation: random scenes, waveform parameters drawn
// from fixed value sets, one cube file per scene, and a manifest holding
// everything needed to re-synthesize each cube bit-exactly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "radarsim/io/cube_file.hpp"
#include "radarsim/io/json_io.hpp"
#include "radarsim/synthesis.hpp"

namespace radarsim {

struct DatasetSpec {
    std::vector<double> sigma_set{2.4, 2.5, 2.6, 2.7, 2.8};
    std::vector<double> g_set{0.5, 0.6, 0.7};
    std::vector<int> n_set{6, 7, 8, 9, 10};
    std::vector<double> p_set{0.1, 0.2, 0.3};
    double s_doppler = 2.0;
    std::size_t scenes = 10;
    std::vector<std::filesystem::path> scene_files;  ///< used round-robin when non-empty
    std::uint64_t seed = 0;
    RadarGrid grid = RadarGrid::raddet_like();

    void validate() const
    {
        detail::require(!sigma_set.empty() && !g_set.empty() && !n_set.empty() && !p_set.empty(),
                        "DatasetSpec: value sets must be non-empty");
        detail::require(scenes > 0, "DatasetSpec: scene count must be > 0");
        for (double s : sigma_set) WaveformParams(s, g_set.front(), n_set.front(), p_set.front(), s_doppler);
        for (double g : g_set) WaveformParams(sigma_set.front(), g, n_set.front(), p_set.front(), s_doppler);
        for (int n : n_set) WaveformParams(sigma_set.front(), g_set.front(), n, p_set.front(), s_doppler);
        for (double p : p_set) WaveformParams(sigma_set.front(), g_set.front(), n_set.front(), p, s_doppler);
        for (int n : n_set)
            detail::require(static_cast<std::size_t>(n) <= grid.n_azimuth(), "DatasetSpec: n_window exceeds n_azimuth");
    }
};

/// Reads a spec document. Missing fields keep their defaults; "scenes" is a
/// count or a list of scene files (relative to the spec file).
inline DatasetSpec dataset_spec_from_json(const io::json& j, const std::filesystem::path& base_dir = {})
{
    constexpr const char* w = "dataset spec";
    if (!j.is_object()) throw DataError("dataset spec: expected an object");
    DatasetSpec s;
    s.sigma_set = io::detail::get_or(j, "sigma", s.sigma_set, w);
    s.g_set = io::detail::get_or(j, "g", s.g_set, w);
    s.n_set = io::detail::get_or(j, "n_window", s.n_set, w);
    s.p_set = io::detail::get_or(j, "p_window", s.p_set, w);
    s.s_doppler = io::detail::get_or(j, "s_doppler", s.s_doppler, w);
    s.seed = io::detail::get_or<std::uint64_t>(j, "seed", s.seed, w);
    if (j.contains("grid")) s.grid = io::grid_from_json(j.at("grid"));
    if (j.contains("scenes")) {
        const auto& sc = j.at("scenes");
        if (sc.is_array()) {
            for (const auto& f : sc) {
                if (!f.is_string()) throw DataError("dataset spec: scene list entries must be paths");
                s.scene_files.push_back(base_dir / f.get<std::string>());
            }
            s.scenes = s.scene_files.size();
        } else {
            s.scenes = io::detail::get_required<std::size_t>(j, "scenes", w);
        }
    }
    io::detail::wrap_invalid([&] {
        s.validate();
        return 0;
    });
    return s;
}

/// Sensor pose and world-frame actors of one scene.
struct WorldScene {
    SensorPose pose;
    std::vector<ActorPoint> actors;
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

template <typename C>
const auto& pick(std::mt19937_64& rng, const C& c)
{
    auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(c.size()));
    return c[std::min(i, c.size() - 1)];
}

/// World-frame actor that projects to the given fractional bins.
inline ActorPoint actor_at_bins(const SensorPose& pose, const RadarGrid& grid, double r_bin, double d_bin, double a_bin,
                                double intensity, double tangential, std::int64_t id, double k)
{
    const double range = r_bin * grid.range_resolution();
    const double bearing = a_bin / static_cast<double>(grid.n_azimuth()) * grid.azimuth_fov() - 0.5 * grid.azimuth_fov();
    const double heading = pose.heading() + bearing;
    const double ux = std::cos(heading), uy = std::sin(heading);
    const double v_rad = (d_bin - grid.doppler_center()) * grid.doppler_resolution();
    ActorPoint a;
    a.x = pose.x() + range * ux;
    a.y = pose.y() + range * uy;
    a.vx = pose.vx() + v_rad * ux - tangential * uy;
    a.vy = pose.vy() + v_rad * uy + tangential * ux;
    const double r2 = range * range;
    a.rcs = intensity * r2 * r2 / k;
    a.actor_id = id;
    return a;
}

}  // namespace detail

/// Random scene on a lattice of (range, Doppler) cells spaced wider than the
/// fitting isolation window. Up to four cells hold a single calibration
/// reflector each (one actor per reflector, fittable); further cells may hold
/// a car, a tight cluster of 3 to 6 reflectors sharing one actor id.
inline WorldScene random_scene(const RadarGrid& grid, std::mt19937_64& rng, double k = kDefaultIntensityScale)
{
    using detail::uniform;
    WorldScene sc;
    sc.pose = SensorPose(uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -std::numbers::pi, std::numbers::pi),
                         uniform(rng, -2, 2), uniform(rng, -2, 2));

    const FitOptions fo;
    const double hr = range_half_width(fo.sigma_max);
    const double hd = doppler_half_width(fo.s_doppler_max);
    const double step_r = 2.0 * hr + 4.0, step_d = 2.0 * hd + 2.0;
    std::vector<std::pair<double, double>> cells;
    for (double r = 10.0; r <= static_cast<double>(grid.n_range()) - 4.0; r += step_r)
        for (double d = 3.0; d <= static_cast<double>(grid.n_doppler()) - 2.0; d += step_d) cells.emplace_back(r, d);
    // Fisher-Yates on our own draws; std::shuffle differs between standard libraries.
    for (std::size_t i = cells.size(); i > 1; --i) {
        const auto j = std::min(static_cast<std::size_t>(detail::uniform01(rng) * static_cast<double>(i)), i - 1);
        std::swap(cells[i - 1], cells[j]);
    }

    const double a_lo = 8.0, a_hi = static_cast<double>(grid.n_azimuth()) - 8.0;
    std::int64_t next_id = 1;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto [cr, cd] = cells[i];
        if (i < 4) {
            sc.actors.push_back(detail::actor_at_bins(sc.pose, grid, cr + uniform(rng, -0.4, 0.4),
                                                      cd + uniform(rng, -0.4, 0.4), uniform(rng, a_lo, a_hi),
                                                      uniform(rng, 0.5, 1.0), uniform(rng, -3, 3), next_id++, k));
        } else if (detail::uniform01(rng) < 0.5) {
            const double r0 = cr + uniform(rng, -0.4, 0.4), d0 = cd + uniform(rng, -0.3, 0.3);
            const double a0 = uniform(rng, a_lo + 3, a_hi - 3);
            const double tang = uniform(rng, -3, 3);
            const int n = 3 + static_cast<int>(detail::uniform01(rng) * 4.0);
            for (int j = 0; j < n; ++j)
                sc.actors.push_back(detail::actor_at_bins(sc.pose, grid, r0 + uniform(rng, -1.5, 1.5),
                                                          d0 + uniform(rng, -0.3, 0.3), a0 + uniform(rng, -3, 3),
                                                          uniform(rng, 0.2, 1.0), tang, next_id, k));
            ++next_id;
        }
    }
    return sc;
}

inline WorldScene read_world_scene(const std::filesystem::path& path)
{
    const auto doc = io::scene_from_json(io::read_json(path));
    if (!doc.has_actors) throw DataError(path.string() + ": dataset scenes must list world-frame actors");
    return {doc.pose, doc.actors};
}

/// Re-synthesizes one manifest entry.
inline SceneSynthesis synthesize_manifest_entry(const io::json& manifest, const io::json& entry, unsigned threads = 1)
{
    const RadarGrid grid = io::grid_from_json(io::detail::get_required<io::json>(manifest, "grid", "manifest"));
    const double k = io::detail::get_or<double>(manifest, "intensity_scale", kDefaultIntensityScale, "manifest");
    const auto params = io::params_from_json(io::detail::get_required<io::json>(entry, "params", "entry"), grid.n_azimuth());
    const auto& nj = io::detail::get_required<io::json>(entry, "noise", "entry");
    const NoiseConfig noise{io::detail::get_required<std::size_t>(nj, "count", "noise"),
                            io::detail::get_required<double>(nj, "intensity_min", "noise"),
                            io::detail::get_required<double>(nj, "intensity_max", "noise"),
                            io::detail::get_required<std::uint64_t>(nj, "seed", "noise")};
    const SensorPose pose = io::pose_from_json(io::detail::get_required<io::json>(entry, "sensor_pose", "entry"));
    std::vector<ActorPoint> actors;
    for (const auto& a : io::detail::get_required<io::json>(entry, "actors", "entry")) actors.push_back(io::actor_from_json(a));
    return synthesize_scene(actors, pose, grid, params, noise, threads, k);
}

/// Writes cube_NNNN.radc files and manifest.json into `out_dir` and returns
/// the manifest.
inline io::json generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir, unsigned threads = 1,
                                 double k = kDefaultIntensityScale)
{
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("gen-dataset: cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<WorldScene> file_scenes;
    for (const auto& f : spec.scene_files) file_scenes.push_back(read_world_scene(f));

    io::json manifest;
    manifest["format"] = "radarsim-dataset";
    manifest["version"] = 1;
    manifest["seed"] = spec.seed;
    manifest["grid"] = io::to_json(spec.grid);
    manifest["intensity_scale"] = k;
    manifest["sets"] = {{"sigma", spec.sigma_set}, {"g", spec.g_set}, {"n_window", spec.n_set},
                        {"p_window", spec.p_set},  {"s_doppler", spec.s_doppler}};
    manifest["entries"] = io::json::array();

    std::mt19937_64 master(spec.seed);
    for (std::size_t i = 0; i < spec.scenes; ++i) {
        const std::uint64_t entry_seed = master();
        std::mt19937_64 rng(entry_seed);
        const WaveformParams params(detail::pick(rng, spec.sigma_set), detail::pick(rng, spec.g_set),
                                    detail::pick(rng, spec.n_set), detail::pick(rng, spec.p_set), spec.s_doppler);
        const WorldScene scene = file_scenes.empty() ? random_scene(spec.grid, rng, k) : file_scenes[i % file_scenes.size()];
        const std::uint64_t noise_seed = rng();

        const auto scene_points = project_to_bins(scene.actors, scene.pose, spec.grid, k);
        const NoiseConfig noise = NoiseConfig::relative_to(peak_scene_intensity(scene_points),
                                                           io::default_noise_count(spec.grid.shape()), noise_seed);
        const auto synth = synthesize_scene(scene.actors, scene.pose, spec.grid, params, noise, threads, k);

        char name[32];
        std::snprintf(name, sizeof name, "cube_%04zu.radc", i);
        io::write_cube(out_dir / name, synth.cube);

        io::json e;
        e["index"] = i;
        e["file"] = name;
        e["params"] = io::to_json(params);
        e["noise"] = io::to_json(noise);
        e["sensor_pose"] = io::to_json(scene.pose);
        io::json actors = io::json::array();
        for (const auto& a : scene.actors) actors.push_back(io::to_json(a));
        e["actors"] = std::move(actors);
        e["points"] = io::points_to_json(scene_points);
        manifest["entries"].push_back(std::move(e));
    }
    io::write_json(out_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace radarsim
