#pragma once

// JSON documents: scene, points, params, edit script and metric report.
// Field layouts are described in docs/formats.md. Every reader rejects
// missing required fields and wrong types with DataError.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "radarsim/fitting.hpp"
#include "radarsim/metrics.hpp"
#include "radarsim/psf.hpp"
#include "radarsim/synthesis.hpp"
#include "radarsim/types.hpp"

namespace radarsim::io {

using json = nlohmann::ordered_json;

namespace detail {

template <typename T>
T get_required(const json& j, const char* key, const char* where)
{
    if (!j.is_object() || !j.contains(key))
        throw DataError(std::string(where) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(std::string(where) + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const char* where)
{
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    return get_required<T>(j, key, where);
}

template <typename F>
auto wrap_invalid(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw DataError(e.what());
    }
}

}  // namespace detail

inline json read_json(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

inline void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
    if (!f) throw DataError("write failed for " + path.string());
}

// grid

inline json to_json(const RadarGrid& g)
{
    return {{"n_range", g.n_range()},
            {"n_doppler", g.n_doppler()},
            {"n_azimuth", g.n_azimuth()},
            {"range_resolution", g.range_resolution()},
            {"doppler_resolution", g.doppler_resolution()},
            {"azimuth_fov", g.azimuth_fov()}};
}

inline RadarGrid grid_from_json(const json& j)
{
    constexpr const char* w = "grid";
    return detail::wrap_invalid([&] {
        return RadarGrid(detail::get_required<std::size_t>(j, "n_range", w),
                         detail::get_required<std::size_t>(j, "n_doppler", w),
                         detail::get_required<std::size_t>(j, "n_azimuth", w),
                         detail::get_required<double>(j, "range_resolution", w),
                         detail::get_required<double>(j, "doppler_resolution", w),
                         detail::get_required<double>(j, "azimuth_fov", w));
    });
}

/// Grid with the default resolutions rescaled to new bin counts, so the
/// physical extent (50 m, +-13 m/s, 90 degrees) is kept.
inline RadarGrid scaled_default_grid(std::size_t n_range, std::size_t n_doppler, std::size_t n_azimuth)
{
    const auto d = RadarGrid::raddet_like();
    return RadarGrid(n_range, n_doppler, n_azimuth, d.max_range() / static_cast<double>(n_range),
                     d.doppler_resolution() * static_cast<double>(d.n_doppler()) / static_cast<double>(n_doppler),
                     d.azimuth_fov());
}

// params

inline json to_json(const WaveformParams& p)
{
    return {{"sigma", p.sigma()},
            {"g", p.g()},
            {"n_window", p.n_window()},
            {"p_window", p.p_window()},
            {"s_doppler", p.s_doppler()}};
}

/// Accepts either (n_window, p_window) or lobe parameters (rs, lambda); the
/// latter are converted with the best-matching window from the search grid.
inline WaveformParams params_from_json(const json& j, std::size_t pad_length)
{
    constexpr const char* w = "params";
    return detail::wrap_invalid([&] {
        const double sigma = detail::get_required<double>(j, "sigma", w);
        const double g = detail::get_required<double>(j, "g", w);
        const double s_d = detail::get_or<double>(j, "s_doppler", 2.0, w);
        if (j.contains("n_window") || j.contains("p_window"))
            return WaveformParams(sigma, g, detail::get_required<int>(j, "n_window", w),
                                  detail::get_required<double>(j, "p_window", w), s_d);
        if (j.contains("rs") || j.contains("lambda")) {
            const LobeParams lp(detail::get_required<double>(j, "rs", w), detail::get_required<double>(j, "lambda", w));
            const FitOptions defaults;
            const auto wf = fit_window_from_lobes(lp, pad_length, defaults.n_values, defaults.p_values);
            return WaveformParams(sigma, g, wf.n_window, wf.p_window, s_d);
        }
        throw DataError("params: need n_window and p_window, or rs and lambda");
    });
}

// points

inline json to_json(const ReflectionPoint& p)
{
    json j{{"r", p.r_bin()}, {"d", p.d_bin()}, {"a", p.a_bin()}, {"intensity", p.intensity()}, {"kind", to_string(p.kind())}};
    if (p.actor_id()) j["actor_id"] = *p.actor_id();
    return j;
}

inline ReflectionPoint point_from_json(const json& j)
{
    constexpr const char* w = "point";
    return detail::wrap_invalid([&] {
        const auto kind_s = detail::get_or<std::string>(j, "kind", "scene", w);
        if (kind_s != "scene" && kind_s != "noise") throw DataError("point: kind must be 'scene' or 'noise'");
        std::optional<std::int64_t> id;
        if (j.contains("actor_id") && !j.at("actor_id").is_null())
            id = detail::get_required<std::int64_t>(j, "actor_id", w);
        return ReflectionPoint(detail::get_required<double>(j, "r", w), detail::get_required<double>(j, "d", w),
                               detail::get_required<double>(j, "a", w), detail::get_required<double>(j, "intensity", w),
                               kind_s == "scene" ? PointKind::Scene : PointKind::Noise, id);
    });
}

inline json points_to_json(std::span<const ReflectionPoint> pts)
{
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(to_json(p));
    return arr;
}

inline std::vector<ReflectionPoint> points_from_json(const json& arr)
{
    if (!arr.is_array()) throw DataError("points: expected an array");
    std::vector<ReflectionPoint> out;
    out.reserve(arr.size());
    for (const auto& e : arr) out.push_back(point_from_json(e));
    return out;
}

/// A points document is {"points": [...]} or a bare array.
inline std::vector<ReflectionPoint> read_points(const std::filesystem::path& path)
{
    const json j = read_json(path);
    return points_from_json(j.is_object() ? detail::get_required<json>(j, "points", "points file") : j);
}

// actors, pose, noise

inline json to_json(const ActorPoint& a)
{
    return {{"x", a.x}, {"y", a.y}, {"vx", a.vx}, {"vy", a.vy}, {"rcs", a.rcs}, {"actor_id", a.actor_id}};
}

inline ActorPoint actor_from_json(const json& j)
{
    constexpr const char* w = "actor";
    ActorPoint a;
    a.x = detail::get_required<double>(j, "x", w);
    a.y = detail::get_required<double>(j, "y", w);
    a.vx = detail::get_or<double>(j, "vx", 0.0, w);
    a.vy = detail::get_or<double>(j, "vy", 0.0, w);
    a.rcs = detail::get_or<double>(j, "rcs", 1.0, w);
    a.actor_id = detail::get_or<std::int64_t>(j, "actor_id", 0, w);
    detail::wrap_invalid([&] {
        a.validate();
        return 0;
    });
    return a;
}

inline json to_json(const SensorPose& p)
{
    return {{"x", p.x()}, {"y", p.y()}, {"heading", p.heading()}, {"vx", p.vx()}, {"vy", p.vy()}};
}

inline SensorPose pose_from_json(const json& j)
{
    constexpr const char* w = "pose";
    return detail::wrap_invalid([&] {
        return SensorPose(detail::get_or<double>(j, "x", 0.0, w), detail::get_or<double>(j, "y", 0.0, w),
                          detail::get_or<double>(j, "heading", 0.0, w), detail::get_or<double>(j, "vx", 0.0, w),
                          detail::get_or<double>(j, "vy", 0.0, w));
    });
}

inline json to_json(const NoiseConfig& n)
{
    return {{"count", n.count}, {"intensity_min", n.intensity_min}, {"intensity_max", n.intensity_max}, {"seed", n.seed}};
}

/// Default noise reflector count for a grid: 2000 on the 256 x 64 x 256
/// reference grid, scaled by cell count.
inline std::size_t default_noise_count(const CubeShape& s)
{
    const double ref = 256.0 * 64.0 * 256.0;
    return static_cast<std::size_t>(std::llround(2000.0 * static_cast<double>(s.cells()) / ref));
}

// scene

/// Input of `synth`: a grid, reflectors given either as world-frame actors
/// (with a sensor pose) or directly as bin-space points, and optional noise.
struct SceneDoc {
    RadarGrid grid = RadarGrid::raddet_like();
    SensorPose pose;
    std::vector<ActorPoint> actors;
    std::vector<ReflectionPoint> points;
    bool has_actors = false;
    double intensity_scale = kDefaultIntensityScale;
    std::optional<json> noise;  ///< raw noise object; absent means defaults
};

inline SceneDoc scene_from_json(const json& j)
{
    constexpr const char* w = "scene";
    if (!j.is_object()) throw DataError("scene: expected an object");
    SceneDoc s;
    if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"));
    if (j.contains("sensor_pose")) s.pose = pose_from_json(j.at("sensor_pose"));
    s.intensity_scale = detail::get_or<double>(j, "intensity_scale", kDefaultIntensityScale, w);
    if (!(s.intensity_scale > 0)) throw DataError("scene: intensity_scale must be > 0");
    if (j.contains("actors") == j.contains("points"))
        throw DataError("scene: exactly one of 'actors' or 'points' is required");
    if (j.contains("actors")) {
        s.has_actors = true;
        const auto& arr = j.at("actors");
        if (!arr.is_array()) throw DataError("scene: 'actors' must be an array");
        for (const auto& a : arr) s.actors.push_back(actor_from_json(a));
    } else {
        s.points = points_from_json(j.at("points"));
    }
    if (j.contains("noise")) s.noise = j.at("noise");
    return s;
}

/// Resolves the noise object of a scene. Absent fields default to
/// [0.001, 0.05] x peak scene intensity, the grid-scaled count, and
/// `fallback_seed`. A null noise object disables noise.
inline NoiseConfig resolve_noise(const std::optional<json>& noise, const CubeShape& shape, double peak_intensity,
                                 std::uint64_t fallback_seed)
{
    constexpr const char* w = "noise";
    NoiseConfig cfg = NoiseConfig::relative_to(peak_intensity > 0 ? peak_intensity : 1.0, default_noise_count(shape),
                                               fallback_seed);
    if (noise) {
        if (noise->is_null()) return NoiseConfig{0, 0.0, 0.0, fallback_seed};
        cfg.count = detail::get_or<std::size_t>(*noise, "count", cfg.count, w);
        cfg.intensity_min = detail::get_or<double>(*noise, "intensity_min", cfg.intensity_min, w);
        cfg.intensity_max = detail::get_or<double>(*noise, "intensity_max", cfg.intensity_max, w);
        cfg.seed = detail::get_or<std::uint64_t>(*noise, "seed", cfg.seed, w);
    }
    detail::wrap_invalid([&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

// edit script

struct EditOp {
    enum class Kind { Attrs, Translate, Remove };
    Kind kind = Kind::Attrs;
    json params;                          // Attrs: the op object itself, read as params
    double dx = 0, dy = 0, dheading = 0;  // Translate
    std::int64_t actor_id = 0;            // Remove
    std::optional<double> noise_floor;    // Remove
};

/// An edit script is a JSON array of operations, or {"edits": [...]}.
inline std::vector<EditOp> edit_script_from_json(const json& j)
{
    constexpr const char* w = "edit";
    if (j.is_object() && !j.contains("edits")) throw DataError("edit script: missing 'edits'");
    const json& arr = j.is_object() ? j.at("edits") : j;
    if (!arr.is_array()) throw DataError("edit script: expected an array of operations");
    std::vector<EditOp> ops;
    for (const auto& e : arr) {
        const auto op = detail::get_required<std::string>(e, "op", w);
        EditOp o;
        if (op == "attrs") {
            o.kind = EditOp::Kind::Attrs;
            o.params = e;
        } else if (op == "translate") {
            o.kind = EditOp::Kind::Translate;
            o.dx = detail::get_or<double>(e, "dx", 0.0, w);
            o.dy = detail::get_or<double>(e, "dy", 0.0, w);
            o.dheading = detail::get_or<double>(e, "dheading", 0.0, w);
        } else if (op == "remove") {
            o.kind = EditOp::Kind::Remove;
            o.actor_id = detail::get_required<std::int64_t>(e, "actor_id", w);
            if (e.contains("noise_floor")) o.noise_floor = detail::get_required<double>(e, "noise_floor", w);
        } else {
            throw DataError("edit script: unknown op '" + op + "' (expected attrs, translate or remove)");
        }
        ops.push_back(std::move(o));
    }
    return ops;
}

// metric report

inline json to_json(const MetricReport& r)
{
    json j{{"ppe", r.ppe}, {"ppse", r.ppse}, {"cells", r.cells}};
    j["ppe_scene"] = r.ppe_scene ? json(*r.ppe_scene) : json(nullptr);
    j["ppe_scene_sum"] = r.ppe_scene_sum ? json(*r.ppe_scene_sum) : json(nullptr);
    j["scene_cells"] = r.scene_cells;
    j["frechet"] = r.frechet ? json(*r.frechet) : json(nullptr);
    return j;
}

inline json to_json(const WaveformFit& f)
{
    json j{{"sigma", f.sigma}, {"g", f.g ? json(*f.g) : json(nullptr)}, {"n_window", f.n_window},
           {"p_window", f.p_window}, {"s_doppler", f.s_doppler}, {"rs", f.lobes.rs()}, {"lambda", f.lobes.lambda()},
           {"peaks_used", f.peaks.size()}};
    j["residuals"] = {{"range", f.residuals.range}, {"doppler", f.residuals.doppler}, {"azimuth", f.residuals.azimuth}};
    return j;
}

}  // namespace radarsim::io
