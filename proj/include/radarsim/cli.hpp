#pragma once

// Command-line front end. `run` parses argv, dispatches to a subcommand and
// maps failures to exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radarsim/cfar.hpp"
#include "radarsim/dataset.hpp"
#include "radarsim/editing.hpp"
#include "radarsim/fitting.hpp"
#include "radarsim/io/cube_file.hpp"
#include "radarsim/io/json_io.hpp"
#include "radarsim/io/png.hpp"
#include "radarsim/metrics.hpp"
#include "radarsim/synthesis.hpp"

namespace radarsim::cli {

struct UsageError : Error {
    using Error::Error;
};

namespace detail {

inline void emit(const io::json& j, const std::string& out_path, std::ostream& out)
{
    if (out_path.empty())
        out << j.dump(2) << '\n';
    else
        io::write_json(out_path, j);
}

/// Scene-kind reflectors of a scene document seen from `pose`.
inline std::vector<ReflectionPoint> scene_points(const io::SceneDoc& doc, const SensorPose& pose)
{
    if (doc.has_actors) return project_to_bins(doc.actors, pose, doc.grid, doc.intensity_scale);
    return doc.points;
}

inline NoiseConfig scene_noise(const io::SceneDoc& doc, std::uint64_t seed)
{
    return io::resolve_noise(doc.noise, doc.grid.shape(), peak_scene_intensity(scene_points(doc, doc.pose)), seed);
}

inline RadarGrid parse_grid_dims(const std::string& s)
{
    std::size_t r = 0, d = 0, a = 0;
    char x1 = 0, x2 = 0;
    std::istringstream is(s);
    if (!(is >> r >> x1 >> d >> x2 >> a) || x1 != 'x' || x2 != 'x' || !is.eof())
        throw UsageError("--grid expects RxDxA, e.g. 64x16x64");
    try {
        return io::scaled_default_grid(r, d, a);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

struct CfarOptions {
    int guard = 2;
    int train = 4;
    double alpha = 5.0;
    double min_peak = 0.0;
    double min_peak_ratio = 0.0;

    template <typename T>
    CfarConfig resolve(const BasicRadarCube<T>& cube) const
    {
        const double floor = std::max(min_peak, min_peak_ratio * static_cast<double>(cube.max_value()));
        return CfarConfig{guard, train, alpha, floor};
    }

    void add_to(CLI::App* sub)
    {
        sub->add_option("--guard", guard, "CFAR guard half-width in bins")->check(CLI::NonNegativeNumber);
        sub->add_option("--train", train, "CFAR training half-width in bins")->check(CLI::PositiveNumber);
        sub->add_option("--alpha", alpha, "CFAR threshold factor")->check(CLI::PositiveNumber);
        sub->add_option("--min-peak", min_peak, "absolute detection floor")->check(CLI::NonNegativeNumber);
        sub->add_option("--min-peak-ratio", min_peak_ratio, "detection floor relative to the cube maximum")
            ->check(CLI::Range(0.0, 1.0));
    }
};

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Analytic radar cube simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "key = value configuration file");

    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* seed_opt = app.add_option("--seed", seed, "random seed for noise and dataset generation");
    app.add_option("--threads", threads, "worker threads for synthesis")->check(CLI::Range(1u, 1024u));

    std::function<void()> action;

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize a cube from a scene and waveform parameters");
    std::string synth_scene, synth_params, synth_out, synth_points_out;
    synth->add_option("--scene", synth_scene, "scene JSON")->required();
    synth->add_option("--params", synth_params, "params JSON")->required();
    synth->add_option("--out", synth_out, "output cube file")->required();
    synth->add_option("--points-out", synth_points_out, "write the reflector list (scene and noise) as JSON");
    synth->callback([&] {
        action = [&] {
            const auto doc = io::scene_from_json(io::read_json(synth_scene));
            const auto params = io::params_from_json(io::read_json(synth_params), doc.grid.n_azimuth());
            auto points = detail::scene_points(doc, doc.pose);
            const auto noise = detail::scene_noise(doc, seed);
            const auto noise_points = sample_noise_points(doc.grid, noise);
            points.insert(points.end(), noise_points.begin(), noise_points.end());
            io::write_cube(synth_out, synthesize_fast<float>(points, params, doc.grid, threads));
            if (!synth_points_out.empty()) {
                io::json j{{"grid", io::to_json(doc.grid)}, {"noise", io::to_json(noise)}};
                j["points"] = io::points_to_json(points);
                io::write_json(synth_points_out, j);
            }
        };
    });

    // extract
    auto* extract = app.add_subcommand("extract", "detect reflectors with CA-CFAR");
    std::string ex_cube, ex_out;
    detail::CfarOptions ex_cfar;
    extract->add_option("cube", ex_cube, "input cube file")->required();
    extract->add_option("--out", ex_out, "output points JSON (default: stdout)");
    ex_cfar.add_to(extract);
    extract->callback([&] {
        action = [&] {
            const auto cube = io::read_cube(ex_cube);
            const auto pts = cfar_extract(cube, ex_cfar.resolve(cube));
            io::json j{{"points", io::points_to_json(pts)}};
            detail::emit(j, ex_out, out);
        };
    });

    // fit
    auto* fit = app.add_subcommand("fit", "fit waveform parameters to a cube");
    std::string fit_cube, fit_points, fit_out, fit_agg = "median";
    detail::CfarOptions fit_cfar;
    fit->add_option("cube", fit_cube, "input cube file")->required();
    fit->add_option("--points", fit_points, "reference reflectors (points JSON); CFAR is used when absent");
    fit->add_option("--out", fit_out, "output JSON (default: stdout)");
    fit->add_option("--aggregation", fit_agg, "median or mean")->check(CLI::IsMember({"median", "mean"}));
    fit_cfar.add_to(fit);
    fit->callback([&] {
        action = [&] {
            const auto cube = io::read_cube(fit_cube);
            FitOptions opt;
            opt.aggregation = fit_agg == "mean" ? Aggregation::Mean : Aggregation::Median;
            std::vector<ReflectionPoint> peaks;
            if (!fit_points.empty()) {
                peaks = io::read_points(fit_points);
            } else {
                peaks = cfar_extract(cube, fit_cfar.resolve(cube));
                opt.reference_intensities = false;
            }
            detail::emit(io::to_json(fit_waveform_params(cube, peaks, opt)), fit_out, out);
        };
    });

    // edit
    auto* edit = app.add_subcommand("edit", "apply an edit script to a scene and re-synthesize");
    std::string ed_scene, ed_params, ed_script, ed_out, ed_points_out;
    edit->add_option("--scene", ed_scene, "scene JSON")->required();
    edit->add_option("--params", ed_params, "params JSON")->required();
    edit->add_option("--script", ed_script, "edit script JSON")->required();
    edit->add_option("--out", ed_out, "output cube file")->required();
    edit->add_option("--points-out", ed_points_out, "write the edited reflector list as JSON");
    edit->callback([&] {
        action = [&] {
            const auto doc = io::scene_from_json(io::read_json(ed_scene));
            auto params = io::params_from_json(io::read_json(ed_params), doc.grid.n_azimuth());
            const auto ops = io::edit_script_from_json(io::read_json(ed_script));
            const auto noise = detail::scene_noise(doc, seed);
            const auto noise_points = sample_noise_points(doc.grid, noise);
            SensorPose pose = doc.pose;
            std::map<std::int64_t, double> removed;  // actor id -> noise floor

            auto current = [&] {
                auto pts = detail::scene_points(doc, pose);
                pts.insert(pts.end(), noise_points.begin(), noise_points.end());
                for (const auto& [id, floor] : removed)
                    for (auto& p : pts)
                        if (p.actor_id() && *p.actor_id() == id) p = p.as_noise(floor);
                return pts;
            };
            for (const auto& op : ops) {
                switch (op.kind) {
                case io::EditOp::Kind::Attrs:
                    params = io::params_from_json(op.params, doc.grid.n_azimuth());
                    break;
                case io::EditOp::Kind::Translate:
                    if (!doc.has_actors) throw DataError("edit: translate needs a scene with world-frame actors");
                    pose = pose.moved(op.dx, op.dy, op.dheading);
                    break;
                case io::EditOp::Kind::Remove: {
                    const auto pts = current();
                    const double floor = op.noise_floor.value_or(median_noise_intensity(pts));
                    remove_actor(pts, op.actor_id, floor);  // validates the id
                    removed[op.actor_id] = floor;
                    break;
                }
                }
            }
            const auto pts = current();
            io::write_cube(ed_out, synthesize_fast<float>(pts, params, doc.grid, threads));
            if (!ed_points_out.empty()) {
                io::json j{{"grid", io::to_json(doc.grid)}, {"sensor_pose", io::to_json(pose)}, {"params", io::to_json(params)}};
                j["points"] = io::points_to_json(pts);
                io::write_json(ed_points_out, j);
            }
        };
    });

    // metrics
    auto* metrics = app.add_subcommand("metrics", "compare a simulated cube with a reference cube");
    std::string m_sim, m_gt, m_scene, m_out;
    std::vector<std::string> m_fsim, m_fgt;
    metrics->add_option("sim", m_sim, "simulated cube file")->required();
    metrics->add_option("gt", m_gt, "reference cube file")->required();
    metrics->add_option("--scene", m_scene, "points JSON; its scene points define the scene bin set");
    metrics->add_option("--frechet-sim", m_fsim, "simulated cube set for the Frechet distance")->expected(2, -1);
    metrics->add_option("--frechet-gt", m_fgt, "reference cube set for the Frechet distance")->expected(2, -1);
    metrics->add_option("--out", m_out, "output JSON (default: stdout)");
    metrics->callback([&] {
        if (m_fsim.empty() != m_fgt.empty()) throw UsageError("--frechet-sim and --frechet-gt go together");
        action = [&] {
            const auto sim = io::read_cube(m_sim);
            const auto gt = io::read_cube(m_gt);
            MetricReport r;
            if (!m_scene.empty()) {
                const auto pts = io::read_points(m_scene);
                const auto set = scene_point_set(pts, sim.shape());
                r = compare_cubes(sim, gt, &set);
            } else {
                r = compare_cubes(sim, gt);
            }
            if (!m_fsim.empty()) {
                auto images = [](const std::vector<std::string>& files) {
                    std::vector<Image2D> v;
                    for (const auto& f : files) v.push_back(ra_projection(io::read_cube(f)));
                    return v;
                };
                r.frechet = frechet_stats_distance(images(m_fsim), images(m_fgt));
            }
            detail::emit(io::to_json(r), m_out, out);
        };
    });

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "generate a synthetic dataset with a ground-truth manifest");
    std::string g_spec = "default", g_out, g_grid;
    std::size_t g_scenes = 0;
    gen->add_option("--spec", g_spec, "'default' or a dataset spec JSON");
    auto* g_scenes_opt = gen->add_option("--scenes", g_scenes, "number of scenes")->check(CLI::PositiveNumber);
    gen->add_option("--out", g_out, "output directory")->required();
    gen->add_option("--grid", g_grid, "bin counts RxDxA at the default physical extent");
    gen->callback([&] {
        std::optional<RadarGrid> grid;
        if (!g_grid.empty()) grid = detail::parse_grid_dims(g_grid);
        action = [&, grid] {
            DatasetSpec spec;
            if (g_spec != "default") {
                const std::filesystem::path p(g_spec);
                spec = dataset_spec_from_json(io::read_json(p), p.parent_path());
            }
            if (grid) spec.grid = *grid;
            if (*g_scenes_opt) spec.scenes = g_scenes;
            if (*seed_opt) spec.seed = seed;
            generate_dataset(spec, g_out, threads);
        };
    });

    // render
    auto* render = app.add_subcommand("render", "write RA and RD max-projection PNG heatmaps");
    std::string r_cube, r_prefix;
    render->add_option("cube", r_cube, "input cube file")->required();
    render->add_option("--out", r_prefix, "output prefix; writes <prefix>_ra.png and <prefix>_rd.png")->required();
    render->callback([&] {
        action = [&] { io::render_slices(io::read_cube(r_cube), r_prefix); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (action) action();
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace radarsim::cli
