#include "edgedeploy/cli.hpp"
#include "edgedeploy/config.hpp"
#include "edgedeploy/error.hpp"
#include "edgedeploy/keyframe_selector.hpp"
#include "edgedeploy/latency_predictor.hpp"
#include "edgedeploy/marl.hpp"
#include "edgedeploy/oracle.hpp"
#include "edgedeploy/reward.hpp"
#include "edgedeploy/strategies.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace edgedeploy;

namespace {

py::dict metrics_dict(const EpisodeMetrics& m) {
    py::dict d;
    d["l_per_frame_ms"] = m.l_per_frame_ms;
    d["kf_count"] = m.kf_count;
    d["wt_ms"] = m.wt_ms;
    d["wp_fraction"] = m.wp_fraction;
    d["p_per_video_w"] = m.p_per_video_w;
    d["map_points"] = m.map_points;
    return d;
}

py::dict action_dict(const DeploymentAction& a) {
    py::dict d;
    d["cluster"] = a.cluster;
    d["cpu_level"] = a.cpu_level;
    d["gpu_level"] = a.gpu_level;
    d["keyframe_offset"] = a.keyframe_offset;
    d["prune_ratio"] = a.prune_ratio;
    return d;
}

py::dict simulate(const std::string& strategy, const std::string& config, std::uint64_t seed,
                  const std::string& checkpoint) {
    RunConfig cfg = parse_run_config(config);
    const auto s = build_scenario(cfg);
    EpisodeResult r;
    {
        py::gil_scoped_release release;
        if (strategy == "marl") {
            if (checkpoint.empty()) {
                throw ConfigError("strategy 'marl' needs a checkpoint");
            }
            Coordinator coord(s.space, cfg.marl, cfg.seed);
            (void)load_checkpoint(checkpoint, coord);
            r = run_episode(s, coord, RunMode::eval, seed, cfg.eval_noise);
        } else {
            auto ctl = make_baseline(strategy, s);
            EpisodeOptions opts;
            opts.noise_seed = seed;
            opts.noise_bound = cfg.eval_noise;
            r = simulate_episode(s, *ctl, opts);
        }
    }
    py::dict d = metrics_dict(r.metrics);
    d["keyframes"] = r.keyframes;
    d["drops"] = r.drops;
    return d;
}

py::dict train_agents(const std::string& config, std::size_t steps, std::uint64_t seed,
                      const std::string& checkpoint) {
    RunConfig cfg = parse_run_config(config);
    const auto s = build_scenario(cfg);
    Coordinator coord(s.space, cfg.marl, seed);
    TrainOptions opts;
    opts.steps = steps;
    opts.seed = seed;
    opts.noise_bound = cfg.train_noise;
    TrainResult tr;
    {
        py::gil_scoped_release release;
        tr = train(s, coord, opts);
    }
    if (!checkpoint.empty()) {
        save_checkpoint(checkpoint, coord, tr.final_step);
    }
    py::list curve;
    for (const auto& row : tr.curve) {
        curve.append(py::make_tuple(row.step, row.mean_episode_reward));
    }
    py::dict d;
    d["final_step"] = tr.final_step;
    d["episodes"] = tr.episodes;
    d["curve"] = curve;
    d["divergence"] = tr.divergence ? py::cast(*tr.divergence) : py::none();
    d["greedy_action"] = action_dict(greedy_joint_action(s, coord));
    return d;
}

py::dict oracle(const std::string& config) {
    RunConfig cfg = parse_run_config(config);
    const auto s = build_scenario(cfg);
    std::vector<CandidatePoint> pts;
    {
        py::gil_scoped_release release;
        pts = enumerate(s, s.space, OracleOptions{cfg.oracle_cap, cfg.threads});
    }
    py::list rows;
    for (const auto& p : pts) {
        py::dict d = action_dict(p.action);
        d["map"] = p.map_points;
        d["p_per_video_w"] = p.p_per_video_w;
        d["l_per_frame_ms"] = p.l_per_frame_ms;
        d["reward"] = p.reward;
        rows.append(d);
    }
    const auto& best = best_reward(pts);
    py::dict out;
    out["points"] = rows;
    out["front"] = pareto_front(pts);
    out["best"] = static_cast<std::size_t>(&best - pts.data());
    return out;
}

std::vector<std::size_t> front_of(const std::vector<std::array<double, 3>>& triples) {
    std::vector<CandidatePoint> pts(triples.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pts[i].map_points = triples[i][0];
        pts[i].p_per_video_w = triples[i][1];
        pts[i].l_per_frame_ms = triples[i][2];
    }
    return pareto_front(pts);
}

py::tuple cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulator, baselines, MARL trainer and oracle for edge video detection";

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    (void)config_error;

    m.def(
        "predict",
        [](double base_ms, double cpu_hz, double gpu_hz, double gamma, double vf_c_max_hz,
           double vf_g_max_hz) {
            return predict(base_ms, cpu_hz, gpu_hz, PredictorParams{gamma, vf_c_max_hz, vf_g_max_hz});
        },
        py::arg("base_ms"), py::arg("cpu_hz"), py::arg("gpu_hz"), py::arg("gamma"),
        py::arg("vf_c_max_hz"), py::arg("vf_g_max_hz"), "Predicted keyframe latency in ms.");
    m.def(
        "compute_reward",
        [](double acc, double po, double l_ms, double rt_ms, double alpha, bool hard,
           double hard_value) {
            return compute_reward(acc, po, l_ms, rt_ms, alpha,
                                  PenaltyConfig{hard ? PenaltyMode::hard : PenaltyMode::soft,
                                                hard_value});
        },
        py::arg("acc"), py::arg("po"), py::arg("l_ms"), py::arg("rt_ms") = 33.0,
        py::arg("alpha") = 1.0, py::arg("hard") = false, py::arg("hard_value") = 1.0);
    m.def(
        "trace",
        [](const std::string& config) {
            const auto t = load_or_generate_trace(parse_run_config(config));
            std::vector<double> raw;
            raw.reserve(t.size());
            for (const auto& f : t.frames) {
                raw.push_back(f.raw_feature);
            }
            return raw;
        },
        py::arg("config") = "{}", "Frame-to-frame similarities of the configured trace.");
    m.def(
        "keyframes",
        [](const std::string& config) {
            const auto cfg = parse_run_config(config);
            return select_keyframes(load_or_generate_trace(cfg), cfg.selector);
        },
        py::arg("config") = "{}");
    m.def("simulate", &simulate, py::arg("strategy") = "origin", py::arg("config") = "{}",
          py::arg("seed") = 1, py::arg("checkpoint") = "",
          "Runs one episode; returns the metrics as a dict.");
    m.def("train", &train_agents, py::arg("config") = "{}", py::arg("steps") = 1000,
          py::arg("seed") = 1, py::arg("checkpoint") = "");
    m.def("oracle", &oracle, py::arg("config") = "{}",
          "Enumerates the bounded space; returns points, front positions and the best position.");
    m.def("pareto_front", &front_of, py::arg("points"),
          "Front positions of (map, power, latency) triples.");
    m.def("config_hash",
          [](const std::string& config) { return config_hash(parse_run_config(config)); },
          py::arg("config") = "{}");
    m.def("run_cli", &cli, py::arg("args"), "Returns (exit_code, stdout, stderr).");
}
