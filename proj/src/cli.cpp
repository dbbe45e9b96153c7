#include "edgedeploy/cli.hpp"

#include "edgedeploy/config.hpp"
#include "edgedeploy/error.hpp"
#include "edgedeploy/marl.hpp"
#include "edgedeploy/oracle.hpp"
#include "edgedeploy/strategies.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace edgedeploy {

namespace fs = std::filesystem;

std::string metrics_csv_header() { return "approach,L/F,KF#,WT,WP,P/V,mAP"; }

std::string metrics_csv_row(std::string_view approach, const EpisodeMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.*s,%.3f,%zu,%.3f,%.4f,%.6f,%.3f",
                  static_cast<int>(approach.size()), approach.data(), m.l_per_frame_ms,
                  m.kf_count, m.wt_ms, m.wp_fraction, m.p_per_video_w, m.map_points);
    return buf;
}

namespace {

struct Flags {
    std::string config;
    std::string device;
    std::string model;
    std::string trace;
    std::string gen;
    std::string lut;
    std::string strategy;
    double rt_tar_ms = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string checkpoint;
    std::size_t steps = 0;
    std::string strategies;
    std::string resume;
    bool unbounded = false;
    std::size_t cap = 0;
    double noise = 0.0;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

// Writes `body` under the output directory with the config hash on top.
class OutputDir {
public:
    explicit OutputDir(const RunConfig& cfg) : root_(cfg.out), hash_(config_hash(cfg)) {}

    [[nodiscard]] fs::path path(const std::string& name) const { return root_ / name; }

    void write(const fs::path& target, const std::string& body) const {
        if (target.has_parent_path()) {
            fs::create_directories(target.parent_path());
        }
        // One writer per file: open, write, close.
        std::ofstream f(target, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw ConfigError("cannot write '" + target.string() + "'");
        }
        f << "# config-hash: " << hash_ << '\n' << body;
        if (!f) {
            throw SimulationError("write failed for '" + target.string() + "'");
        }
    }

    [[nodiscard]] const std::string& hash() const { return hash_; }

private:
    fs::path root_;
    std::string hash_;
};

struct Evaluated {
    EpisodeResult result;
    std::string name;
};

Evaluated evaluate_strategy(const std::string& name, const Scenario& s, const RunConfig& cfg,
                            std::uint64_t seed) {
    EpisodeOptions opts;
    opts.noise_seed = seed;
    opts.noise_bound = cfg.eval_noise;
    if (is_baseline_name(name)) {
        auto ctl = make_baseline(name, s);
        return {simulate_episode(s, *ctl, opts), name};
    }
    if (name == "marl") {
        if (!cfg.checkpoint) {
            throw ConfigError("strategy 'marl' needs --checkpoint");
        }
        Coordinator coord(s.space, cfg.marl, cfg.seed);
        (void)load_checkpoint(*cfg.checkpoint, coord);
        return {run_episode(s, coord, RunMode::eval, seed, cfg.eval_noise), name};
    }
    throw ConfigError("unknown strategy '" + name + "' (origin, static, static_<threshold>, marl)");
}

void check_strategy_name(const std::string& name) {
    if (!is_baseline_name(name) && name != "marl") {
        throw ConfigError("unknown strategy '" + name +
                          "' (origin, static, static_<threshold>, marl)");
    }
}

std::string action_text(const DeploymentAction& a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "cluster=%zu cpu=%zu gpu=%zu offset=%zu ratio=%.2f", a.cluster,
                  a.cpu_level, a.gpu_level, a.keyframe_offset, a.prune_ratio);
    return buf;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    check_strategy_name(cfg.strategy);
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    std::ostringstream metrics;
    std::ostringstream frames;
    metrics << metrics_csv_header() << '\n';
    frames << "seed,frame,arrival_ms,keyframe,service_start_ms,service_ms,power_w,cluster,"
              "cpu_level,gpu_level,keyframe_offset,prune_ratio\n";
    out << metrics_csv_header() << '\n';
    for (auto seed : cfg.seeds) {
        const auto ev = evaluate_strategy(cfg.strategy, s, cfg, seed);
        const std::string name =
            cfg.seeds.size() > 1 ? cfg.strategy + "/seed" + std::to_string(seed) : cfg.strategy;
        const auto row = metrics_csv_row(name, ev.result.metrics);
        metrics << row << '\n';
        out << row << '\n';
        char buf[256];
        for (const auto& r : ev.result.records) {
            std::snprintf(buf, sizeof buf, "%llu,%zu,%.4f,%d,%.4f,%.4f,%.4f,%zu,%zu,%zu,%zu,%.2f\n",
                          static_cast<unsigned long long>(seed), r.frame_index, r.arrival_ms,
                          r.is_keyframe ? 1 : 0, r.service_start_ms, r.service_ms, r.power_w,
                          r.action.cluster, r.action.cpu_level, r.action.gpu_level,
                          r.action.keyframe_offset, r.action.prune_ratio);
            frames << buf;
        }
    }
    dir.write(dir.path("metrics.csv"), metrics.str());
    dir.write(dir.path("frames.csv"), frames.str());
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::string& resume, std::ostream& out,
              std::ostream& err) {
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    Coordinator coord(s.space, cfg.marl, cfg.seed);
    TrainOptions opts;
    opts.steps = cfg.steps;
    opts.seed = cfg.seed;
    opts.noise_bound = cfg.train_noise;
    if (!resume.empty()) {
        opts.start_step = load_checkpoint(resume, coord);
    }
    const auto result = train(s, coord, opts);

    const fs::path ckpt = cfg.checkpoint ? fs::path(*cfg.checkpoint) : dir.path("checkpoint.txt");
    std::ostringstream body;
    coord.save(body, result.final_step);
    dir.write(ckpt, body.str());
    std::ostringstream curve;
    write_curve_csv(curve, result.curve);
    dir.write(dir.path("curve.csv"), curve.str());

    if (result.divergence) {
        err << "training diverged after step " << result.final_step << ": "
            << *result.divergence << "\nlast good weights saved to " << ckpt.string() << '\n';
        return kExitDivergence;
    }
    const auto ev = run_episode(s, coord, RunMode::eval, cfg.seed, cfg.eval_noise);
    out << "trained " << result.final_step << " steps over " << result.episodes
        << " episodes\n";
    out << "greedy first action: " << action_text(greedy_joint_action(s, coord)) << '\n';
    out << metrics_csv_header() << '\n' << metrics_csv_row("marl", ev.metrics) << '\n';
    out << "checkpoint: " << ckpt.string() << '\n';
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    if (cfg.strategies.size() < 2) {
        throw ConfigError("compare needs at least two strategies");
    }
    for (const auto& name : cfg.strategies) {
        check_strategy_name(name);
    }
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    std::ostringstream csv;
    csv << metrics_csv_header() << ",power_reduction_pct\n";
    std::optional<double> base;
    for (const auto& name : cfg.strategies) {
        const auto ev = evaluate_strategy(name, s, cfg, cfg.seed);
        const double pv = ev.result.metrics.p_per_video_w;
        if (!base) {
            base = pv;
        }
        const double reduction = *base > 0.0 ? 100.0 * (1.0 - pv / *base) : 0.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.2f", reduction);
        csv << metrics_csv_row(name, ev.result.metrics) << buf << '\n';
    }
    dir.write(dir.path("compare.csv"), csv.str());
    out << csv.str();
    return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, bool unbounded, std::ostream& out) {
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    OracleOptions opts{cfg.oracle_cap, cfg.threads};
    const auto points = unbounded ? enumerate_unbounded(s, opts) : enumerate(s, s.space, opts);
    std::ostringstream csv;
    write_front_csv(csv, points);
    dir.write(dir.path("front.csv"), csv.str());
    const auto front = pareto_front(points);
    const auto& best = best_reward(points);
    char buf[160];
    std::snprintf(buf, sizeof buf, "L/F=%.3f P/V=%.6f mAP=%.3f reward=%.6f", best.l_per_frame_ms,
                  best.p_per_video_w, best.map_points, best.reward);
    out << "candidates: " << points.size() << "\nfront: " << front.size()
        << "\nbest: " << action_text(best.action) << ' ' << buf << '\n';
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, double noise, std::ostream& out) {
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    const auto cluster = s.space.cluster;
    std::vector<SweepPoint> sweep;
    for (double r : s.model.lut.ratios()) {
        const auto part = axis_sweep(s.spec, cluster, r);
        sweep.insert(sweep.end(), part.begin(), part.end());
    }
    const auto& params = s.params[cluster];
    // The device model indexes levels, so map frequencies back to them.
    auto level_of = [](const std::vector<VfLevel>& levels, double hz) {
        for (const auto& l : levels) {
            if (l.hz() == hz) {
                return l.index;
            }
        }
        throw SimulationError("sweep frequency not in the level table");
    };
    NoiseConfig nc;
    nc.bound = noise;
    Rng rng(cfg.seed);
    const auto truth = [&](double cpu_hz, double gpu_hz, double ratio) {
        DeploymentAction a;
        a.cluster = cluster;
        a.cpu_level = level_of(s.spec.clusters[cluster].levels, cpu_hz);
        a.gpu_level = level_of(s.spec.gpu_levels, gpu_hz);
        a.prune_ratio = ratio;
        return ground_truth_service_ms(a, s.spec, s.model.lut, params, nc, rng);
    };
    const auto report = validate(params, s.model.lut, truth, sweep);
    std::ostringstream csv;
    report.write_csv(csv);
    dir.write(dir.path("validation.csv"), csv.str());
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "noise bound %.4f\ncpu axis: mean %.5f max %.5f (%zu points)\n"
                  "gpu axis: mean %.5f max %.5f (%zu points)\n",
                  noise, report.cpu.mean, report.cpu.max, report.cpu.count, report.gpu.mean,
                  report.gpu.max, report.gpu.count);
    out << buf;
    return kExitOk;
}

int cmd_select(const RunConfig& cfg, std::ostream& out) {
    const auto s = build_scenario(cfg);
    const OutputDir dir(cfg);
    const auto kf = select_keyframes(s.trace, cfg.selector);
    std::ostringstream csv;
    csv << "frame,arrival_ms,raw_feature\n";
    char buf[96];
    for (auto i : kf) {
        const auto& f = s.trace.frames[i];
        std::snprintf(buf, sizeof buf, "%zu,%.4f,%.6f\n", f.index, f.arrival_ms, f.raw_feature);
        csv << buf;
    }
    dir.write(dir.path("keyframes.csv"), csv.str());
    const auto pen = keyframe_penalty(s.accuracy, kf, s.trace);
    out << "mode: " << to_string(cfg.selector.mode) << "\nframes: " << s.trace.size()
        << "\nkeyframes: " << kf.size() << "\nscene changes: " << pen.events
        << "\nmissed: " << pen.missed << "\nlower bound: " << pen.lower_bound << '\n';
    return kExitOk;
}

int cmd_gen_trace(const RunConfig& cfg, std::ostream& out) {
    const auto trace = load_or_generate_trace(cfg);
    const OutputDir dir(cfg);
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    dir.write(dir.path("trace.csv"), csv.str());
    out << "frames: " << trace.size() << "\nscene changes: "
        << trace.scene_events(ScenarioOptions{}.event_threshold).size() << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint DVFS, keyframe and pruning control for edge video detection"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    auto* o_config = app.add_option("--config", f.config, "JSON run configuration");
    auto* o_device = app.add_option("--device", f.device, "bundled device name or JSON path");
    auto* o_model = app.add_option("--model", f.model, "bundled detector profile");
    auto* o_trace = app.add_option("--trace", f.trace, "trace CSV path");
    auto* o_gen = app.add_option("--gen", f.gen, "generate the trace: key=value[,key=value]");
    auto* o_lut = app.add_option("--lut", f.lut, "bundled model name or LUT CSV path");
    auto* o_strategy = app.add_option("--strategy", f.strategy, "origin | static_<thr> | marl");
    auto* o_rt = app.add_option("--rt-tar-ms", f.rt_tar_ms, "latency target");
    auto* o_alpha = app.add_option("--alpha", f.alpha, "power weight in the reward");
    auto* o_seed = app.add_option("--seed", f.seed, "seed for training and evaluation");
    auto* o_out = app.add_option("--out", f.out, "output directory");
    auto* o_ckpt = app.add_option("--checkpoint", f.checkpoint, "agent checkpoint path");
    auto* o_steps = app.add_option("--steps", f.steps, "training steps");
    o_trace->excludes(o_gen);

    auto* simulate = app.add_subcommand("simulate", "evaluate one strategy per seed");
    auto* train_cmd = app.add_subcommand("train", "train the agents");
    auto* o_resume = train_cmd->add_option("--resume", f.resume, "continue from a checkpoint");
    auto* compare = app.add_subcommand("compare", "side-by-side strategy report");
    auto* o_strats =
        compare->add_option("--strategies", f.strategies, "comma list, baseline first");
    auto* oracle = app.add_subcommand("oracle", "enumerate the deployment space");
    oracle->add_flag("--unbounded", f.unbounded, "ignore the optimized bounds");
    auto* o_cap = oracle->add_option("--cap", f.cap, "largest space to enumerate");
    auto* validate_cmd = app.add_subcommand("validate", "latency predictor validation sweep");
    auto* o_noise = validate_cmd->add_option("--noise", f.noise, "ground-truth noise bound");
    auto* select = app.add_subcommand("select", "run the keyframe selector on the trace");
    auto* gen_trace = app.add_subcommand("gen-trace", "write a synthetic trace");
    (void)o_resume;

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg = o_config->count() ? load_run_config(f.config) : RunConfig{};
        if (o_device->count()) {
            cfg.device = f.device;
        }
        if (o_model->count()) {
            cfg.model = f.model;
        }
        if (o_trace->count()) {
            cfg.trace = f.trace;
        }
        if (o_gen->count()) {
            apply_gen_overrides(cfg, f.gen);
        }
        if (o_lut->count()) {
            cfg.lut = f.lut;
        }
        if (o_strategy->count()) {
            cfg.strategy = f.strategy;
        }
        if (o_rt->count()) {
            cfg.rt_tar_ms = f.rt_tar_ms;
        }
        if (o_alpha->count()) {
            cfg.alpha = f.alpha;
        }
        if (o_seed->count()) {
            cfg.seed = f.seed;
            cfg.seeds = {f.seed};
        }
        if (o_out->count()) {
            cfg.out = f.out;
        }
        if (o_ckpt->count()) {
            cfg.checkpoint = f.checkpoint;
        }
        if (o_steps->count()) {
            cfg.steps = f.steps;
        }
        if (o_strats->count()) {
            cfg.strategies = split_list(f.strategies);
        }
        if (o_cap->count()) {
            cfg.oracle_cap = f.cap;
        }
        cfg.validate();

        if (simulate->parsed()) {
            return cmd_simulate(cfg, out);
        }
        if (train_cmd->parsed()) {
            return cmd_train(cfg, f.resume, out, err);
        }
        if (compare->parsed()) {
            return cmd_compare(cfg, out);
        }
        if (oracle->parsed()) {
            return cmd_oracle(cfg, f.unbounded, out);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(cfg, o_noise->count() ? f.noise : cfg.train_noise, out);
        }
        if (select->parsed()) {
            return cmd_select(cfg, out);
        }
        if (gen_trace->parsed()) {
            return cmd_gen_trace(cfg, out);
        }
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace edgedeploy
