#include "edgedeploy/environment.hpp"

#include "edgedeploy/cluster_selector.hpp"
#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace edgedeploy {

DeploymentAction ActionSpace::decode(const Indices& idx) const {
    if (idx.d >= d_size() || idx.k >= k_size() || idx.p >= p_size()) {
        throw ConfigError("action index out of range");
    }
    DeploymentAction a;
    a.cluster = cluster;
    a.cpu_level = cpu_levels[idx.d / gpu_levels.size()];
    a.gpu_level = gpu_levels[idx.d % gpu_levels.size()];
    a.keyframe_offset = offsets[idx.k];
    a.prune_ratio = ratios[idx.p];
    return a;
}

ActionSpace::Indices ActionSpace::encode(const DeploymentAction& action) const {
    auto find = [](const auto& v, const auto& x, const char* what) {
        const auto it = std::find(v.begin(), v.end(), x);
        if (it == v.end()) {
            throw ConfigError(std::string("action not in space: ") + what);
        }
        return static_cast<std::size_t>(it - v.begin());
    };
    if (action.cluster != cluster) {
        throw ConfigError("action not in space: cluster");
    }
    Indices idx;
    idx.d = find(cpu_levels, action.cpu_level, "cpu level") * gpu_levels.size() +
            find(gpu_levels, action.gpu_level, "gpu level");
    idx.k = find(offsets, action.keyframe_offset, "keyframe offset");
    idx.p = find(ratios, action.prune_ratio, "pruning ratio");
    return idx;
}

void ActionSpace::validate(const DeviceSpec& spec) const {
    if (cluster >= spec.clusters.size()) {
        throw ConfigError("action space cluster out of range");
    }
    if (cpu_levels.empty() || gpu_levels.empty() || offsets.empty() || ratios.empty()) {
        throw ConfigError("every agent needs at least one action");
    }
    for (auto l : cpu_levels) {
        if (l >= spec.clusters[cluster].levels.size()) {
            throw ConfigError("action space cpu level out of range");
        }
    }
    for (auto l : gpu_levels) {
        if (l >= spec.gpu_levels.size()) {
            throw ConfigError("action space gpu level out of range");
        }
    }
    for (auto o : offsets) {
        if (o == 0) {
            throw ConfigError("keyframe offsets must be >= 1");
        }
    }
}

double Scenario::predicted_ms(const DeploymentAction& a) const {
    if (a.cluster >= params.size()) {
        throw ConfigError("action cluster out of range");
    }
    return predicted_latency_ms(a, spec, model.lut, params[a.cluster]);
}

double Scenario::active_power_w(const DeploymentAction& a) const {
    return power_draw(spec, PlatformState{a.cluster, a.cpu_level, a.gpu_level}, 1.0);
}

double Scenario::normalized_power(const DeploymentAction& a) const {
    const double dp = active_power_w(a) - spec.idle_power;
    const double interval = static_cast<double>(a.keyframe_offset) * trace.period_ms();
    return dp * predicted_ms(a) / interval / po_norm_w;
}

double Scenario::step_reward(const DeploymentAction& a, bool keyframe) const {
    const double acc = keyframe ? model.lut.map_at(a.prune_ratio) / 100.0 : 0.0;
    return compute_reward(acc, normalized_power(a), predicted_ms(a), options.rt_tar_ms,
                          options.alpha, options.penalty);
}

double Scenario::metrics_reward(const EpisodeMetrics& m) const {
    return compute_reward(m.map_points / 100.0, m.p_per_video_w / po_norm_w, m.l_per_frame_ms,
                          options.rt_tar_ms, options.alpha, options.penalty);
}

Scenario build_scenario(DeviceSpec spec, ModelProfile model, FrameTrace trace,
                        ScenarioOptions options) {
    spec.validate();
    options.selector.validate();
    if (!(options.rt_tar_ms > 0.0)) {
        throw ConfigError("rt_tar_ms must be positive");
    }
    if (!(options.alpha >= 0.0)) {
        throw ConfigError("alpha must be nonnegative");
    }
    if (options.accuracy_tolerance < 0.0) {
        throw ConfigError("accuracy tolerance must be nonnegative");
    }
    if (options.noise.bound < 0.0 || options.noise.bound >= 1.0) {
        throw ConfigError("noise bound must lie in [0, 1)");
    }
    std::sort(options.offsets.begin(), options.offsets.end());
    options.offsets.erase(std::unique(options.offsets.begin(), options.offsets.end()),
                          options.offsets.end());
    for (auto o : options.offsets) {
        // Keyframe agent range: at least one keyframe per response window.
        if (o == 0 || o > options.selector.app_min_response_frames) {
            throw ConfigError("keyframe offsets must lie in [1, app_min_response_frames]");
        }
    }

    Scenario s;
    s.bounds = compute_bounds(model.lut, options.accuracy_tolerance);
    for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
        s.params.push_back(predictor_params(spec, c, model));
    }
    s.accuracy.curve = model.lut;
    s.accuracy.per_miss_penalty = options.per_miss_penalty;
    s.accuracy.sparsity_penalty = options.sparsity_penalty;
    s.accuracy.event_threshold = options.event_threshold;
    s.accuracy.tolerance_frames = options.tolerance_frames;
    s.accuracy.selector = options.selector;

    const std::size_t cluster = options.cluster_override
                                    ? *options.cluster_override
                                    : select_cluster(spec, model.max_layer_bytes());
    if (cluster >= spec.clusters.size()) {
        throw ConfigError("cluster override out of range");
    }
    s.space.cluster = cluster;
    for (std::size_t i = 0; i < spec.clusters[cluster].levels.size(); ++i) {
        s.space.cpu_levels.push_back(i);
    }
    for (std::size_t i = 0; i < spec.gpu_levels.size(); ++i) {
        s.space.gpu_levels.push_back(i);
    }
    s.space.offsets = options.offsets;
    s.space.ratios = ratios_within(model.lut, s.bounds);
    s.space.validate(spec);

    const std::size_t perf = spec.performance_cluster();
    s.origin_action = DeploymentAction{perf, spec.clusters[perf].levels.size() - 1,
                                       spec.gpu_levels.size() - 1, 1, 0.0};
    s.po_norm_w = inference_power(
        spec, PlatformState{perf, s.origin_action.cpu_level, s.origin_action.gpu_level}, 1.0);

    s.spec = std::move(spec);
    s.model = std::move(model);
    s.trace = std::move(trace);
    s.options = std::move(options);
    return s;
}

void encode_state(const Scenario& scenario, DecisionContext& ctx) {
    auto unit = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const auto& spec = scenario.spec;
    const auto& model = scenario.model;
    const auto& cluster = spec.clusters.at(ctx.current.cluster);
    const double n = std::max<double>(1.0, static_cast<double>(scenario.trace.size()));
    const double horizon = static_cast<double>(scenario.options.selector.app_min_response_frames);
    constexpr double kQueueScale = 16.0;
    constexpr double kCacheScale = 4.0 * 1024.0 * 1024.0;
    ctx.state = {
        unit(ctx.similarity_to_keyframe),
        unit(ctx.raw_feature),
        unit(static_cast<double>(ctx.queue_depth) / kQueueScale),
        unit(static_cast<double>(ctx.pending_keyframes) / kQueueScale),
        unit(static_cast<double>(ctx.frame_index) / n),
        unit(static_cast<double>(ctx.frames_since_keyframe) / horizon),
        unit(model.weight_count / 1e8),
        unit(model.layer_count / 256.0),
        unit(model.mean_channels / 1024.0),
        unit(model.mean_kernel / 7.0),
        unit(cluster.levels.at(ctx.current.cpu_level).hz() / cluster.max_level().hz()),
        unit(spec.gpu_levels.at(ctx.current.gpu_level).hz() / spec.gpu_max().hz()),
        unit(static_cast<double>(cluster.l2_cache_bytes) / kCacheScale),
        ctx.keyframe ? 1.0 : 0.0,
    };
}

SelectorConfig Controller::selector(const Scenario& scenario) const {
    return scenario.options.selector;
}

DeploymentAction Controller::initial_action(const Scenario& scenario) const {
    const auto& sp = scenario.space;
    return sp.decode({sp.d_size() - 1, sp.k_size() - 1, 0});
}

namespace {

struct Interval {
    double start;
    double end;
};

class EpisodeRunner {
public:
    EpisodeRunner(const Scenario& s, Controller& c, const EpisodeOptions& o)
        : s_(s), ctl_(c), opt_(o), rng_(o.noise_seed), queue_(s.options.queue_capacity),
          selector_(c.selector(s)) {
        noise_.bound = o.noise_bound ? *o.noise_bound : s.options.noise.bound;
        current_ = ctl_.initial_action(s_);
        check_action(current_);
        result_.records.resize(s_.trace.size());
        for (std::size_t i = 0; i < s_.trace.size(); ++i) {
            auto& r = result_.records[i];
            r.frame_index = i;
            r.arrival_ms = s_.trace.frames[i].arrival_ms;
            r.service_start_ms = r.arrival_ms;
        }
    }

    EpisodeResult run() {
        const bool forces = ctl_.forces_offsets();
        for (const auto& frame : s_.trace.frames) {
            const double t = frame.arrival_ms;
            serve_until(t);
            queue_.enqueue_arrivals(s_.trace, t);

            bool kf = selector_.observe(frame);
            if (!kf && forces && anchor_ && frame.index - *anchor_ >= current_.keyframe_offset) {
                selector_.force_keyframe(frame.index);
                kf = true;
            }
            if (kf) {
                anchor_ = frame.index;
                if (!queue_.mark_keyframe(frame.index)) {
                    kf = false; // dropped on arrival by a full queue
                }
            } else {
                queue_.filter(frame.index);
            }
            if (kf || queue_.pending_keyframes() > 0) {
                decide(frame, kf);
            }
            serve_until(t);
        }
        serve_until(std::numeric_limits<double>::infinity());
        ctl_.episode_end();
        result_.drops = queue_.drops();
        result_.metrics =
            aggregate(result_.records, s_.trace, s_.spec.idle_power, s_.accuracy);
        std::sort(result_.keyframes.begin(), result_.keyframes.end());
        return std::move(result_);
    }

private:
    void check_action(const DeploymentAction& a) const {
        check_state(s_.spec, PlatformState{a.cluster, a.cpu_level, a.gpu_level});
        if (a.keyframe_offset == 0) {
            throw SimulationError("controller returned a zero keyframe offset");
        }
        (void)s_.model.lut.map_at(a.prune_ratio);
    }

    void decide(const Frame& frame, bool kf) {
        DecisionContext ctx;
        ctx.frame_index = frame.index;
        ctx.now_ms = frame.arrival_ms;
        ctx.keyframe = kf;
        ctx.queue_depth = queue_.size();
        ctx.pending_keyframes = queue_.pending_keyframes();
        ctx.similarity_to_keyframe = selector_.similarity_to_keyframe();
        ctx.raw_feature = frame.raw_feature;
        ctx.frames_since_keyframe = anchor_ ? frame.index - *anchor_ : 0;
        ctx.utilization = utilization(frame.arrival_ms);
        ctx.current = current_;
        encode_state(s_, ctx);

        const DeploymentAction a = ctl_.decide(ctx);
        check_action(a);
        current_ = a;
        StepOutcome out;
        out.keyframe = kf;
        out.l_pred_ms = s_.predicted_ms(a);
        out.reward = s_.step_reward(a, kf);
        ++result_.decisions;
        result_.reward_sum += out.reward;
        ctl_.feedback(out);
    }

    void serve_until(double t) {
        while (busy_until_ <= t) {
            const auto next = queue_.pop_keyframe();
            if (!next) {
                return;
            }
            auto& r = result_.records[*next];
            const double start = std::max(busy_until_, r.arrival_ms);
            r.is_keyframe = true;
            r.service_start_ms = start;
            r.action = current_;
            r.service_ms = ground_truth_service_ms(current_, s_.spec, s_.model.lut,
                                                   s_.params[current_.cluster], noise_, rng_);
            r.power_w = s_.active_power_w(current_);
            busy_until_ = start + r.service_ms;
            busy_.push_back(Interval{start, busy_until_});
            result_.keyframes.push_back(*next);
        }
    }

    double utilization(double now) {
        const double window =
            static_cast<double>(opt_.utilization_window_frames) * s_.trace.period_ms();
        if (window <= 0.0) {
            return 0.0;
        }
        const double from = now - window;
        while (!busy_.empty() && busy_.front().end <= from) {
            busy_.pop_front();
        }
        double busy = 0.0;
        for (const auto& iv : busy_) {
            busy += std::max(0.0, std::min(iv.end, now) - std::max(iv.start, from));
        }
        return std::clamp(busy / window, 0.0, 1.0);
    }

    const Scenario& s_;
    Controller& ctl_;
    const EpisodeOptions& opt_;
    NoiseConfig noise_;
    Rng rng_;
    FrameQueue queue_;
    KeyframeSelector selector_;
    DeploymentAction current_;
    std::optional<std::size_t> anchor_;
    double busy_until_ = 0.0;
    std::deque<Interval> busy_;
    EpisodeResult result_;
};

} // namespace

EpisodeResult simulate_episode(const Scenario& scenario, Controller& controller,
                               const EpisodeOptions& options) {
    return EpisodeRunner(scenario, controller, options).run();
}

} // namespace edgedeploy
