#include "edgedeploy/collector.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>

namespace edgedeploy {

double predicted_latency_ms(const DeploymentAction& action, const DeviceSpec& spec,
                            const PruningLut& lut, const PredictorParams& params) {
    check_state(spec, PlatformState{action.cluster, action.cpu_level, action.gpu_level});
    const auto& cluster = spec.clusters[action.cluster];
    return predict(lut.latency_at(action.prune_ratio), cluster.levels[action.cpu_level].hz(),
                   spec.gpu_levels[action.gpu_level].hz(), params);
}

double ground_truth_service_ms(const DeploymentAction& action, const DeviceSpec& spec,
                               const PruningLut& lut, const PredictorParams& params,
                               const NoiseConfig& noise, Rng& rng) {
    const double base = predicted_latency_ms(action, spec, lut, params);
    if (noise.bound <= 0.0) {
        return base;
    }
    const double eta = (2.0 * unit_draw(rng) - 1.0) * noise.bound;
    return base * (1.0 + eta);
}

PenaltyBreakdown keyframe_penalty(const AccuracyModel& model, std::span<const std::size_t> kf_set,
                                  const FrameTrace& trace) {
    PenaltyBreakdown out;
    if (trace.empty()) {
        return out;
    }
    const auto events = trace.scene_events(model.event_threshold);
    out.events = events.size();
    for (const std::size_t e : events) {
        const auto it = std::lower_bound(kf_set.begin(), kf_set.end(), e);
        if (it == kf_set.end() || *it > e + model.tolerance_frames) {
            ++out.missed;
        }
    }
    SelectorConfig ref = model.selector;
    ref.mode = SelectorMode::t_locality;
    const std::size_t ours = select_keyframes(trace, ref).size();
    out.lower_bound = keyframe_lower_bound(ours, ref, trace.size());
    const std::size_t shortfall =
        kf_set.size() < out.lower_bound ? out.lower_bound - kf_set.size() : 0;
    out.penalty = model.per_miss_penalty * static_cast<double>(out.missed) +
                  model.sparsity_penalty * static_cast<double>(shortfall);
    return out;
}

double sample_accuracy(const AccuracyModel& model, double ratio,
                       std::span<const std::size_t> kf_set, const FrameTrace& trace) {
    if (kf_set.empty()) {
        throw ConfigError("sample_accuracy: keyframe set is empty");
    }
    const double value = model.curve.map_at(ratio) - keyframe_penalty(model, kf_set, trace).penalty;
    return std::max(0.0, value);
}

EpisodeMetrics aggregate(std::span<const ProcessingRecord> records, const FrameTrace& trace,
                         double idle_power, const AccuracyModel& accuracy) {
    EpisodeMetrics m;
    std::vector<std::size_t> kf_set;
    double service_sum = 0.0;
    double energy = 0.0; // W * ms
    double map_sum = 0.0;
    for (const auto& r : records) {
        if (!r.is_keyframe) {
            continue;
        }
        kf_set.push_back(r.frame_index);
        service_sum += r.service_ms;
        energy += (r.power_w - idle_power) * r.service_ms;
        map_sum += accuracy.curve.map_at(r.action.prune_ratio);
    }
    m.kf_count = kf_set.size();
    if (kf_set.empty() || trace.empty()) {
        return m;
    }
    std::sort(kf_set.begin(), kf_set.end());
    const auto n = static_cast<double>(kf_set.size());
    m.l_per_frame_ms = service_sum / n;
    m.p_per_video_w = energy / (static_cast<double>(trace.size()) * trace.period_ms());
    const auto waits = waiting_stats(records);
    m.wt_ms = waits.wt_ms;
    m.wp_fraction = waits.wp;
    m.map_points = std::max(0.0, map_sum / n - keyframe_penalty(accuracy, kf_set, trace).penalty);
    return m;
}

} // namespace edgedeploy
