#pragma once

#include "edgedeploy/collector.hpp"
#include "edgedeploy/device_model.hpp"
#include "edgedeploy/frame_stream.hpp"
#include "edgedeploy/keyframe_selector.hpp"
#include "edgedeploy/latency_predictor.hpp"
#include "edgedeploy/pruner.hpp"
#include "edgedeploy/reward.hpp"
#include "edgedeploy/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace edgedeploy {

/// Per-agent action lists. The D-agent indexes cpu x gpu pairs of one
/// cluster (d = cpu_i * |gpu| + gpu_i); K picks a keyframe offset; P picks a
/// stored LUT ratio inside the prune bounds.
struct ActionSpace {
    std::size_t cluster = 0;
    std::vector<std::size_t> cpu_levels;
    std::vector<std::size_t> gpu_levels;
    std::vector<std::size_t> offsets;
    std::vector<double> ratios;

    struct Indices {
        std::size_t d = 0;
        std::size_t k = 0;
        std::size_t p = 0;
        friend bool operator==(const Indices&, const Indices&) = default;
    };

    [[nodiscard]] std::size_t d_size() const { return cpu_levels.size() * gpu_levels.size(); }
    [[nodiscard]] std::size_t k_size() const { return offsets.size(); }
    [[nodiscard]] std::size_t p_size() const { return ratios.size(); }
    [[nodiscard]] std::size_t joint_size() const { return d_size() * k_size() * p_size(); }
    [[nodiscard]] std::array<std::size_t, 3> sizes() const { return {d_size(), k_size(), p_size()}; }

    [[nodiscard]] DeploymentAction decode(const Indices& idx) const;
    /// Inverse of decode. Throws ConfigError when the action is not in the space.
    [[nodiscard]] Indices encode(const DeploymentAction& action) const;
    void validate(const DeviceSpec& spec) const;
};

struct ScenarioOptions {
    double rt_tar_ms = 33.0;
    double alpha = 1.0;
    PenaltyConfig penalty;
    double accuracy_tolerance = 5.0; // mAP points below dense allowed by the upper prune bound
    SelectorConfig selector;
    std::vector<std::size_t> offsets = {1, 3, 6, 12};
    NoiseConfig noise;
    std::optional<std::size_t> queue_capacity;
    std::optional<std::size_t> cluster_override;
    double per_miss_penalty = 0.05;
    double sparsity_penalty = 0.02;
    double event_threshold = 0.9;
    std::size_t tolerance_frames = 2;
};

/// Everything one episode needs, precomputed once per (device, model, trace).
struct Scenario {
    DeviceSpec spec;
    ModelProfile model;
    FrameTrace trace;
    ScenarioOptions options;
    PruneBounds bounds;
    std::vector<PredictorParams> params; // one per cluster
    AccuracyModel accuracy;
    ActionSpace space;
    DeploymentAction origin_action; // performance cluster, top levels, dense, every frame
    double po_norm_w = 1.0;         // inference power of origin_action

    [[nodiscard]] double predicted_ms(const DeploymentAction& a) const;
    [[nodiscard]] double active_power_w(const DeploymentAction& a) const;
    /// Keyframe inference power amortized over the keyframe interval and
    /// normalized by the origin configuration's inference power.
    [[nodiscard]] double normalized_power(const DeploymentAction& a) const;
    [[nodiscard]] double step_reward(const DeploymentAction& a, bool keyframe) const;
    /// Reward of a finished episode from its metrics, on the same scale as
    /// step_reward.
    [[nodiscard]] double metrics_reward(const EpisodeMetrics& m) const;
};

[[nodiscard]] Scenario build_scenario(DeviceSpec spec, ModelProfile model, FrameTrace trace,
                                      ScenarioOptions options = {});

/// Dimension of the normalized state vector.
inline constexpr std::size_t kStateDim = 14;

struct DecisionContext {
    std::size_t frame_index = 0;
    double now_ms = 0.0;
    bool keyframe = false; // false: filtered frame while keyframes are queued
    std::size_t queue_depth = 0;
    std::size_t pending_keyframes = 0;
    double similarity_to_keyframe = 1.0;
    double raw_feature = 1.0;
    std::size_t frames_since_keyframe = 0;
    double utilization = 0.0; // busy share of the trailing window
    DeploymentAction current;
    std::array<double, kStateDim> state{};
};

/// Fills ctx.state from the other fields, every entry in [0, 1].
void encode_state(const Scenario& scenario, DecisionContext& ctx);

struct StepOutcome {
    double reward = 0.0;
    double l_pred_ms = 0.0;
    bool keyframe = false;
};

/// Strategy driving an episode. decide() is called on every keyframe arrival
/// and on filtered frames while keyframes are still queued.
class Controller {
public:
    virtual ~Controller() = default;
    [[nodiscard]] virtual SelectorConfig selector(const Scenario& scenario) const;
    /// Whether the K offset in the current action forces keyframes.
    [[nodiscard]] virtual bool forces_offsets() const { return false; }
    [[nodiscard]] virtual DeploymentAction initial_action(const Scenario& scenario) const;
    virtual DeploymentAction decide(const DecisionContext& ctx) = 0;
    virtual void feedback(const StepOutcome& /*outcome*/) {}
    virtual void episode_end() {}
};

struct EpisodeOptions {
    std::uint64_t noise_seed = 1;
    std::optional<double> noise_bound; // overrides scenario.options.noise
    std::size_t utilization_window_frames = 8;
};

struct EpisodeResult {
    std::vector<ProcessingRecord> records; // one per frame, by frame index
    EpisodeMetrics metrics;
    std::vector<std::size_t> keyframes;
    std::size_t decisions = 0;
    std::size_t drops = 0;
    double reward_sum = 0.0;

    [[nodiscard]] double mean_reward() const {
        return decisions > 0 ? reward_sum / static_cast<double>(decisions) : 0.0;
    }
};

[[nodiscard]] EpisodeResult simulate_episode(const Scenario& scenario, Controller& controller,
                                             const EpisodeOptions& options = {});

} // namespace edgedeploy
