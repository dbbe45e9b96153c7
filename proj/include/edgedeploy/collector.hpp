#pragma once

#include "edgedeploy/device_model.hpp"
#include "edgedeploy/frame_stream.hpp"
#include "edgedeploy/keyframe_selector.hpp"
#include "edgedeploy/latency_predictor.hpp"
#include "edgedeploy/pruner.hpp"
#include "edgedeploy/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace edgedeploy {

/// Bounded multiplicative noise on service time: t = t_pred * (1 + eta),
/// eta ~ U[-bound, +bound].
struct NoiseConfig {
    double bound = 0.03;
};

/// Predicted latency of an action on `spec`.
[[nodiscard]] double predicted_latency_ms(const DeploymentAction& action, const DeviceSpec& spec,
                                          const PruningLut& lut, const PredictorParams& params);

/// Simulated measurement of one keyframe's service time. Consumes exactly one
/// draw from `rng` when bound > 0 and none otherwise.
[[nodiscard]] double ground_truth_service_ms(const DeploymentAction& action,
                                             const DeviceSpec& spec, const PruningLut& lut,
                                             const PredictorParams& params,
                                             const NoiseConfig& noise, Rng& rng);

/// Emulated detection accuracy: the LUT's accuracy curve minus a penalty for
/// scene changes no keyframe covered and for keyframe sets sparser than the
/// application lower bound.
struct AccuracyModel {
    PruningLut curve;
    double per_miss_penalty = 0.05;   // mAP points per uncovered scene change
    double sparsity_penalty = 0.02;   // mAP points per keyframe below the bound
    double event_threshold = 0.9;     // frame-to-frame similarity marking a scene change
    std::size_t tolerance_frames = 2; // a keyframe within this many frames covers it
    SelectorConfig selector;          // defines the reference keyframe count
};

struct PenaltyBreakdown {
    std::size_t events = 0;
    std::size_t missed = 0;
    std::size_t lower_bound = 0;
    double penalty = 0.0;
};

/// `kf_set` must be sorted ascending.
[[nodiscard]] PenaltyBreakdown keyframe_penalty(const AccuracyModel& model,
                                                std::span<const std::size_t> kf_set,
                                                const FrameTrace& trace);

[[nodiscard]] double sample_accuracy(const AccuracyModel& model, double ratio,
                                     std::span<const std::size_t> kf_set, const FrameTrace& trace);

struct EpisodeMetrics {
    double l_per_frame_ms = 0.0;
    std::size_t kf_count = 0;
    double wt_ms = 0.0;
    double wp_fraction = 0.0;
    double p_per_video_w = 0.0;
    double map_points = 0.0;

    friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

/// Per-video metrics. P/V is keyframe inference energy over the video's wall
/// time; accuracy averages the curve over processed keyframes' ratios.
[[nodiscard]] EpisodeMetrics aggregate(std::span<const ProcessingRecord> records,
                                       const FrameTrace& trace, double idle_power,
                                       const AccuracyModel& accuracy);

} // namespace edgedeploy
