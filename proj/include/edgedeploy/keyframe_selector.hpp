#pragma once

#include "edgedeploy/frame_stream.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

enum class SelectorMode { t_locality, static_threshold, select_all };

[[nodiscard]] std::string_view to_string(SelectorMode mode);
[[nodiscard]] SelectorMode selector_mode_from_string(std::string_view name);

struct SelectorConfig {
    SelectorMode mode = SelectorMode::t_locality;
    double threshold = 0.7;
    double band_fraction = 0.05;
    std::size_t fit_window = 5;
    std::size_t app_min_response_frames = 12;

    void validate() const;
};

/// Similarity of one frame to the current keyframe, `offset` frames after it.
struct SimilarityPoint {
    double offset = 0.0;
    double similarity = 1.0;
};

/// Regression line of keyframe-relative similarity against frame offset,
/// with a closed acceptance band of +/- half_width around it.
struct RegressionBand {
    double slope = 0.0;
    double intercept = 1.0;
    double half_width = 0.0;
    std::size_t anchor_index = 0;

    [[nodiscard]] double predict(std::size_t frame_index) const {
        return intercept + slope * static_cast<double>(frame_index - anchor_index);
    }
};

/// Ordinary least squares over `points`; half_width is band_fraction times
/// the similarity of the first frame after the keyframe (smallest positive
/// offset). Returns nullopt with fewer than two distinct offsets.
[[nodiscard]] std::optional<RegressionBand> fit_band(std::span<const SimilarityPoint> points,
                                                     const SelectorConfig& cfg,
                                                     std::size_t anchor_index = 0);

/// True iff the observed similarity leaves the band. A deviation exactly
/// equal to half_width stays inside.
[[nodiscard]] bool is_keyframe(double frame_similarity, std::size_t frame_index,
                               const RegressionBand& band);

/// Online keyframe selector for all three modes. Feed frames in order.
class KeyframeSelector {
public:
    explicit KeyframeSelector(SelectorConfig cfg);

    /// Consumes the next frame and reports whether it is a keyframe.
    bool observe(const Frame& frame);
    /// Re-anchors on a frame chosen as keyframe by someone else (the
    /// keyframe agent's schedule). Call after observe() returned false.
    void force_keyframe(std::size_t frame_index);

    [[nodiscard]] double similarity_to_keyframe() const { return composed_; }
    [[nodiscard]] std::optional<std::size_t> anchor() const { return anchor_; }
    [[nodiscard]] const std::optional<RegressionBand>& band() const { return band_; }
    [[nodiscard]] const SelectorConfig& config() const { return cfg_; }

private:
    void reanchor(std::size_t frame_index);
    [[nodiscard]] RegressionBand provisional_band(std::size_t anchor) const;

    SelectorConfig cfg_;
    std::optional<std::size_t> anchor_;
    double composed_ = 1.0;
    double prior_slope_ = 0.0;
    std::vector<SimilarityPoint> points_;
    std::optional<RegressionBand> band_;
};

/// Sorted keyframe indices chosen by `cfg.mode` over the whole trace.
[[nodiscard]] std::vector<std::size_t> select_keyframes(const FrameTrace& trace,
                                                        const SelectorConfig& cfg);

/// Threshold baseline: frame 0, then every frame whose running-product
/// similarity to the last keyframe drops below `threshold`.
[[nodiscard]] std::vector<std::size_t> static_select(const FrameTrace& trace, double threshold);

/// min(ceil(total / app_min_response_frames), ours_count).
[[nodiscard]] std::size_t keyframe_lower_bound(std::size_t ours_count, const SelectorConfig& cfg,
                                               std::size_t total_frames);

} // namespace edgedeploy
