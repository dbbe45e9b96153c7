#include "edgedeploy/keyframe_selector.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgedeploy {

std::string_view to_string(SelectorMode mode) {
    switch (mode) {
    case SelectorMode::t_locality:
        return "t_locality";
    case SelectorMode::static_threshold:
        return "static_threshold";
    case SelectorMode::select_all:
        return "select_all";
    }
    return "unknown";
}

SelectorMode selector_mode_from_string(std::string_view name) {
    if (name == "t_locality") {
        return SelectorMode::t_locality;
    }
    if (name == "static_threshold" || name == "static") {
        return SelectorMode::static_threshold;
    }
    if (name == "select_all" || name == "all") {
        return SelectorMode::select_all;
    }
    throw ConfigError("unknown selector mode '" + std::string(name) + "'");
}

void SelectorConfig::validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ConfigError("selector threshold must lie in (0, 1]");
    }
    if (!(band_fraction > 0.0 && band_fraction < 1.0)) {
        throw ConfigError("band_fraction must lie in (0, 1)");
    }
    if (fit_window < 2) {
        throw ConfigError("fit_window must be >= 2");
    }
    if (app_min_response_frames == 0) {
        throw ConfigError("app_min_response_frames must be >= 1");
    }
}

std::optional<RegressionBand> fit_band(std::span<const SimilarityPoint> points,
                                       const SelectorConfig& cfg, std::size_t anchor_index) {
    if (points.size() < 2) {
        return std::nullopt;
    }
    const auto n = static_cast<double>(points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : points) {
        mx += p.offset;
        my += p.similarity;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        sxx += (p.offset - mx) * (p.offset - mx);
        sxy += (p.offset - mx) * (p.similarity - my);
    }
    if (sxx <= 0.0) {
        return std::nullopt;
    }
    RegressionBand band;
    band.slope = sxy / sxx;
    band.intercept = my - band.slope * mx;
    band.anchor_index = anchor_index;

    double first_offset = std::numeric_limits<double>::infinity();
    double first_sim = 1.0;
    for (const auto& p : points) {
        if (p.offset > 0.0 && p.offset < first_offset) {
            first_offset = p.offset;
            first_sim = p.similarity;
        }
    }
    band.half_width = cfg.band_fraction * first_sim;
    return band;
}

bool is_keyframe(double frame_similarity, std::size_t frame_index, const RegressionBand& band) {
    return std::abs(frame_similarity - band.predict(frame_index)) > band.half_width;
}

KeyframeSelector::KeyframeSelector(SelectorConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    points_.reserve(cfg_.fit_window + 1);
}

void KeyframeSelector::reanchor(std::size_t frame_index) {
    if (band_) {
        prior_slope_ = band_->slope;
    }
    anchor_ = frame_index;
    composed_ = 1.0;
    points_.clear();
    points_.push_back(SimilarityPoint{0.0, 1.0});
    band_.reset();
}

RegressionBand KeyframeSelector::provisional_band(std::size_t anchor) const {
    // Before two points exist after the keyframe, carry the previous slope
    // over and size the band from its one-step prediction.
    RegressionBand b;
    b.slope = prior_slope_;
    b.intercept = 1.0;
    b.anchor_index = anchor;
    b.half_width = cfg_.band_fraction * (1.0 + prior_slope_);
    return b;
}

bool KeyframeSelector::observe(const Frame& frame) {
    if (!anchor_) {
        reanchor(frame.index);
        return true;
    }
    composed_ *= frame.raw_feature;
    switch (cfg_.mode) {
    case SelectorMode::select_all:
        reanchor(frame.index);
        return true;
    case SelectorMode::static_threshold:
        if (composed_ < cfg_.threshold) {
            reanchor(frame.index);
            return true;
        }
        return false;
    case SelectorMode::t_locality:
        break;
    }

    const RegressionBand band = band_ ? *band_ : provisional_band(*anchor_);
    if (is_keyframe(composed_, frame.index, band)) {
        reanchor(frame.index);
        return true;
    }
    if (points_.size() < cfg_.fit_window + 1) {
        points_.push_back(
            SimilarityPoint{static_cast<double>(frame.index - *anchor_), composed_});
        band_ = fit_band(points_, cfg_, *anchor_);
    }
    return false;
}

void KeyframeSelector::force_keyframe(std::size_t frame_index) { reanchor(frame_index); }

std::vector<std::size_t> select_keyframes(const FrameTrace& trace, const SelectorConfig& cfg) {
    KeyframeSelector selector(cfg);
    std::vector<std::size_t> out;
    for (const auto& f : trace.frames) {
        if (selector.observe(f)) {
            out.push_back(f.index);
        }
    }
    return out;
}

std::vector<std::size_t> static_select(const FrameTrace& trace, double threshold) {
    SelectorConfig cfg;
    cfg.mode = SelectorMode::static_threshold;
    cfg.threshold = threshold;
    return select_keyframes(trace, cfg);
}

std::size_t keyframe_lower_bound(std::size_t ours_count, const SelectorConfig& cfg,
                                 std::size_t total_frames) {
    if (total_frames == 0) {
        throw ConfigError("keyframe_lower_bound: trace has no frames");
    }
    if (ours_count > total_frames) {
        throw ConfigError("keyframe_lower_bound: keyframe count exceeds frame count");
    }
    const std::size_t window = cfg.app_min_response_frames;
    const std::size_t app_count = (total_frames + window - 1) / window;
    return std::min(app_count, ours_count);
}

} // namespace edgedeploy
