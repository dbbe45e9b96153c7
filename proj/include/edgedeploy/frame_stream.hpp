#pragma once

#include "edgedeploy/types.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace edgedeploy {

/// A video frame reduced to what the simulator needs. raw_feature is the
/// feature similarity to the immediately preceding frame (1.0 for frame 0);
/// similarity to a keyframe is the running product of raw features.
struct Frame {
    std::size_t index = 0;
    double arrival_ms = 0.0;
    double ssim_to_prev_key = 1.0;
    double raw_feature = 1.0;
};

struct FrameTrace {
    std::vector<Frame> frames;
    double fps = 30.0;
    double duration_ms = 0.0;

    [[nodiscard]] std::size_t size() const { return frames.size(); }
    [[nodiscard]] bool empty() const { return frames.empty(); }
    [[nodiscard]] double period_ms() const { return 1000.0 / fps; }

    /// Frames whose frame-to-frame similarity falls below `threshold`:
    /// scene changes the detector must see to stay accurate.
    [[nodiscard]] std::vector<std::size_t> scene_events(double threshold) const;
};

/// Parameters of the synthetic similarity pattern: piecewise-linear decay of
/// similarity to the segment's first frame, restarted every segment_len
/// frames by a moderate scene change and at random by deep jumps.
struct TraceGenParams {
    std::size_t segment_len_frames = 30;
    double decay_slope_per_frame = 0.005;
    double noise_sigma = 0.0;
    double jump_prob = 0.01;
    double jump_depth = 0.25;
    double boundary_depth = 0.12;
    std::uint64_t seed = 7;

    void validate() const;
};

/// Draw order per frame (fixed, so the stream can be re-derived): three raw
/// 64-bit mt19937_64 outputs u_jump, u_noise1, u_noise2. Frame i > 0 is a
/// jump iff unit_draw(u_jump) < jump_prob.
[[nodiscard]] FrameTrace generate_trace(const TraceGenParams& params, double fps,
                                        double duration_ms);

/// Builds a trace from per-frame features on a uniform arrival grid.
[[nodiscard]] FrameTrace make_trace(std::span<const double> features, double fps);

[[nodiscard]] std::size_t frame_count_for(double fps, double duration_ms);

/// CSV: first line "fps,frame_count", then "index,arrival_ms,feature" rows.
/// Lines starting with '#' are comments.
[[nodiscard]] FrameTrace read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, const FrameTrace& trace);

/// Fills ssim_to_prev_key for every frame given a sorted keyframe set.
void compose_similarity(FrameTrace& trace, std::span<const std::size_t> keyframes);

/// FIFO of arrived frames awaiting either filtering or detection.
class FrameQueue {
public:
    explicit FrameQueue(std::optional<std::size_t> capacity = std::nullopt)
        : capacity_(capacity) {}

    /// Appends every not-yet-enqueued frame with arrival_ms <= now_ms. When
    /// over capacity the oldest entry not confirmed as a keyframe is dropped.
    void enqueue_arrivals(const FrameTrace& trace, double now_ms);

    /// Confirms a pending frame as a keyframe. Returns false if absent.
    bool mark_keyframe(std::size_t frame_index);
    /// Removes a pending frame that the selector filtered out.
    bool filter(std::size_t frame_index);
    /// Pops the oldest confirmed keyframe.
    std::optional<std::size_t> pop_keyframe();

    [[nodiscard]] bool contains(std::size_t frame_index) const;
    [[nodiscard]] std::size_t size() const { return pending_.size(); }
    [[nodiscard]] std::size_t pending_keyframes() const;
    [[nodiscard]] std::size_t drops() const { return drops_; }
    [[nodiscard]] std::size_t next_frame() const { return next_frame_; }
    [[nodiscard]] std::vector<std::size_t> pending() const;
    [[nodiscard]] std::optional<std::size_t> capacity() const { return capacity_; }

private:
    struct Entry {
        std::size_t frame;
        bool keyframe;
    };

    std::optional<std::size_t> capacity_;
    std::deque<Entry> pending_;
    std::size_t next_frame_ = 0;
    std::optional<double> last_now_;
    std::size_t drops_ = 0;
};

struct WaitStats {
    double wt_ms = 0.0; // mean wait of blocked keyframes
    double wp = 0.0;    // blocked keyframes / keyframes
};

[[nodiscard]] WaitStats waiting_stats(std::span<const ProcessingRecord> records);

} // namespace edgedeploy
