#include "edgedeploy/frame_stream.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace edgedeploy {

namespace {

constexpr double kArrivalEps = 1e-9;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) {
            ++used;
        }
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

} // namespace

std::vector<std::size_t> FrameTrace::scene_events(double threshold) const {
    std::vector<std::size_t> out;
    for (const auto& f : frames) {
        if (f.index > 0 && f.raw_feature < threshold) {
            out.push_back(f.index);
        }
    }
    return out;
}

void TraceGenParams::validate() const {
    if (segment_len_frames == 0) {
        throw ConfigError("segment_len_frames must be >= 1");
    }
    if (decay_slope_per_frame < 0.0 || noise_sigma < 0.0 || jump_depth < 0.0 ||
        boundary_depth < 0.0) {
        throw ConfigError("trace generation parameters must be nonnegative");
    }
    if (!(jump_prob >= 0.0 && jump_prob <= 1.0)) {
        throw ConfigError("jump_prob must lie in [0, 1]");
    }
    if (decay_slope_per_frame * static_cast<double>(segment_len_frames - 1) >= 1.0) {
        throw ConfigError("decay_slope_per_frame * (segment_len_frames - 1) must stay below 1");
    }
    if (jump_depth > 1.0 || boundary_depth > 1.0) {
        throw ConfigError("jump/boundary depth must not exceed 1");
    }
}

std::size_t frame_count_for(double fps, double duration_ms) {
    if (!(fps > 0.0) || !(duration_ms > 0.0)) {
        throw ConfigError("fps and duration must be positive");
    }
    return static_cast<std::size_t>(std::llround(fps * duration_ms / 1000.0));
}

FrameTrace make_trace(std::span<const double> features, double fps) {
    if (!(fps > 0.0)) {
        throw ConfigError("fps must be positive");
    }
    FrameTrace trace;
    trace.fps = fps;
    trace.frames.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!(features[i] >= 0.0 && features[i] <= 1.0)) {
            throw ConfigError("frame feature out of [0, 1] at index " + std::to_string(i));
        }
        Frame f;
        f.index = i;
        f.arrival_ms = static_cast<double>(i) * 1000.0 / fps;
        f.raw_feature = features[i];
        trace.frames.push_back(f);
    }
    trace.duration_ms = static_cast<double>(features.size()) * 1000.0 / fps;
    return trace;
}

FrameTrace generate_trace(const TraceGenParams& params, double fps, double duration_ms) {
    params.validate();
    const std::size_t n = frame_count_for(fps, duration_ms);
    Rng rng(params.seed);
    std::vector<double> features(n, 1.0);
    const double s = params.decay_slope_per_frame;
    std::size_t seg_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u_jump = unit_draw(rng);
        const double u1 = unit_draw(rng);
        const double u2 = unit_draw(rng);
        if (i == 0) {
            continue;
        }
        double feature = 0.0;
        if (u_jump < params.jump_prob) {
            feature = 1.0 - params.jump_depth;
            seg_pos = 0;
        } else if (seg_pos + 1 >= params.segment_len_frames) {
            feature = 1.0 - params.boundary_depth;
            seg_pos = 0;
        } else {
            ++seg_pos;
            // Ratio of consecutive points on the line 1 - s*k, so the running
            // product from the segment start is exactly linear.
            const auto k = static_cast<double>(seg_pos);
            feature = (1.0 - s * k) / (1.0 - s * (k - 1.0));
        }
        if (params.noise_sigma > 0.0) {
            const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                             std::cos(2.0 * std::numbers::pi * u2);
            feature *= 1.0 + params.noise_sigma * z;
        }
        features[i] = std::clamp(feature, 0.0, 1.0);
    }
    auto trace = make_trace(features, fps);
    trace.duration_ms = duration_ms;
    return trace;
}

FrameTrace read_trace_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<double> fps;
    std::size_t expected = 0;
    std::vector<double> features;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto cells = split_csv(line);
        if (!fps) {
            if (cells.size() != 2) {
                throw ConfigError("trace header must be 'fps,frame_count'");
            }
            fps = parse_number(cells[0], line_no);
            const double count = parse_number(cells[1], line_no);
            if (!(*fps > 0.0) || count < 0.0) {
                throw ConfigError("trace header: fps must be positive");
            }
            expected = static_cast<std::size_t>(count);
            continue;
        }
        if (cells.size() != 3) {
            throw ConfigError("trace line " + std::to_string(line_no) +
                              ": expected 'index,arrival_ms,feature'");
        }
        const auto idx = static_cast<std::size_t>(parse_number(cells[0], line_no));
        if (idx != features.size()) {
            throw ConfigError("trace line " + std::to_string(line_no) + ": frame index out of order");
        }
        features.push_back(parse_number(cells[2], line_no));
    }
    if (!fps) {
        throw ConfigError("trace file is empty");
    }
    if (features.size() != expected) {
        throw ConfigError("trace header declares " + std::to_string(expected) + " frames, found " +
                          std::to_string(features.size()));
    }
    return make_trace(features, *fps);
}

void write_trace_csv(std::ostream& out, const FrameTrace& trace) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g,%zu\n", trace.fps, trace.size());
    out << buf;
    for (const auto& f : trace.frames) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.17g\n", f.index, f.arrival_ms, f.raw_feature);
        out << buf;
    }
}

void compose_similarity(FrameTrace& trace, std::span<const std::size_t> keyframes) {
    std::size_t next = 0;
    double sim = 1.0;
    for (auto& f : trace.frames) {
        if (next < keyframes.size() && keyframes[next] == f.index) {
            sim = 1.0;
            ++next;
        } else {
            sim *= f.raw_feature;
        }
        f.ssim_to_prev_key = sim;
    }
}

void FrameQueue::enqueue_arrivals(const FrameTrace& trace, double now_ms) {
    if (last_now_ && now_ms < *last_now_) {
        throw SimulationError("enqueue_arrivals: time moved backwards");
    }
    last_now_ = now_ms;
    while (next_frame_ < trace.size() && trace.frames[next_frame_].arrival_ms <= now_ms + kArrivalEps) {
        pending_.push_back(Entry{next_frame_, false});
        ++next_frame_;
        if (capacity_ && pending_.size() > *capacity_) {
            auto victim = std::find_if(pending_.begin(), pending_.end(),
                                       [](const Entry& e) { return !e.keyframe; });
            if (victim == pending_.end()) {
                victim = pending_.begin();
            }
            pending_.erase(victim);
            ++drops_;
        }
    }
}

bool FrameQueue::mark_keyframe(std::size_t frame_index) {
    for (auto& e : pending_) {
        if (e.frame == frame_index) {
            e.keyframe = true;
            return true;
        }
    }
    return false;
}

bool FrameQueue::filter(std::size_t frame_index) {
    const auto it = std::find_if(pending_.begin(), pending_.end(),
                                 [&](const Entry& e) { return e.frame == frame_index; });
    if (it == pending_.end()) {
        return false;
    }
    pending_.erase(it);
    return true;
}

std::optional<std::size_t> FrameQueue::pop_keyframe() {
    const auto it = std::find_if(pending_.begin(), pending_.end(),
                                 [](const Entry& e) { return e.keyframe; });
    if (it == pending_.end()) {
        return std::nullopt;
    }
    const std::size_t frame = it->frame;
    pending_.erase(it);
    return frame;
}

bool FrameQueue::contains(std::size_t frame_index) const {
    return std::any_of(pending_.begin(), pending_.end(),
                       [&](const Entry& e) { return e.frame == frame_index; });
}

std::size_t FrameQueue::pending_keyframes() const {
    return static_cast<std::size_t>(
        std::count_if(pending_.begin(), pending_.end(), [](const Entry& e) { return e.keyframe; }));
}

std::vector<std::size_t> FrameQueue::pending() const {
    std::vector<std::size_t> out;
    out.reserve(pending_.size());
    for (const auto& e : pending_) {
        out.push_back(e.frame);
    }
    return out;
}

WaitStats waiting_stats(std::span<const ProcessingRecord> records) {
    std::size_t keyframes = 0;
    std::size_t blocked = 0;
    double total_wait = 0.0;
    for (const auto& r : records) {
        if (!r.is_keyframe) {
            continue;
        }
        ++keyframes;
        const double w = r.wait_ms();
        if (w > kArrivalEps) {
            ++blocked;
            total_wait += w;
        }
    }
    WaitStats s;
    if (blocked > 0) {
        s.wt_ms = total_wait / static_cast<double>(blocked);
    }
    if (keyframes > 0) {
        s.wp = static_cast<double>(blocked) / static_cast<double>(keyframes);
    }
    return s;
}

} // namespace edgedeploy
