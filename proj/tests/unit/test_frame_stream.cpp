#include "edgedeploy/error.hpp"
#include "edgedeploy/frame_stream.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace edgedeploy;

namespace {

// Reference re-implementation of the jump draws: three raw 64-bit outputs per
// frame, the first one decides the jump.
std::size_t reference_jump_count(std::uint64_t seed, double p, std::size_t n) {
    std::mt19937_64 eng(seed);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t raw = eng();
        eng();
        eng();
        const double u = static_cast<double>(raw >> 11) / 9007199254740992.0;
        if (i > 0 && u < p) {
            ++count;
        }
    }
    return count;
}

ProcessingRecord keyframe(std::size_t idx, double arrival, double start) {
    ProcessingRecord r;
    r.frame_index = idx;
    r.arrival_ms = arrival;
    r.service_start_ms = start;
    r.service_ms = 10.0;
    r.is_keyframe = true;
    return r;
}

} // namespace

TEST_CASE("noiseless linear decay") {
    TraceGenParams p;
    p.noise_sigma = 0.0;
    p.jump_prob = 0.0;
    p.decay_slope_per_frame = 0.01;
    p.segment_len_frames = 30;
    const auto trace = generate_trace(p, 30.0, 1000.0 * 10.0 / 30.0);
    REQUIRE(trace.size() == 10);
    double sim = 1.0;
    for (std::size_t i = 0; i < 10; ++i) {
        if (i > 0) {
            sim *= trace.frames[i].raw_feature;
        }
        CHECK(sim == doctest::Approx(1.0 - 0.01 * static_cast<double>(i)).epsilon(1e-12));
    }
}

TEST_CASE("generation is deterministic and matches the reference jump stream") {
    TraceGenParams p;
    p.jump_prob = 0.05;
    p.seed = 7;
    const auto a = generate_trace(p, 30.0, 40000.0);
    const auto b = generate_trace(p, 30.0, 40000.0);
    REQUIRE(a.size() == 1200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.frames[i].raw_feature == b.frames[i].raw_feature);
    }
    std::size_t jumps = 0;
    for (const auto& f : a.frames) {
        if (f.index > 0 && f.raw_feature == 1.0 - p.jump_depth) {
            ++jumps;
        }
    }
    CHECK(jumps == reference_jump_count(7, 0.05, 1200));
    CHECK(jumps > 0);
}

TEST_CASE("empirical jump frequency stays within 3 sigma of jump_prob") {
    TraceGenParams p;
    p.jump_prob = 0.02;
    std::size_t jumps = 0;
    std::size_t trials = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        p.seed = seed;
        const auto t = generate_trace(p, 30.0, 40000.0);
        for (const auto& f : t.frames) {
            if (f.index == 0) {
                continue;
            }
            ++trials;
            if (f.raw_feature == 1.0 - p.jump_depth) {
                ++jumps;
            }
        }
    }
    const double n = static_cast<double>(trials);
    const double sigma = std::sqrt(n * p.jump_prob * (1.0 - p.jump_prob));
    CHECK(std::abs(static_cast<double>(jumps) - n * p.jump_prob) <= 3.0 * sigma);
}

TEST_CASE("generator errors") {
    TraceGenParams p;
    CHECK_THROWS_AS((void)generate_trace(p, 0.0, 1000.0), ConfigError);
    CHECK_THROWS_AS((void)generate_trace(p, 30.0, 0.0), ConfigError);
    p.jump_prob = 1.5;
    CHECK_THROWS_AS((void)generate_trace(p, 30.0, 1000.0), ConfigError);
}

TEST_CASE("trace invariants: count, arrivals, feature range") {
    TraceGenParams p;
    p.noise_sigma = 0.02;
    const auto t = generate_trace(p, 30.0, 40000.0);
    CHECK(t.size() == static_cast<std::size_t>(std::llround(30.0 * 40000.0 / 1000.0)));
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t.frames[i].raw_feature >= 0.0);
        CHECK(t.frames[i].raw_feature <= 1.0);
        if (i > 0) {
            CHECK(t.frames[i].arrival_ms > t.frames[i - 1].arrival_ms);
        }
    }
}

TEST_CASE("trace CSV round trip") {
    TraceGenParams p;
    p.noise_sigma = 0.01;
    const auto t = generate_trace(p, 30.0, 2000.0);
    std::stringstream ss;
    write_trace_csv(ss, t);
    const auto back = read_trace_csv(ss);
    REQUIRE(back.size() == t.size());
    CHECK(back.fps == t.fps);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(back.frames[i].raw_feature == t.frames[i].raw_feature);
    }
    std::stringstream bad("30,2\n0,0,1.0\n");
    CHECK_THROWS_AS((void)read_trace_csv(bad), ConfigError);
    std::stringstream garbage("30,1\n0,0,abc\n");
    CHECK_THROWS_AS((void)read_trace_csv(garbage), ConfigError);
}

TEST_CASE("enqueue_arrivals on the 30 fps grid") {
    const std::vector<double> features(10, 1.0);
    const auto t = make_trace(features, 30.0);
    FrameQueue q;
    q.enqueue_arrivals(t, 100.0);
    CHECK(q.pending() == std::vector<std::size_t>{0, 1, 2, 3});
    q.enqueue_arrivals(t, 100.0);
    CHECK(q.size() == 4);
    CHECK_THROWS_AS(q.enqueue_arrivals(t, 50.0), SimulationError);
}

TEST_CASE("capacity drops the oldest non-keyframe") {
    const std::vector<double> features(3, 1.0);
    const auto t = make_trace(features, 30.0);
    FrameQueue q(2);
    q.enqueue_arrivals(t, 0.0);
    CHECK(q.mark_keyframe(0));
    q.enqueue_arrivals(t, 70.0);
    CHECK(q.drops() == 1);
    CHECK(q.size() == 2);
    CHECK(q.contains(0));
    CHECK_FALSE(q.contains(1));
    CHECK(q.pop_keyframe() == std::optional<std::size_t>{0});
    CHECK(q.filter(2));
    CHECK(q.size() == 0);
}

TEST_CASE("queue preserves FIFO order") {
    const std::vector<double> features(20, 1.0);
    const auto t = make_trace(features, 30.0);
    FrameQueue q;
    q.enqueue_arrivals(t, 1000.0);
    for (std::size_t i : {3, 7, 1, 12}) {
        q.mark_keyframe(i);
    }
    CHECK(q.pop_keyframe() == std::optional<std::size_t>{1});
    CHECK(q.pop_keyframe() == std::optional<std::size_t>{3});
    const auto rest = q.pending();
    for (std::size_t i = 1; i < rest.size(); ++i) {
        CHECK(rest[i] > rest[i - 1]);
    }
}

TEST_CASE("waiting_stats") {
    std::vector<ProcessingRecord> none;
    CHECK(waiting_stats(none).wt_ms == 0.0);
    CHECK(waiting_stats(none).wp == 0.0);

    std::vector<ProcessingRecord> instant = {keyframe(0, 0, 0), keyframe(1, 33, 33)};
    CHECK(waiting_stats(instant).wt_ms == 0.0);
    CHECK(waiting_stats(instant).wp == 0.0);

    std::vector<ProcessingRecord> waits = {keyframe(0, 0, 0), keyframe(1, 10, 12),
                                           keyframe(2, 20, 24)};
    CHECK(waiting_stats(waits).wt_ms == doctest::Approx(3.0));
    CHECK(waiting_stats(waits).wp == doctest::Approx(2.0 / 3.0));

    std::vector<ProcessingRecord> one = {keyframe(0, 0, 1.0)};
    CHECK(waiting_stats(one).wt_ms == doctest::Approx(1.0));
    CHECK(waiting_stats(one).wp == 1.0);
}
