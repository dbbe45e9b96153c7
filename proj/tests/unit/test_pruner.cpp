#include "edgedeploy/error.hpp"
#include "edgedeploy/pruner.hpp"

#include <doctest.h>

#include <sstream>

using namespace edgedeploy;

namespace {

PruningLut example_curve() {
    return PruningLut({{0.0, 26.1, 70.2}, {0.3, 21.3, 70.2}, {0.5, 17.6, 68.0}, {0.7, 13.5, 65.0}});
}

} // namespace

TEST_CASE("latency_at") {
    const auto yolo = bundled_model("yolo_like").lut;
    CHECK(yolo.latency_at(0.0) == 26.1);
    CHECK(yolo.dense_map() == 70.2);
    CHECK(bundled_model("ssd_like").lut.dense_latency() == 62.5);
    CHECK(bundled_model("ssd_like").lut.dense_map() == 52.9);
    const PruningLut two({{0.0, 26.1, 70.2}, {0.5, 16.0, 60.0}});
    CHECK(two.latency_at(0.25) == doctest::Approx(21.05).epsilon(1e-12));
    CHECK(yolo.latency_at(0.3) == 21.3);
    CHECK_THROWS_AS((void)yolo.latency_at(0.95), ConfigError);
    CHECK_THROWS_AS((void)yolo.latency_at(-0.1), ConfigError);
}

TEST_CASE("latency_at is nonincreasing and piecewise linear") {
    const auto lut = bundled_model("yolo_like").lut;
    double prev = lut.latency_at(0.0);
    for (int i = 1; i <= 90; ++i) {
        const double r = i / 100.0;
        const double v = lut.latency_at(r);
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
    // midpoint of every segment is the average of its ends
    const auto& e = lut.entries();
    for (std::size_t i = 1; i < e.size(); ++i) {
        const double mid = 0.5 * (e[i - 1].ratio + e[i].ratio);
        CHECK(lut.latency_at(mid) ==
              doctest::Approx(0.5 * (e[i - 1].latency_ms + e[i].latency_ms)).epsilon(1e-12));
    }
}

TEST_CASE("LUT validation") {
    CHECK_THROWS_AS(PruningLut(std::vector<LutEntry>{}), ConfigError);
    CHECK_THROWS_AS(PruningLut({{0.1, 20.0, 50.0}}), ConfigError);
    CHECK_THROWS_AS(PruningLut({{0.0, 20.0, 50.0}, {0.0, 19.0, 50.0}}), ConfigError);
    CHECK_THROWS_AS(PruningLut({{0.0, 20.0, 50.0}, {0.1, 21.0, 50.0}}), ConfigError);
    CHECK_THROWS_AS(PruningLut({{0.0, 20.0, 50.0}, {0.1, 19.0, 51.0}}), ConfigError);
}

TEST_CASE("compute_bounds") {
    const auto lut = example_curve();
    // dense - 5 = 65.2, and 65.0 falls below it, so 0.7 is out.
    const auto b5 = compute_bounds(lut, 5.0);
    CHECK(b5.lower == 0.3);
    CHECK(b5.upper == 0.5);
    const auto b0 = compute_bounds(lut, 0.0);
    CHECK(b0.lower == 0.3);
    CHECK(b0.upper == 0.3);
    const auto b52 = compute_bounds(lut, 5.2 + 1e-9);
    CHECK(b52.upper == 0.7);

    const PruningLut lossy({{0.0, 10.0, 50.0}, {0.1, 9.0, 49.0}, {0.2, 8.0, 48.0}});
    const auto bl = compute_bounds(lossy, 0.0);
    CHECK(bl.lower == 0.0);
    CHECK(bl.upper == 0.0);

    const auto yolo = compute_bounds(bundled_model("yolo_like").lut, 5.0);
    CHECK(yolo.lower == 0.2);
    CHECK(yolo.upper == 0.5);
}

TEST_CASE("bounds are ordered and monotone in tolerance") {
    const auto lut = bundled_model("yolo_like").lut;
    double prev_upper = -1.0;
    for (int i = 0; i <= 40; ++i) {
        const auto b = compute_bounds(lut, i * 0.75);
        CHECK(b.lower <= b.upper);
        CHECK(b.upper >= prev_upper);
        prev_upper = b.upper;
    }
}

TEST_CASE("reconfigure clamps idempotently") {
    const PruneBounds b{0.3, 0.7};
    CHECK(reconfigure(0.0, 0.9, b) == 0.7);
    CHECK(reconfigure(0.0, 0.5, b) == 0.5);
    CHECK(reconfigure(0.5, 0.0, b) == 0.3);
    for (double x : {0.0, 0.1, 0.35, 0.69, 0.71, 0.95}) {
        const double once = reconfigure(0.0, x, b);
        CHECK(reconfigure(once, once, b) == once);
        CHECK(b.contains(once));
    }
}

TEST_CASE("ratios_within and CSV round trip") {
    const auto lut = bundled_model("yolo_like").lut;
    const auto r = ratios_within(lut, PruneBounds{0.2, 0.5});
    CHECK(r == std::vector<double>{0.2, 0.3, 0.4, 0.5});
    std::stringstream ss;
    write_lut_csv(ss, lut);
    CHECK(read_lut_csv(ss) == lut);
    std::stringstream bad("ratio,latency_ms,map\n0.0,x,1\n");
    CHECK_THROWS_AS((void)read_lut_csv(bad), ConfigError);
}

TEST_CASE("bundled models") {
    CHECK(is_bundled_model("yolo_like"));
    CHECK_FALSE(is_bundled_model("resnet"));
    CHECK_THROWS_AS((void)bundled_model("resnet"), ConfigError);
    CHECK(bundled_model("yolo_like").lut.size() == 10);
    CHECK(bundled_model("yolo_like").max_layer_bytes() <= 512u * 1024u);
    CHECK(bundled_model("ssd_like").max_layer_bytes() > 1024u * 1024u);
}
