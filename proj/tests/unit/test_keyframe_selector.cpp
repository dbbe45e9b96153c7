#include "edgedeploy/error.hpp"
#include "edgedeploy/keyframe_selector.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace edgedeploy;

TEST_CASE("fit_band closed-form examples") {
    SelectorConfig cfg;
    const std::vector<SimilarityPoint> line = {{1, 0.99}, {2, 0.98}, {3, 0.97}};
    const auto band = fit_band(line, cfg);
    REQUIRE(band);
    CHECK(band->slope == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(band->intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(band->half_width == doctest::Approx(0.0495).epsilon(1e-12));

    const std::vector<SimilarityPoint> flat = {{1, 0.9}, {2, 0.9}, {3, 0.9}};
    const auto fb = fit_band(flat, cfg);
    REQUIRE(fb);
    CHECK(fb->slope == doctest::Approx(0.0));

    const std::vector<SimilarityPoint> single = {{1, 0.9}};
    CHECK_FALSE(fit_band(single, cfg).has_value());
}

TEST_CASE("is_keyframe uses a closed band") {
    RegressionBand b;
    b.slope = 0.0;
    b.intercept = 0.95;
    b.half_width = 0.05;
    b.anchor_index = 10;
    CHECK_FALSE(is_keyframe(0.95, 11, b));
    CHECK(is_keyframe(0.88, 11, b));
    // 1.00 - 0.95 is not exactly 0.05 in binary; use representable values.
    RegressionBand e;
    e.intercept = 0.75;
    e.half_width = 0.25;
    CHECK_FALSE(is_keyframe(1.0, 1, e));
    CHECK_FALSE(is_keyframe(0.5, 1, e));
    CHECK(is_keyframe(0.4999, 1, e));
}

TEST_CASE("static_select") {
    const std::vector<double> feats(50, 0.999);
    const auto t = make_trace(feats, 30.0);
    const auto all = static_select(t, 1.0);
    CHECK(all.size() == 50);

    // running-product walk oracle
    std::vector<std::size_t> expected = {0};
    double sim = 1.0;
    for (std::size_t i = 1; i < 400; ++i) {
        sim *= 0.999;
        if (sim < 0.7) {
            expected.push_back(i);
            sim = 1.0;
        }
    }
    const std::vector<double> long_feats(400, 0.999);
    const auto lt = make_trace(long_feats, 30.0);
    CHECK(static_select(lt, 0.7) == expected);
    CHECK(expected.size() == 2);

    const std::vector<double> one = {1.0};
    CHECK(static_select(make_trace(one, 30.0), 0.7) == std::vector<std::size_t>{0});
}

TEST_CASE("keyframe_lower_bound") {
    SelectorConfig cfg;
    CHECK(keyframe_lower_bound(171, cfg, 1200) == 100);
    CHECK(keyframe_lower_bound(50, cfg, 1200) == 50);
    CHECK(keyframe_lower_bound(1, cfg, 12) == 1);
    CHECK_THROWS_AS((void)keyframe_lower_bound(0, cfg, 0), ConfigError);
    CHECK_THROWS_AS((void)keyframe_lower_bound(13, cfg, 12), ConfigError);
}

TEST_CASE("config validation") {
    SelectorConfig cfg;
    cfg.threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SelectorConfig{};
    cfg.band_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SelectorConfig{};
    cfg.fit_window = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS((void)selector_mode_from_string("sometimes"), ConfigError);
}

TEST_CASE("frame 0 is a keyframe in every mode; select_all takes every frame") {
    TraceGenParams p;
    p.noise_sigma = 0.01;
    const auto t = generate_trace(p, 30.0, 10000.0);
    for (auto mode : {SelectorMode::t_locality, SelectorMode::static_threshold,
                      SelectorMode::select_all}) {
        SelectorConfig cfg;
        cfg.mode = mode;
        const auto kf = select_keyframes(t, cfg);
        REQUIRE_FALSE(kf.empty());
        CHECK(kf.front() == 0);
        CHECK(std::is_sorted(kf.begin(), kf.end()));
        if (mode == SelectorMode::select_all) {
            CHECK(kf.size() == t.size());
        }
    }
}

TEST_CASE("noiseless linear decay: no intra-segment keyframes, every jump taken") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TraceGenParams p;
        p.seed = seed;
        p.jump_prob = 0.02;
        const auto t = generate_trace(p, 30.0, 40000.0);
        SelectorConfig cfg;
        const auto kf = select_keyframes(t, cfg);
        std::vector<std::size_t> expected = {0};
        for (const auto& f : t.frames) {
            if (f.index > 0 && f.raw_feature < 0.9) {
                expected.push_back(f.index);
            }
        }
        CHECK(kf == expected);
    }
}

TEST_CASE("force_keyframe re-anchors the selector") {
    SelectorConfig cfg;
    KeyframeSelector sel(cfg);
    Frame f;
    f.index = 0;
    CHECK(sel.observe(f));
    f.index = 1;
    f.raw_feature = 0.99;
    CHECK_FALSE(sel.observe(f));
    sel.force_keyframe(1);
    CHECK(sel.anchor() == std::optional<std::size_t>{1});
    CHECK(sel.similarity_to_keyframe() == 1.0);
}
