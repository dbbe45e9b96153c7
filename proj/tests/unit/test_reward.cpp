#include "edgedeploy/error.hpp"
#include "edgedeploy/reward.hpp"

#include <doctest.h>

#include <cmath>

using namespace edgedeploy;

namespace {

// Reference: acc - alpha*po, minus the penalty only past the deadline.
double reference(double acc, double po, double l, double rt, double alpha, bool hard,
                 double hard_value) {
    double r = acc - alpha * po;
    if (l > rt) {
        r -= hard ? hard_value : (l - rt) / rt;
    }
    return r;
}

} // namespace

TEST_CASE("worked examples") {
    const PenaltyConfig soft;
    CHECK(std::abs(compute_reward(0.70, 0.10, 30.0, 33.0, 1.0, soft) - 0.60) < 1e-12);
    CHECK(std::abs(compute_reward(0.70, 0.10, 39.6, 33.0, 1.0, soft) - 0.40) < 1e-12);
    CHECK(std::abs(compute_reward(0.0, 0.10, 20.0, 33.0, 1.0, soft) - (-0.10)) < 1e-12);
}

TEST_CASE("soft penalty is continuous at the deadline") {
    const PenaltyConfig soft;
    const double at = compute_reward(0.7, 0.1, 33.0, 33.0, 1.0, soft);
    const double below = compute_reward(0.7, 0.1, 33.0 - 1e-9, 33.0, 1.0, soft);
    const double above = compute_reward(0.7, 0.1, 33.0 + 1e-9, 33.0, 1.0, soft);
    CHECK(std::abs(at - below) < 1e-9);
    CHECK(std::abs(at - above) < 1e-9);
    CHECK(above <= at);
}

TEST_CASE("hard penalty subtracts a constant on any miss") {
    PenaltyConfig hard{PenaltyMode::hard, 0.5};
    CHECK(compute_reward(0.7, 0.1, 33.0, 33.0, 1.0, hard) == doctest::Approx(0.6));
    CHECK(compute_reward(0.7, 0.1, 33.001, 33.0, 1.0, hard) == doctest::Approx(0.1));
    CHECK(compute_reward(0.7, 0.1, 330.0, 33.0, 1.0, hard) == doctest::Approx(0.1));
}

TEST_CASE("matches the reference on a grid") {
    for (int hard = 0; hard < 2; ++hard) {
        PenaltyConfig cfg{hard ? PenaltyMode::hard : PenaltyMode::soft, 0.75};
        for (double acc : {0.0, 0.35, 0.702}) {
            for (double po : {0.0, 0.05, 1.0}) {
                for (double l : {1.0, 32.9, 33.0, 40.0, 99.0}) {
                    for (double alpha : {0.0, 1.0, 2.5}) {
                        CHECK(compute_reward(acc, po, l, 33.0, alpha, cfg) ==
                              doctest::Approx(reference(acc, po, l, 33.0, alpha, hard != 0, 0.75))
                                  .epsilon(1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("reward falls as latency grows past the deadline") {
    const PenaltyConfig soft;
    double prev = compute_reward(0.7, 0.1, 33.0, 33.0, 1.0, soft);
    for (double l = 34.0; l < 100.0; l += 1.0) {
        const double r = compute_reward(0.7, 0.1, l, 33.0, 1.0, soft);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("invalid target") {
    CHECK_THROWS_AS((void)compute_reward(0.7, 0.1, 30.0, 0.0, 1.0, {}), ConfigError);
    CHECK_THROWS_AS((void)compute_reward(0.7, 0.1, 30.0, -5.0, 1.0, {}), ConfigError);
}

TEST_CASE("penalty mode names") {
    CHECK(to_string(PenaltyMode::soft) == "soft");
    CHECK(penalty_mode_from_string("hard") == PenaltyMode::hard);
    CHECK_THROWS_AS((void)penalty_mode_from_string("medium"), ConfigError);
}
