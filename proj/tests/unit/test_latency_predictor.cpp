#include "edgedeploy/device_model.hpp"
#include "edgedeploy/error.hpp"
#include "edgedeploy/latency_predictor.hpp"

#include <doctest.h>

#include <sstream>

using namespace edgedeploy;

namespace {

PredictorParams fig_params(double gamma) {
    PredictorParams p;
    p.gamma = gamma;
    p.vf_c_max_hz = 1.8e9;
    p.vf_g_max_hz = 587e6;
    return p;
}

} // namespace

TEST_CASE("compute_gamma") {
    constexpr std::uint64_t MB = 1000000;
    CHECK(compute_gamma({{336 * MB / 100}, 1 * MB}) == doctest::Approx(3.36).epsilon(1e-12));
    CHECK(compute_gamma({{4096}, 4096}) == 1.0);
    CHECK(compute_gamma({{1 * MB, 2 * MB, 5 * MB}, 2 * MB}) == 2.5);
    CHECK_THROWS_AS((void)compute_gamma({{1}, 0}), ConfigError);
    CHECK_THROWS_AS((void)compute_gamma({{}, 10}), ConfigError);
}

TEST_CASE("predict worked examples") {
    const auto p = fig_params(3.36);
    CHECK(predict(26.1, 1.8e9, 587e6, p) == 26.1);
    CHECK(predict(26.1, 1.8e9, 305e6, p) == doctest::Approx(26.1 * 587.0 / 305.0).epsilon(1e-12));
    CHECK(predict(26.1, 1.8e9, 305e6, p) == doctest::Approx(50.23).epsilon(1e-4));
    CHECK(predict(26.1, 0.9e9, 587e6, p) == doctest::Approx(29.46).epsilon(1e-12));
    CHECK_THROWS_AS((void)predict(26.1, 0.0, 587e6, p), ConfigError);
    CHECK_THROWS_AS((void)predict(26.1, 1.9e9, 587e6, p), ConfigError);
    CHECK_THROWS_AS((void)predict(26.1, 1.8e9, 600e6, p), ConfigError);
}

TEST_CASE("predict is strictly decreasing in each frequency and additive") {
    const auto spec = bundled_device("oneplus8t");
    const auto model = bundled_model("yolo_like");
    const auto params = predictor_params(spec, 0, model);
    const auto& levels = spec.clusters[0].levels;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        CHECK(predict(20.0, levels[i].hz(), spec.gpu_max().hz(), params) <
              predict(20.0, levels[i - 1].hz(), spec.gpu_max().hz(), params));
    }
    for (std::size_t g = 1; g < spec.gpu_levels.size(); ++g) {
        CHECK(predict(20.0, levels.back().hz(), spec.gpu_levels[g].hz(), params) <
              predict(20.0, levels.back().hz(), spec.gpu_levels[g - 1].hz(), params));
    }
    const double cpu = levels[3].hz();
    const double gpu = spec.gpu_levels[1].hz();
    const double cpu_term = predict(0.0, cpu, gpu, params);
    const double gpu_term = predict(20.0, cpu, gpu, params) - cpu_term;
    CHECK(predict(40.0, cpu, gpu, params) - cpu_term == doctest::Approx(2.0 * gpu_term));
    // LUT-based prediction at ratio 0 equals the dense form
    CHECK(predict(model.lut.latency_at(0.0), cpu, gpu, params) ==
          predict(model.lut.dense_latency(), cpu, gpu, params));
}

TEST_CASE("predictor_params tracks the active cluster") {
    const auto spec = bundled_device("oneplus8t");
    const auto model = bundled_model("yolo_like");
    const auto little = predictor_params(spec, 0, model);
    const auto big = predictor_params(spec, 2, model);
    CHECK(little.vf_c_max_hz == 1.8e9);
    CHECK(big.vf_c_max_hz == 2.84e9);
    CHECK(little.vf_g_max_hz == 587e6);
    CHECK(little.gamma == doctest::Approx(4.0 * big.gamma));
    CHECK_THROWS_AS((void)predictor_params(spec, 5, model), ConfigError);
}

TEST_CASE("validate against exact and perturbed truth") {
    const auto spec = bundled_device("oneplus8t");
    const auto model = bundled_model("yolo_like");
    const auto params = predictor_params(spec, 0, model);
    const auto sweep = axis_sweep(spec, 0, 0.0);
    CHECK(sweep.size() == 13 + 6);
    auto exact = [&](double c, double g, double r) {
        return predict(model.lut.latency_at(r), c, g, params);
    };
    const auto rep = validate(params, model.lut, exact, sweep);
    CHECK(rep.overall.mean == 0.0);
    CHECK(rep.overall.max == 0.0);
    CHECK(rep.cpu.count == 13);
    CHECK(rep.gpu.count == 6);

    int k = 0;
    auto noisy = [&](double c, double g, double r) {
        const double eta = ((k++ % 11) - 5) / 100.0; // |eta| <= 5%
        return exact(c, g, r) * (1.0 + eta);
    };
    const auto rep2 = validate(params, model.lut, noisy, sweep);
    CHECK(rep2.overall.mean <= 0.05 / 0.95);
    CHECK(rep2.overall.max <= 0.05 / 0.95 + 1e-12);

    std::stringstream ss;
    rep.write_csv(ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "axis,vf,predicted_ms,truth_ms,rel_error");

    const std::vector<SweepPoint> empty;
    CHECK_THROWS_AS((void)validate(params, model.lut, exact, empty), ConfigError);
}
