#pragma once

#include "edgedeploy/device_model.hpp"
#include "edgedeploy/pruner.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace edgedeploy {

struct GammaInputs {
    std::vector<std::uint64_t> layer_footprints_bytes;
    std::uint64_t cpu_l2_bytes = 0;
};

/// Largest layer footprint over the active cluster's L2 size.
[[nodiscard]] double compute_gamma(const GammaInputs& inputs);

struct PredictorParams {
    double gamma = 1.0;
    double vf_c_max_hz = 0.0;
    double vf_g_max_hz = 0.0;
};

/// Parameters for running `model` on cluster `cluster` of `spec`.
[[nodiscard]] PredictorParams predictor_params(const DeviceSpec& spec, std::size_t cluster,
                                               const ModelProfile& model);

/// Keyframe latency in ms:
///   base * (vf_g_max / gpu_vf) + gamma * (vf_c_max / cpu_vf - 1)
/// where base is the dense latency or the LUT latency at the active ratio.
[[nodiscard]] double predict(double base_latency_ms, double cpu_vf_hz, double gpu_vf_hz,
                             const PredictorParams& params);

enum class SweepAxis { cpu, gpu };

[[nodiscard]] std::string_view to_string(SweepAxis axis);

struct SweepPoint {
    SweepAxis axis = SweepAxis::cpu;
    double cpu_vf_hz = 0.0;
    double gpu_vf_hz = 0.0;
    double ratio = 0.0;
};

struct ValidationRow {
    SweepPoint point;
    double predicted_ms = 0.0;
    double truth_ms = 0.0;
    double rel_error = 0.0; // |predicted - truth| / truth
};

struct AxisError {
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    AxisError cpu;
    AxisError gpu;
    AxisError overall;

    /// Columns: axis,vf,predicted_ms,truth_ms,rel_error.
    void write_csv(std::ostream& out) const;
};

/// Returns measured latency for (cpu_hz, gpu_hz, ratio).
using GroundTruthFn = std::function<double(double cpu_vf_hz, double gpu_vf_hz, double ratio)>;

/// Compares predictions against `truth` over the sweep. Throws ConfigError on
/// an empty sweep.
[[nodiscard]] ValidationReport validate(const PredictorParams& params, const PruningLut& lut,
                                        const GroundTruthFn& truth,
                                        std::span<const SweepPoint> sweep);

/// One sweep per axis with the other axis pinned at its maximum: every CPU
/// level of `cluster`, then every GPU level.
[[nodiscard]] std::vector<SweepPoint> axis_sweep(const DeviceSpec& spec, std::size_t cluster,
                                                 double ratio);

} // namespace edgedeploy
