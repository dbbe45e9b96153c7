#include "edgedeploy/latency_predictor.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace edgedeploy {

double compute_gamma(const GammaInputs& inputs) {
    if (inputs.cpu_l2_bytes == 0) {
        throw ConfigError("compute_gamma: cache size must be positive");
    }
    if (inputs.layer_footprints_bytes.empty()) {
        throw ConfigError("compute_gamma: no layer footprints");
    }
    const auto largest =
        *std::max_element(inputs.layer_footprints_bytes.begin(), inputs.layer_footprints_bytes.end());
    if (largest == 0) {
        throw ConfigError("compute_gamma: layer footprints must be positive");
    }
    return static_cast<double>(largest) / static_cast<double>(inputs.cpu_l2_bytes);
}

PredictorParams predictor_params(const DeviceSpec& spec, std::size_t cluster,
                                 const ModelProfile& model) {
    if (cluster >= spec.clusters.size()) {
        throw ConfigError("predictor_params: cluster index out of range");
    }
    const auto& c = spec.clusters[cluster];
    PredictorParams p;
    p.gamma = compute_gamma(GammaInputs{model.layer_footprints_bytes, c.l2_cache_bytes});
    p.vf_c_max_hz = c.max_level().hz();
    p.vf_g_max_hz = spec.gpu_max().hz();
    return p;
}

double predict(double base_latency_ms, double cpu_vf_hz, double gpu_vf_hz,
               const PredictorParams& params) {
    if (!(cpu_vf_hz > 0.0) || !(gpu_vf_hz > 0.0)) {
        throw ConfigError("predict: frequencies must be positive");
    }
    if (cpu_vf_hz > params.vf_c_max_hz || gpu_vf_hz > params.vf_g_max_hz) {
        throw ConfigError("predict: frequency above the table maximum");
    }
    return base_latency_ms * (params.vf_g_max_hz / gpu_vf_hz) +
           params.gamma * (params.vf_c_max_hz / cpu_vf_hz - 1.0);
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::cpu ? "cpu" : "gpu"; }

ValidationReport validate(const PredictorParams& params, const PruningLut& lut,
                          const GroundTruthFn& truth, std::span<const SweepPoint> sweep) {
    if (sweep.empty()) {
        throw ConfigError("validate: empty sweep");
    }
    ValidationReport report;
    auto accumulate = [](AxisError& acc, double err) {
        acc.mean += err;
        acc.max = std::max(acc.max, err);
        ++acc.count;
    };
    for (const auto& pt : sweep) {
        ValidationRow row;
        row.point = pt;
        row.predicted_ms = predict(lut.latency_at(pt.ratio), pt.cpu_vf_hz, pt.gpu_vf_hz, params);
        row.truth_ms = truth(pt.cpu_vf_hz, pt.gpu_vf_hz, pt.ratio);
        row.rel_error = std::abs(row.predicted_ms - row.truth_ms) / row.truth_ms;
        accumulate(pt.axis == SweepAxis::cpu ? report.cpu : report.gpu, row.rel_error);
        accumulate(report.overall, row.rel_error);
        report.rows.push_back(row);
    }
    for (AxisError* a : {&report.cpu, &report.gpu, &report.overall}) {
        if (a->count > 0) {
            a->mean /= static_cast<double>(a->count);
        }
    }
    return report;
}

void ValidationReport::write_csv(std::ostream& out) const {
    out << "axis,vf,predicted_ms,truth_ms,rel_error\n";
    char buf[160];
    for (const auto& r : rows) {
        const double vf = r.point.axis == SweepAxis::cpu ? r.point.cpu_vf_hz : r.point.gpu_vf_hz;
        std::snprintf(buf, sizeof buf, "%s,%.0f,%.6f,%.6f,%.6f\n",
                      std::string(to_string(r.point.axis)).c_str(), vf, r.predicted_ms, r.truth_ms,
                      r.rel_error);
        out << buf;
    }
}

std::vector<SweepPoint> axis_sweep(const DeviceSpec& spec, std::size_t cluster, double ratio) {
    if (cluster >= spec.clusters.size()) {
        throw ConfigError("axis_sweep: cluster index out of range");
    }
    const auto& c = spec.clusters[cluster];
    std::vector<SweepPoint> out;
    for (const auto& l : c.levels) {
        out.push_back(SweepPoint{SweepAxis::cpu, l.hz(), spec.gpu_max().hz(), ratio});
    }
    for (const auto& l : spec.gpu_levels) {
        out.push_back(SweepPoint{SweepAxis::gpu, c.max_level().hz(), l.hz(), ratio});
    }
    return out;
}

} // namespace edgedeploy
