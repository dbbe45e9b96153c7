#include "edgedeploy/reward.hpp"

#include "edgedeploy/error.hpp"

#include <string>

namespace edgedeploy {

std::string_view to_string(PenaltyMode mode) { return mode == PenaltyMode::soft ? "soft" : "hard"; }

PenaltyMode penalty_mode_from_string(std::string_view name) {
    if (name == "soft") {
        return PenaltyMode::soft;
    }
    if (name == "hard") {
        return PenaltyMode::hard;
    }
    throw ConfigError("unknown penalty mode '" + std::string(name) + "'");
}

double compute_reward(double acc_n, double po_n, double l_pred_ms, double rt_tar_ms, double alpha,
                      const PenaltyConfig& penalty) {
    if (!(rt_tar_ms > 0.0)) {
        throw ConfigError("rt_tar_ms must be positive");
    }
    const double base = acc_n - alpha * po_n;
    if (l_pred_ms <= rt_tar_ms) {
        return base;
    }
    const double sp = penalty.mode == PenaltyMode::soft ? (l_pred_ms - rt_tar_ms) / rt_tar_ms
                                                        : penalty.hard_value;
    return base - sp;
}

} // namespace edgedeploy
