#include "edgedeploy/strategies.hpp"

#include "edgedeploy/error.hpp"

#include <charconv>
#include <optional>
#include <string>

namespace edgedeploy {

SelectorConfig OriginController::selector(const Scenario& scenario) const {
    auto cfg = scenario.options.selector;
    cfg.mode = SelectorMode::select_all;
    return cfg;
}

DeploymentAction OriginController::initial_action(const Scenario& scenario) const {
    return scenario.origin_action;
}

DeploymentAction OriginController::decide(const DecisionContext& ctx) { return ctx.current; }

StaticGovernorController::StaticGovernorController(const Scenario& scenario, Params params)
    : scenario_(scenario), params_(params) {
    if (!(params.threshold > 0.0 && params.threshold <= 1.0)) {
        throw ConfigError("static threshold must lie in (0, 1]");
    }
    if (!(params.lower_below <= params.raise_above)) {
        throw ConfigError("governor thresholds out of order");
    }
}

SelectorConfig StaticGovernorController::selector(const Scenario& scenario) const {
    auto cfg = scenario.options.selector;
    cfg.mode = SelectorMode::static_threshold;
    cfg.threshold = params_.threshold;
    return cfg;
}

DeploymentAction StaticGovernorController::initial_action(const Scenario& scenario) const {
    return scenario.origin_action;
}

DeploymentAction StaticGovernorController::decide(const DecisionContext& ctx) {
    DeploymentAction a = ctx.current;
    const auto& spec = scenario_.spec;
    const std::size_t cpu_top = spec.clusters[a.cluster].levels.size() - 1;
    const std::size_t gpu_top = spec.gpu_levels.size() - 1;
    if (ctx.utilization > params_.raise_above) {
        a.cpu_level = std::min(a.cpu_level + 1, cpu_top);
        a.gpu_level = std::min(a.gpu_level + 1, gpu_top);
    } else if (ctx.utilization < params_.lower_below) {
        a.cpu_level = a.cpu_level > 0 ? a.cpu_level - 1 : 0;
        a.gpu_level = a.gpu_level > 0 ? a.gpu_level - 1 : 0;
    }
    const auto& entries = scenario_.model.lut.entries();
    a.prune_ratio = entries.back().ratio;
    for (const auto& e : entries) {
        DeploymentAction probe = a;
        probe.prune_ratio = e.ratio;
        if (scenario_.predicted_ms(probe) <= scenario_.options.rt_tar_ms) {
            a.prune_ratio = e.ratio;
            break;
        }
    }
    return a;
}

DeploymentAction FixedController::initial_action(const Scenario& /*scenario*/) const {
    return action_;
}

DeploymentAction FixedController::decide(const DecisionContext& /*ctx*/) { return action_; }

namespace {

std::optional<double> static_threshold(std::string_view name) {
    if (name == "static") {
        return 0.7;
    }
    constexpr std::string_view prefix = "static_";
    if (name.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
    }
    const auto rest = name.substr(prefix.size());
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

bool is_baseline_name(std::string_view name) {
    return name == "origin" || static_threshold(name).has_value();
}

std::unique_ptr<Controller> make_baseline(std::string_view name, const Scenario& scenario) {
    if (name == "origin") {
        return std::make_unique<OriginController>();
    }
    if (const auto thr = static_threshold(name)) {
        StaticGovernorController::Params p;
        p.threshold = *thr;
        return std::make_unique<StaticGovernorController>(scenario, p);
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

} // namespace edgedeploy
