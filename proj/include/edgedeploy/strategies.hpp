#pragma once

#include "edgedeploy/environment.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace edgedeploy {

/// Every frame on the performance cluster at top V/F levels, dense model.
class OriginController final : public Controller {
public:
    [[nodiscard]] SelectorConfig selector(const Scenario& scenario) const override;
    [[nodiscard]] DeploymentAction initial_action(const Scenario& scenario) const override;
    DeploymentAction decide(const DecisionContext& ctx) override;
};

/// Static-threshold keyframes with a utilization-stepping governor on the
/// performance cluster. Each decision raises both V/F levels one step when
/// utilization > raise_above, lowers them when < lower_below, then picks the
/// smallest LUT ratio whose predicted latency meets the deadline.
class StaticGovernorController final : public Controller {
public:
    struct Params {
        double threshold = 0.7;
        double raise_above = 0.8;
        double lower_below = 0.5;
    };

    StaticGovernorController(const Scenario& scenario, Params params);
    [[nodiscard]] SelectorConfig selector(const Scenario& scenario) const override;
    [[nodiscard]] DeploymentAction initial_action(const Scenario& scenario) const override;
    DeploymentAction decide(const DecisionContext& ctx) override;

private:
    const Scenario& scenario_;
    Params params_;
};

/// One action for the whole episode; T-locality keyframes plus the action's
/// offset schedule. Used by the oracle.
class FixedController final : public Controller {
public:
    explicit FixedController(DeploymentAction action) : action_(action) {}
    [[nodiscard]] bool forces_offsets() const override { return true; }
    [[nodiscard]] DeploymentAction initial_action(const Scenario& scenario) const override;
    DeploymentAction decide(const DecisionContext& ctx) override;

private:
    DeploymentAction action_;
};

/// Builds "origin" or "static_<threshold>" ("static" means 0.7). Throws
/// ConfigError on anything else.
[[nodiscard]] std::unique_ptr<Controller> make_baseline(std::string_view name,
                                                        const Scenario& scenario);
[[nodiscard]] bool is_baseline_name(std::string_view name);

} // namespace edgedeploy
