#pragma once

#include "edgedeploy/environment.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace edgedeploy {

struct CandidatePoint {
    DeploymentAction action;
    ActionSpace::Indices index;
    double map_points = 0.0;
    double p_per_video_w = 0.0;
    double l_per_frame_ms = 0.0;
    double reward = 0.0;
};

struct OracleOptions {
    std::size_t cap = 100000;
    unsigned threads = 0; // 0: hardware concurrency
};

/// Scores one action as a whole noiseless episode.
[[nodiscard]] CandidatePoint evaluate_action(const Scenario& scenario,
                                             const DeploymentAction& action);

/// Every joint action of `space`, sorted by (d, k, p). Throws SimulationError
/// when the space exceeds the cap; the message carries the cardinality.
[[nodiscard]] std::vector<CandidatePoint> enumerate(const Scenario& scenario,
                                                    const ActionSpace& space,
                                                    const OracleOptions& options = {});

/// Size of the space with no bounds applied: every CPU level of every
/// cluster, every GPU level, every stored ratio and every offset up to the
/// trace length.
[[nodiscard]] std::size_t unbounded_cardinality(const Scenario& scenario);

/// Enumerates the unbounded space, cluster by cluster. Throws SimulationError
/// (with the cardinality) above the cap, which the bundled scenarios always
/// exceed.
[[nodiscard]] std::vector<CandidatePoint> enumerate_unbounded(const Scenario& scenario,
                                                              const OracleOptions& options = {});

/// p dominates q: mAP >=, power <=, latency <=, one of them strict.
[[nodiscard]] bool dominates(const CandidatePoint& p, const CandidatePoint& q);

/// Positions (into `points`) of the non-dominated points, ascending.
[[nodiscard]] std::vector<std::size_t> pareto_front(std::span<const CandidatePoint> points);

/// Highest reward; ties go to lower power, then lower latency, then the
/// earlier point. Throws ConfigError on an empty set.
[[nodiscard]] const CandidatePoint& best_reward(std::span<const CandidatePoint> points);

/// Header: cluster,cpu_level,gpu_level,keyframe_offset,prune_ratio,map,
/// p_per_video_w,l_per_frame_ms,reward,on_front
void write_front_csv(std::ostream& out, std::span<const CandidatePoint> points);

} // namespace edgedeploy
