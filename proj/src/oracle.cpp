#include "edgedeploy/oracle.hpp"

#include "edgedeploy/error.hpp"
#include "edgedeploy/strategies.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

namespace edgedeploy {

namespace {

void check_cap(std::size_t count, std::size_t cap) {
    if (count > cap) {
        throw SimulationError("joint space has " + std::to_string(count) +
                              " candidates, above the enumeration cap of " + std::to_string(cap));
    }
}

ActionSpace::Indices unflatten(std::size_t j, const ActionSpace& space) {
    const std::size_t p = j % space.p_size();
    j /= space.p_size();
    return ActionSpace::Indices{j / space.k_size(), j % space.k_size(), p};
}

} // namespace

CandidatePoint evaluate_action(const Scenario& scenario, const DeploymentAction& action) {
    FixedController controller(action);
    EpisodeOptions opts;
    opts.noise_bound = 0.0;
    const auto result = simulate_episode(scenario, controller, opts);
    CandidatePoint pt;
    pt.action = action;
    pt.map_points = result.metrics.map_points;
    pt.p_per_video_w = result.metrics.p_per_video_w;
    pt.l_per_frame_ms = result.metrics.l_per_frame_ms;
    pt.reward = scenario.metrics_reward(result.metrics);
    return pt;
}

std::vector<CandidatePoint> enumerate(const Scenario& scenario, const ActionSpace& space,
                                      const OracleOptions& options) {
    space.validate(scenario.spec);
    const std::size_t n = space.joint_size();
    check_cap(n, options.cap);

    std::vector<CandidatePoint> out(n);
    unsigned workers = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(std::max<std::size_t>(n, 1)));

    // Each slot is written by exactly one worker, so the result order is
    // fixed regardless of scheduling.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        try {
            for (std::size_t j = next++; j < n; j = next++) {
                const auto idx = unflatten(j, space);
                out[j] = evaluate_action(scenario, space.decode(idx));
                out[j].index = idx;
            }
        } catch (...) {
            const std::lock_guard lock(failure_mu);
            if (!failure) {
                failure = std::current_exception();
            }
            next = n;
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

std::size_t unbounded_cardinality(const Scenario& scenario) {
    return scenario.spec.total_cpu_levels() * scenario.spec.gpu_levels.size() *
           scenario.model.lut.size() * scenario.trace.size();
}

std::vector<CandidatePoint> enumerate_unbounded(const Scenario& scenario,
                                                const OracleOptions& options) {
    check_cap(unbounded_cardinality(scenario), options.cap);
    std::vector<CandidatePoint> all;
    for (std::size_t c = 0; c < scenario.spec.clusters.size(); ++c) {
        ActionSpace space;
        space.cluster = c;
        space.cpu_levels.resize(scenario.spec.clusters[c].levels.size());
        std::iota(space.cpu_levels.begin(), space.cpu_levels.end(), std::size_t{0});
        space.gpu_levels.resize(scenario.spec.gpu_levels.size());
        std::iota(space.gpu_levels.begin(), space.gpu_levels.end(), std::size_t{0});
        space.offsets.resize(scenario.trace.size());
        std::iota(space.offsets.begin(), space.offsets.end(), std::size_t{1});
        space.ratios = scenario.model.lut.ratios();
        auto part = enumerate(scenario, space, options);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

bool dominates(const CandidatePoint& p, const CandidatePoint& q) {
    const bool no_worse = p.map_points >= q.map_points && p.p_per_video_w <= q.p_per_video_w &&
                          p.l_per_frame_ms <= q.l_per_frame_ms;
    const bool better = p.map_points > q.map_points || p.p_per_video_w < q.p_per_video_w ||
                        p.l_per_frame_ms < q.l_per_frame_ms;
    return no_worse && better;
}

std::vector<std::size_t> pareto_front(std::span<const CandidatePoint> points) {
    // In (latency, power, -mAP) order a dominator always precedes the point
    // it dominates, and domination is transitive, so checking each point
    // against the front built so far is enough.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& p = points[a];
        const auto& q = points[b];
        if (p.l_per_frame_ms != q.l_per_frame_ms) {
            return p.l_per_frame_ms < q.l_per_frame_ms;
        }
        if (p.p_per_video_w != q.p_per_video_w) {
            return p.p_per_video_w < q.p_per_video_w;
        }
        if (p.map_points != q.map_points) {
            return p.map_points > q.map_points;
        }
        return a < b;
    });
    std::vector<std::size_t> front;
    for (auto i : order) {
        const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
            return dominates(points[f], points[i]);
        });
        if (!dominated) {
            front.push_back(i);
        }
    }
    std::sort(front.begin(), front.end());
    return front;
}

const CandidatePoint& best_reward(std::span<const CandidatePoint> points) {
    if (points.empty()) {
        throw ConfigError("best_reward: no candidate points");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto& b = points[best];
        if (p.reward != b.reward) {
            if (p.reward > b.reward) {
                best = i;
            }
        } else if (p.p_per_video_w != b.p_per_video_w) {
            if (p.p_per_video_w < b.p_per_video_w) {
                best = i;
            }
        } else if (p.l_per_frame_ms < b.l_per_frame_ms) {
            best = i;
        }
    }
    return points[best];
}

void write_front_csv(std::ostream& out, std::span<const CandidatePoint> points) {
    std::vector<bool> on_front(points.size(), false);
    for (auto i : pareto_front(points)) {
        on_front[i] = true;
    }
    out << "cluster,cpu_level,gpu_level,keyframe_offset,prune_ratio,map,p_per_video_w,"
           "l_per_frame_ms,reward,on_front\n";
    char buf[256];
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.4g,%.9g,%.9g,%.9g,%.9g,%d\n",
                      p.action.cluster, p.action.cpu_level, p.action.gpu_level,
                      p.action.keyframe_offset, p.action.prune_ratio, p.map_points,
                      p.p_per_video_w, p.l_per_frame_ms, p.reward, on_front[i] ? 1 : 0);
        out << buf;
    }
}

} // namespace edgedeploy
