#pragma once

#include "edgedeploy/environment.hpp"
#include "edgedeploy/qnetwork.hpp"
#include "edgedeploy/reward.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

struct MarlConfig {
    std::size_t hidden = 64;
    double lr = 1e-3;
    double lr_final = 1e-5; // reached linearly at the end of the step budget
    double discount = 0.9;
    std::size_t batch = 32;
    std::size_t replay_capacity = 10000;
    std::size_t target_sync_every = 200;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_fraction = 0.6;
    bool center_rewards = true; // subtract the replay mean reward in TD targets
    std::size_t warmup_frames = 0; // deployment fine-tuning: frames run at eps_start first
    void validate() const;
};

enum class AgentRole : std::size_t { d = 0, k = 1, p = 2 };
inline constexpr std::array<std::string_view, 3> kAgentNames = {"D", "K", "P"};

using JointIndices = ActionSpace::Indices;

struct Transition {
    Eigen::VectorXd input;      // state ++ one-hot(previous joint action)
    JointIndices action;
    double reward = 0.0;
    Eigen::VectorXd next_input; // next state ++ one-hot(action)
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    /// Uniform draws with replacement.
    [[nodiscard]] std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;
    [[nodiscard]] const Transition& at(std::size_t i) const { return data_.at(i); }
    [[nodiscard]] double mean_reward() const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    double reward_sum_ = 0.0;
    std::vector<Transition> data_;
};

struct Agent {
    QNetwork online;
    QNetwork target;
    Adam optimizer;
};

/// Three independent Q-learners sharing state and reward; each one's input
/// carries the previous joint action.
class Coordinator {
public:
    Coordinator(const ActionSpace& space, const MarlConfig& cfg, std::uint64_t seed);

    [[nodiscard]] std::size_t input_size() const { return input_size_; }
    [[nodiscard]] const std::array<std::size_t, 3>& sizes() const { return sizes_; }
    [[nodiscard]] Eigen::VectorXd encode_input(std::span<const double> state,
                                               const JointIndices& last) const;

    /// Per agent: uniform action with probability epsilon, else argmax Q.
    [[nodiscard]] JointIndices select_actions(const Eigen::VectorXd& input, double epsilon,
                                              Rng& rng) const;
    [[nodiscard]] JointIndices greedy(const Eigen::VectorXd& input) const;
    [[nodiscard]] Eigen::VectorXd q_values(AgentRole role, const Eigen::VectorXd& input) const;

    /// One TD update per agent toward (r - baseline) + discount * max_a' Q_target(s', a')
    /// using that agent's own component of the joint action. Returns the
    /// per-agent losses. Throws DivergenceError (weights untouched) on a
    /// non-finite loss or gradient.
    std::array<double, 3> train_step(std::span<const Transition* const> batch,
                                     double baseline = 0.0);
    void sync_targets();
    void set_learning_rate(double lr);

    [[nodiscard]] std::size_t updates() const { return updates_; }
    void set_updates(std::size_t n) { updates_ = n; }
    [[nodiscard]] Agent& agent(AgentRole role) { return agents_[static_cast<std::size_t>(role)]; }
    [[nodiscard]] const Agent& agent(AgentRole role) const {
        return agents_[static_cast<std::size_t>(role)];
    }
    [[nodiscard]] const MarlConfig& config() const { return cfg_; }

    void save(std::ostream& out, std::size_t step) const;
    /// Returns the stored step count. Leading '#' comment lines are skipped.
    /// Throws ConfigError on a malformed or incompatible checkpoint.
    std::size_t load(std::istream& in);

private:
    MarlConfig cfg_;
    std::array<std::size_t, 3> sizes_{};
    std::size_t input_size_ = 0;
    std::array<Agent, 3> agents_;
    std::size_t updates_ = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Coordinator& c, std::size_t step);
std::size_t load_checkpoint(const std::filesystem::path& path, Coordinator& c);

struct CurveRow {
    std::size_t step = 0;
    std::optional<std::array<double, 3>> losses; // empty before the first update
    double mean_episode_reward = 0.0;
};

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);

enum class RunMode { train, eval };

/// Drives an episode with the coordinator. In train mode it records
/// transitions, trains every step once the buffer holds a batch, syncs the
/// target nets on schedule and stops learning after `step_budget` steps.
class MarlController final : public Controller {
public:
    MarlController(const Scenario& scenario, Coordinator& coord, RunMode mode,
                   std::uint64_t seed);

    [[nodiscard]] bool forces_offsets() const override { return true; }
    [[nodiscard]] DeploymentAction initial_action(const Scenario& scenario) const override;
    DeploymentAction decide(const DecisionContext& ctx) override;
    void feedback(const StepOutcome& outcome) override;
    void episode_end() override;

    void begin_episode();
    void set_training(ReplayBuffer* buffer, std::size_t step_budget, std::vector<CurveRow>* curve);
    [[nodiscard]] std::size_t steps() const { return steps_; }
    void set_steps(std::size_t s) { steps_ = s; }
    [[nodiscard]] double epsilon() const;
    [[nodiscard]] const std::vector<DeploymentAction>& actions() const { return actions_; }

private:
    void finish_pending(const Eigen::VectorXd& next, bool done);

    const Scenario& scenario_;
    Coordinator& coord_;
    RunMode mode_;
    Rng rng_;
    ReplayBuffer* buffer_ = nullptr;
    std::vector<CurveRow>* curve_ = nullptr;
    std::size_t budget_ = 0;
    std::size_t start_step_ = 0;
    std::size_t steps_ = 0;
    JointIndices initial_;
    JointIndices last_;
    std::size_t frames_seen_ = 0;
    std::optional<Transition> pending_;
    double episode_reward_ = 0.0;
    std::size_t episode_steps_ = 0;
    std::vector<DeploymentAction> actions_;
};

struct TrainOptions {
    std::size_t steps = 20000;
    std::uint64_t seed = 1;
    std::optional<double> noise_bound; // default: the scenario's
    std::size_t start_step = 0;         // for resumed runs
};

struct TrainResult {
    std::vector<CurveRow> curve;
    std::size_t episodes = 0;
    std::size_t final_step = 0;
    std::optional<std::string> divergence; // set when an update went non-finite
};

/// Trains for options.steps transitions. A non-finite update stops training
/// early with `divergence` set; the coordinator then holds the last good
/// weights and final_step counts only the transitions trained on.
[[nodiscard]] TrainResult train(const Scenario& scenario, Coordinator& coord,
                                const TrainOptions& options);

/// One episode with the coordinator; eval mode is greedy and learns nothing.
[[nodiscard]] EpisodeResult run_episode(const Scenario& scenario, Coordinator& coord, RunMode mode,
                                        std::uint64_t seed,
                                        std::optional<double> noise_bound = std::nullopt);

/// The greedy joint action at the first decision of a noiseless episode.
[[nodiscard]] DeploymentAction greedy_joint_action(const Scenario& scenario, Coordinator& coord);

} // namespace edgedeploy
