#include "edgedeploy/marl.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace edgedeploy {

namespace {

constexpr std::string_view kCheckpointMagic = "edgedeploy-marl-checkpoint";
constexpr int kCheckpointVersion = 1;

std::size_t argmax(const Eigen::VectorXd& q) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
        if (q(i) > q(best)) {
            best = i;
        }
    }
    return static_cast<std::size_t>(best);
}

std::size_t component(const JointIndices& j, std::size_t agent) {
    return agent == 0 ? j.d : agent == 1 ? j.k : j.p;
}

void expect_token(std::istream& in, std::string_view want) {
    std::string tok;
    if (!(in >> tok) || tok != want) {
        throw ConfigError("checkpoint: expected '" + std::string(want) + "'");
    }
}

std::size_t read_count(std::istream& in, std::string_view what) {
    long long v = -1;
    if (!(in >> v) || v < 0) {
        throw ConfigError("checkpoint: bad " + std::string(what));
    }
    return static_cast<std::size_t>(v);
}

} // namespace

void MarlConfig::validate() const {
    if (hidden == 0 || batch == 0 || replay_capacity == 0 || target_sync_every == 0) {
        throw ConfigError("MARL sizes must be positive");
    }
    if (!(lr > 0.0) || !(lr_final > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw ConfigError("discount must lie in [0, 1)");
    }
    if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0)) {
        throw ConfigError("epsilon bounds must lie in [0, 1]");
    }
    if (!(eps_decay_fraction > 0.0 && eps_decay_fraction <= 1.0)) {
        throw ConfigError("eps_decay_fraction must lie in (0, 1]");
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw ConfigError("replay capacity must be positive");
    }
    data_.reserve(std::min<std::size_t>(capacity, 1 << 14));
}

void ReplayBuffer::push(Transition t) {
    if (!std::isfinite(t.reward)) {
        throw DivergenceError("non-finite reward pushed to the replay buffer");
    }
    reward_sum_ += t.reward;
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        reward_sum_ -= data_[next_].reward;
        data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

double ReplayBuffer::mean_reward() const {
    if (data_.empty()) {
        return 0.0;
    }
    return reward_sum_ / static_cast<double>(data_.size());
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (data_.empty()) {
        throw SimulationError("sampling from an empty replay buffer");
    }
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(&data_[index_draw(rng, data_.size())]);
    }
    return out;
}

Coordinator::Coordinator(const ActionSpace& space, const MarlConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), sizes_(space.sizes()) {
    cfg_.validate();
    for (auto n : sizes_) {
        if (n == 0) {
            throw ConfigError("every agent needs at least one action");
        }
    }
    input_size_ = kStateDim + sizes_[0] + sizes_[1] + sizes_[2];
    Rng rng(seed);
    for (std::size_t a = 0; a < 3; ++a) {
        agents_[a].online = QNetwork(input_size_, cfg_.hidden, sizes_[a], rng);
        agents_[a].target = agents_[a].online;
        agents_[a].optimizer = Adam(agents_[a].online, AdamConfig{cfg_.lr});
    }
}

Eigen::VectorXd Coordinator::encode_input(std::span<const double> state,
                                          const JointIndices& last) const {
    if (state.size() != kStateDim) {
        throw ConfigError("state vector has the wrong dimension");
    }
    if (last.d >= sizes_[0] || last.k >= sizes_[1] || last.p >= sizes_[2]) {
        throw ConfigError("previous joint action out of range");
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_size_));
    for (std::size_t i = 0; i < kStateDim; ++i) {
        x(static_cast<Eigen::Index>(i)) = state[i];
    }
    std::size_t base = kStateDim;
    x(static_cast<Eigen::Index>(base + last.d)) = 1.0;
    base += sizes_[0];
    x(static_cast<Eigen::Index>(base + last.k)) = 1.0;
    base += sizes_[1];
    x(static_cast<Eigen::Index>(base + last.p)) = 1.0;
    return x;
}

Eigen::VectorXd Coordinator::q_values(AgentRole role, const Eigen::VectorXd& input) const {
    return agent(role).online.forward(input);
}

JointIndices Coordinator::select_actions(const Eigen::VectorXd& input, double epsilon,
                                         Rng& rng) const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ConfigError("epsilon must lie in [0, 1]");
    }
    std::array<std::size_t, 3> pick{};
    for (std::size_t a = 0; a < 3; ++a) {
        // Always one draw for the coin, a second only when exploring.
        if (unit_draw(rng) < epsilon) {
            pick[a] = index_draw(rng, sizes_[a]);
        } else {
            pick[a] = argmax(agents_[a].online.forward(input));
        }
    }
    return JointIndices{pick[0], pick[1], pick[2]};
}

JointIndices Coordinator::greedy(const Eigen::VectorXd& input) const {
    return JointIndices{argmax(agents_[0].online.forward(input)),
                        argmax(agents_[1].online.forward(input)),
                        argmax(agents_[2].online.forward(input))};
}

std::array<double, 3> Coordinator::train_step(std::span<const Transition* const> batch,
                                              double baseline) {
    if (batch.empty()) {
        throw ConfigError("train_step: empty batch");
    }
    const auto n = static_cast<Eigen::Index>(batch.size());
    const auto in = static_cast<Eigen::Index>(input_size_);
    Eigen::MatrixXd x(in, n);
    Eigen::MatrixXd xn(in, n);
    Eigen::VectorXd r(n);
    Eigen::VectorXd live(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = *batch[static_cast<std::size_t>(i)];
        if (t.input.size() != in || t.next_input.size() != in) {
            throw ConfigError("train_step: transition input has the wrong dimension");
        }
        x.col(i) = t.input;
        xn.col(i) = t.next_input;
        r(i) = t.reward - baseline;
        live(i) = t.done ? 0.0 : 1.0;
    }

    std::array<double, 3> losses{};
    std::array<QNetwork::Params, 3> grads;
    std::vector<std::size_t> acts(batch.size());
    for (std::size_t a = 0; a < 3; ++a) {
        const Eigen::MatrixXd qn = agents_[a].target.forward_batch(xn);
        const Eigen::VectorXd y =
            r + cfg_.discount * live.cwiseProduct(qn.colwise().maxCoeff().transpose());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            acts[i] = component(batch[i]->action, a);
        }
        losses[a] = agents_[a].online.loss_and_gradients(x, acts, y, grads[a]);
        if (!std::isfinite(losses[a]) || !grads[a].all_finite()) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "non-finite loss in agent %s at update %zu (loss=%g)",
                          std::string(kAgentNames[a]).c_str(), updates_ + 1, losses[a]);
            throw DivergenceError(buf);
        }
    }
    for (std::size_t a = 0; a < 3; ++a) {
        agents_[a].optimizer.step(agents_[a].online, grads[a]);
    }
    ++updates_;
    if (updates_ % cfg_.target_sync_every == 0) {
        sync_targets();
    }
    return losses;
}

void Coordinator::set_learning_rate(double lr) {
    for (auto& a : agents_) {
        a.optimizer.set_lr(lr);
    }
}

void Coordinator::sync_targets() {
    for (auto& a : agents_) {
        a.target.params() = a.online.params();
    }
}

void Coordinator::save(std::ostream& out, std::size_t step) const {
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "step " << step << '\n';
    out << "updates " << updates_ << '\n';
    out << "input " << input_size_ << " hidden " << cfg_.hidden << '\n';
    out << "sizes " << sizes_[0] << ' ' << sizes_[1] << ' ' << sizes_[2] << '\n';
    for (std::size_t a = 0; a < 3; ++a) {
        out << "agent " << kAgentNames[a] << '\n';
        out << "online\n";
        write_params(out, agents_[a].online.params());
        out << "target\n";
        write_params(out, agents_[a].target.params());
    }
    out << "end\n";
}

std::size_t Coordinator::load(std::istream& in) {
    while ((in >> std::ws).peek() == '#') {
        std::string skip;
        std::getline(in, skip);
    }
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kCheckpointMagic) {
        throw ConfigError("not a MARL checkpoint");
    }
    if (version != kCheckpointVersion) {
        throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    expect_token(in, "step");
    const std::size_t step = read_count(in, "step");
    expect_token(in, "updates");
    const std::size_t updates = read_count(in, "updates");
    expect_token(in, "input");
    const std::size_t input = read_count(in, "input size");
    expect_token(in, "hidden");
    const std::size_t hidden = read_count(in, "hidden size");
    expect_token(in, "sizes");
    std::array<std::size_t, 3> sizes{};
    for (auto& s : sizes) {
        s = read_count(in, "action count");
    }
    if (input != input_size_ || hidden != cfg_.hidden || sizes != sizes_) {
        throw ConfigError("checkpoint shapes do not match this scenario");
    }
    std::array<Agent, 3> loaded = agents_;
    for (std::size_t a = 0; a < 3; ++a) {
        expect_token(in, "agent");
        expect_token(in, kAgentNames[a]);
        expect_token(in, "online");
        read_params(in, loaded[a].online.params(), agents_[a].online.params());
        expect_token(in, "target");
        read_params(in, loaded[a].target.params(), agents_[a].target.params());
        loaded[a].optimizer = Adam(loaded[a].online, AdamConfig{cfg_.lr});
    }
    expect_token(in, "end");
    agents_ = std::move(loaded);
    updates_ = updates;
    return step;
}

void save_checkpoint(const std::filesystem::path& path, const Coordinator& c, std::size_t step) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write checkpoint '" + path.string() + "'");
    }
    c.save(out, step);
}

std::size_t load_checkpoint(const std::filesystem::path& path, Coordinator& c) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read checkpoint '" + path.string() + "'");
    }
    return c.load(in);
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
    out << "step,d_loss,k_loss,p_loss,mean_episode_reward\n";
    char buf[192];
    for (const auto& r : rows) {
        if (r.losses) {
            std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", r.step, (*r.losses)[0],
                          (*r.losses)[1], (*r.losses)[2], r.mean_episode_reward);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,,,,%.9g\n", r.step, r.mean_episode_reward);
        }
        out << buf;
    }
}

MarlController::MarlController(const Scenario& scenario, Coordinator& coord, RunMode mode,
                               std::uint64_t seed)
    : scenario_(scenario), coord_(coord), mode_(mode), rng_(seed) {
    if (coord.sizes() != scenario.space.sizes()) {
        throw ConfigError("coordinator does not match the scenario's action space");
    }
    const auto& sp = scenario.space;
    initial_ = JointIndices{sp.d_size() - 1, sp.k_size() - 1, 0};
    last_ = initial_;
}

DeploymentAction MarlController::initial_action(const Scenario& scenario) const {
    return scenario.space.decode(initial_);
}

void MarlController::begin_episode() {
    last_ = initial_;
    pending_.reset();
    frames_seen_ = 0;
    episode_reward_ = 0.0;
    episode_steps_ = 0;
    actions_.clear();
}

void MarlController::set_training(ReplayBuffer* buffer, std::size_t step_budget,
                                  std::vector<CurveRow>* curve) {
    buffer_ = buffer;
    start_step_ = steps_;
    budget_ = step_budget;
    curve_ = curve;
}

double MarlController::epsilon() const {
    const auto& cfg = coord_.config();
    if (mode_ == RunMode::eval) {
        return 0.0;
    }
    if (budget_ <= start_step_) {
        return cfg.eps_end;
    }
    const double span = cfg.eps_decay_fraction * static_cast<double>(budget_ - start_step_);
    const double progress =
        std::min(1.0, static_cast<double>(steps_ - std::min(steps_, start_step_)) / span);
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * progress;
}

DeploymentAction MarlController::decide(const DecisionContext& ctx) {
    const Eigen::VectorXd x = coord_.encode_input(ctx.state, last_);
    if (pending_) {
        finish_pending(x, false);
    }
    JointIndices idx;
    if (mode_ == RunMode::train) {
        double eps = epsilon();
        if (ctx.frame_index < coord_.config().warmup_frames) {
            eps = coord_.config().eps_start;
        }
        idx = coord_.select_actions(x, eps, rng_);
        Transition t;
        t.input = x;
        t.action = idx;
        pending_ = std::move(t);
    } else {
        idx = coord_.greedy(x);
    }
    last_ = idx;
    const auto action = scenario_.space.decode(idx);
    actions_.push_back(action);
    return action;
}

void MarlController::feedback(const StepOutcome& outcome) {
    episode_reward_ += outcome.reward;
    ++episode_steps_;
    if (pending_) {
        pending_->reward = outcome.reward;
    }
}

void MarlController::episode_end() {
    if (pending_) {
        const Eigen::VectorXd next = pending_->input;
        finish_pending(next, true);
    }
}

void MarlController::finish_pending(const Eigen::VectorXd& next, bool done) {
    Transition t = std::move(*pending_);
    pending_.reset();
    if (buffer_ == nullptr || steps_ >= budget_) {
        return;
    }
    t.next_input = next;
    t.done = done;
    buffer_->push(std::move(t));
    ++steps_;
    CurveRow row;
    row.step = steps_;
    if (buffer_->size() >= coord_.config().batch) {
        const auto& cfg = coord_.config();
        if (budget_ > start_step_ && budget_ != std::numeric_limits<std::size_t>::max()) {
            const double progress = static_cast<double>(steps_ - start_step_) /
                                    static_cast<double>(budget_ - start_step_);
            coord_.set_learning_rate(cfg.lr + (cfg.lr_final - cfg.lr) * progress);
        }
        const auto batch = buffer_->sample(coord_.config().batch, rng_);
        try {
            row.losses =
                coord_.train_step(batch, cfg.center_rewards ? buffer_->mean_reward() : 0.0);
        } catch (const DivergenceError&) {
            --steps_; // this transition was never trained on
            throw;
        }
    }
    row.mean_episode_reward =
        episode_steps_ > 0 ? episode_reward_ / static_cast<double>(episode_steps_) : 0.0;
    if (curve_ != nullptr) {
        curve_->push_back(row);
    }
}

TrainResult train(const Scenario& scenario, Coordinator& coord, const TrainOptions& options) {
    TrainResult result;
    result.final_step = options.start_step;
    if (options.steps == 0 || scenario.trace.empty()) {
        return result;
    }
    ReplayBuffer buffer(coord.config().replay_capacity);
    MarlController ctl(scenario, coord, RunMode::train, options.seed);
    ctl.set_steps(options.start_step);
    ctl.set_training(&buffer, options.start_step + options.steps, &result.curve);
    while (ctl.steps() < options.start_step + options.steps) {
        ctl.begin_episode();
        EpisodeOptions eo;
        eo.noise_seed = options.seed * 1000003ULL + result.episodes;
        eo.noise_bound = options.noise_bound;
        const std::size_t before = ctl.steps();
        try {
            (void)simulate_episode(scenario, ctl, eo);
        } catch (const DivergenceError& e) {
            result.divergence = e.what();
            result.final_step = ctl.steps();
            return result;
        }
        ++result.episodes;
        if (ctl.steps() == before) {
            break; // no decisions possible
        }
    }
    result.final_step = ctl.steps();
    return result;
}

EpisodeResult run_episode(const Scenario& scenario, Coordinator& coord, RunMode mode,
                          std::uint64_t seed, std::optional<double> noise_bound) {
    MarlController ctl(scenario, coord, mode, seed);
    ReplayBuffer buffer(coord.config().replay_capacity);
    if (mode == RunMode::train) {
        ctl.set_training(&buffer, std::numeric_limits<std::size_t>::max(), nullptr);
    }
    ctl.begin_episode();
    EpisodeOptions eo;
    eo.noise_seed = seed;
    eo.noise_bound = noise_bound;
    return simulate_episode(scenario, ctl, eo);
}

DeploymentAction greedy_joint_action(const Scenario& scenario, Coordinator& coord) {
    MarlController ctl(scenario, coord, RunMode::eval, 0);
    ctl.begin_episode();
    EpisodeOptions eo;
    eo.noise_bound = 0.0;
    (void)simulate_episode(scenario, ctl, eo);
    if (ctl.actions().empty()) {
        return ctl.initial_action(scenario);
    }
    return ctl.actions().front();
}

} // namespace edgedeploy
