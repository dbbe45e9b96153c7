#pragma once

#include "edgedeploy/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>

namespace edgedeploy {

/// Two fully-connected layers with tanh between them:
///   q = W2 * tanh(W1 * x + b1) + b2
/// Batches are column-major: one sample per column.
class QNetwork {
public:
    struct Params {
        Eigen::MatrixXd w1; // hidden x input
        Eigen::VectorXd b1;
        Eigen::MatrixXd w2; // output x hidden
        Eigen::VectorXd b2;

        [[nodiscard]] std::size_t count() const {
            return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
        }
        void set_zero();
        [[nodiscard]] bool all_finite() const;
        friend bool operator==(const Params& a, const Params& b);
    };

    QNetwork() = default;
    /// Glorot-uniform weights, zero biases.
    QNetwork(std::size_t input, std::size_t hidden, std::size_t output, Rng& rng);

    [[nodiscard]] std::size_t input_size() const { return static_cast<std::size_t>(p_.w1.cols()); }
    [[nodiscard]] std::size_t hidden_size() const { return static_cast<std::size_t>(p_.w1.rows()); }
    [[nodiscard]] std::size_t output_size() const { return static_cast<std::size_t>(p_.w2.rows()); }

    [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    /// Loss = mean over columns of 0.5 * (q[actions[i]] - targets[i])^2.
    /// Writes d(loss)/d(params) into grad (resized as needed).
    double loss_and_gradients(const Eigen::MatrixXd& x, std::span<const std::size_t> actions,
                              const Eigen::VectorXd& targets, Params& grad) const;
    [[nodiscard]] double loss(const Eigen::MatrixXd& x, std::span<const std::size_t> actions,
                              const Eigen::VectorXd& targets) const;

    [[nodiscard]] const Params& params() const { return p_; }
    [[nodiscard]] Params& params() { return p_; }

private:
    Params p_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(const QNetwork& net, AdamConfig cfg);
    void step(QNetwork& net, const QNetwork::Params& grad);
    [[nodiscard]] std::size_t steps() const { return t_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    [[nodiscard]] double lr() const { return cfg_.lr; }

private:
    AdamConfig cfg_;
    QNetwork::Params m_;
    QNetwork::Params v_;
    std::size_t t_ = 0;
};

/// Plain-text layer dump: "<name> <rows> <cols>" followed by one row per line.
void write_params(std::ostream& out, const QNetwork::Params& p);
/// Throws ConfigError on malformed input or when shapes differ from `expect`.
void read_params(std::istream& in, QNetwork::Params& p, const QNetwork::Params& expect);

} // namespace edgedeploy
