#include "edgedeploy/qnetwork.hpp"

#include "edgedeploy/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace edgedeploy {

void QNetwork::Params::set_zero() {
    w1.setZero();
    b1.setZero();
    w2.setZero();
    b2.setZero();
}

bool QNetwork::Params::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

bool operator==(const QNetwork::Params& a, const QNetwork::Params& b) {
    auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2);
}

QNetwork::QNetwork(std::size_t input, std::size_t hidden, std::size_t output, Rng& rng) {
    if (input == 0 || hidden == 0 || output == 0) {
        throw ConfigError("network layer sizes must be positive");
    }
    const auto in = static_cast<Eigen::Index>(input);
    const auto hid = static_cast<Eigen::Index>(hidden);
    const auto out = static_cast<Eigen::Index>(output);
    auto glorot = [&](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        m.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(r, c) = (2.0 * unit_draw(rng) - 1.0) * limit;
            }
        }
    };
    glorot(p_.w1, hid, in);
    glorot(p_.w2, out, hid);
    p_.b1 = Eigen::VectorXd::Zero(hid);
    p_.b2 = Eigen::VectorXd::Zero(out);
}

Eigen::VectorXd QNetwork::forward(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd h = (p_.w1 * x + p_.b1).array().tanh().matrix();
    return p_.w2 * h + p_.b2;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd h = p_.w1 * x;
    h.colwise() += p_.b1;
    h = h.array().tanh().matrix();
    Eigen::MatrixXd q = p_.w2 * h;
    q.colwise() += p_.b2;
    return q;
}

double QNetwork::loss(const Eigen::MatrixXd& x, std::span<const std::size_t> actions,
                      const Eigen::VectorXd& targets) const {
    const Eigen::MatrixXd q = forward_batch(x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double e = q(static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]), i) -
                         targets(i);
        total += 0.5 * e * e;
    }
    return total / static_cast<double>(x.cols());
}

double QNetwork::loss_and_gradients(const Eigen::MatrixXd& x, std::span<const std::size_t> actions,
                                    const Eigen::VectorXd& targets, Params& grad) const {
    const Eigen::Index n = x.cols();
    if (n == 0 || actions.size() != static_cast<std::size_t>(n) || targets.size() != n) {
        throw ConfigError("loss_and_gradients: batch shape mismatch");
    }
    Eigen::MatrixXd h = p_.w1 * x;
    h.colwise() += p_.b1;
    h = h.array().tanh().matrix();
    Eigen::MatrixXd q = p_.w2 * h;
    q.colwise() += p_.b2;

    // dL/dq is nonzero only at the taken action of each sample.
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), n);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]);
        if (a >= q.rows()) {
            throw ConfigError("loss_and_gradients: action index out of range");
        }
        const double e = q(a, i) - targets(i);
        total += 0.5 * e * e;
        dq(a, i) = e * inv_n;
    }
    grad.w2 = dq * h.transpose();
    grad.b2 = dq.rowwise().sum();
    const Eigen::MatrixXd dz =
        ((p_.w2.transpose() * dq).array() * (1.0 - h.array().square())).matrix();
    grad.w1 = dz * x.transpose();
    grad.b1 = dz.rowwise().sum();
    return total * inv_n;
}

Adam::Adam(const QNetwork& net, AdamConfig cfg) : cfg_(cfg), m_(net.params()), v_(net.params()) {
    if (!(cfg.lr > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    m_.set_zero();
    v_.set_zero();
}

void Adam::step(QNetwork& net, const QNetwork::Params& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = (cfg_.beta2 * v.array() + (1.0 - cfg_.beta2) * g.array().square()).matrix();
        param.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
    };
    auto& p = net.params();
    update(p.w1, m_.w1, v_.w1, grad.w1);
    update(p.b1, m_.b1, v_.b1, grad.b1);
    update(p.w2, m_.w2, v_.w2, grad.w2);
    update(p.b2, m_.b2, v_.b2, grad.b2);
}

namespace {

template <typename M>
void write_matrix(std::ostream& out, const char* name, const M& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            if (c > 0) {
                out << ' ';
            }
            out << buf;
        }
        out << '\n';
    }
}

template <typename M>
void read_matrix(std::istream& in, const char* name, M& m, const M& expect) {
    std::string tag;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != name) {
        throw ConfigError(std::string("checkpoint: expected tensor '") + name + "'");
    }
    if (rows != expect.rows() || cols != expect.cols()) {
        throw ConfigError(std::string("checkpoint: shape mismatch for '") + name + "'");
    }
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            std::string tok;
            if (!(in >> tok)) {
                throw ConfigError(std::string("checkpoint: truncated tensor '") + name + "'");
            }
            // strtod rather than stod: subnormal weights must load too.
            char* end = nullptr;
            m(r, c) = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) {
                throw ConfigError("checkpoint: bad value '" + tok + "'");
            }
        }
    }
}

} // namespace

void write_params(std::ostream& out, const QNetwork::Params& p) {
    write_matrix(out, "w1", p.w1);
    write_matrix(out, "b1", p.b1);
    write_matrix(out, "w2", p.w2);
    write_matrix(out, "b2", p.b2);
}

void read_params(std::istream& in, QNetwork::Params& p, const QNetwork::Params& expect) {
    read_matrix(in, "w1", p.w1, expect.w1);
    read_matrix(in, "b1", p.b1, expect.b1);
    read_matrix(in, "w2", p.w2, expect.w2);
    read_matrix(in, "b2", p.b2, expect.b2);
    if (!p.all_finite()) {
        throw ConfigError("checkpoint: non-finite weights");
    }
}

} // namespace edgedeploy
