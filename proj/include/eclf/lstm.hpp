#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eclf/error.hpp"

namespace eclf {

/// Single-layer LSTM regressor with a linear readout of the final hidden state.
template <typename Scalar>
struct LstmParams {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    // input-to-hidden (hidden x input_dim)
    Matrix w_xi, w_xf, w_xo, w_xc;
    // hidden-to-hidden (hidden x hidden)
    Matrix w_hi, w_hf, w_ho, w_hc;
    Vector b_i, b_f, b_o, b_c;
    RowVector w_out;
    Scalar b_out = Scalar(0);

    Eigen::Index hidden() const { return b_i.size(); }
    Eigen::Index input_dim() const { return w_xi.cols(); }

    static LstmParams zeros(Eigen::Index hidden, Eigen::Index input_dim) {
        LstmParams p;
        for (auto* m : {&p.w_xi, &p.w_xf, &p.w_xo, &p.w_xc}) m->setZero(hidden, input_dim);
        for (auto* m : {&p.w_hi, &p.w_hf, &p.w_ho, &p.w_hc}) m->setZero(hidden, hidden);
        for (auto* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) b->setZero(hidden);
        p.w_out.setZero(hidden);
        return p;
    }

    /// Uniform(-k, k) with k = 1/sqrt(hidden); forget-gate bias starts at 1.
    static LstmParams random(Eigen::Index hidden, Eigen::Index input_dim, std::uint64_t seed) {
        auto p = zeros(hidden, input_dim);
        std::mt19937_64 rng(seed);
        const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
        std::uniform_real_distribution<double> dist(-k, k);
        Vector flat = p.flatten();
        for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = static_cast<Scalar>(dist(rng));
        p.assign(flat);
        p.b_f.setOnes();
        return p;
    }

    Eigen::Index parameter_count() const {
        const auto h = hidden();
        const auto d = input_dim();
        return 4 * h * d + 4 * h * h + 4 * h + h + 1;
    }

    /// Calls f(name, pointer, count) for every tensor in a fixed order.
    template <typename F>
    void visit(F&& f) {
        f("w_xi", w_xi.data(), w_xi.size());
        f("w_xf", w_xf.data(), w_xf.size());
        f("w_xo", w_xo.data(), w_xo.size());
        f("w_xc", w_xc.data(), w_xc.size());
        f("w_hi", w_hi.data(), w_hi.size());
        f("w_hf", w_hf.data(), w_hf.size());
        f("w_ho", w_ho.data(), w_ho.size());
        f("w_hc", w_hc.data(), w_hc.size());
        f("b_i", b_i.data(), b_i.size());
        f("b_f", b_f.data(), b_f.size());
        f("b_o", b_o.data(), b_o.size());
        f("b_c", b_c.data(), b_c.size());
        f("w_out", w_out.data(), w_out.size());
        f("b_out", &b_out, Eigen::Index{1});
    }

    Vector flatten() const {
        Vector out(parameter_count());
        Eigen::Index pos = 0;
        const_cast<LstmParams*>(this)->visit([&](const char*, Scalar* ptr, Eigen::Index n) {
            out.segment(pos, n) = Eigen::Map<const Vector>(ptr, n);
            pos += n;
        });
        return out;
    }

    void assign(const Vector& flat) {
        if (flat.size() != parameter_count()) throw AlignmentError("flat parameter vector has wrong length");
        Eigen::Index pos = 0;
        visit([&](const char*, Scalar* ptr, Eigen::Index n) {
            Eigen::Map<Vector>(ptr, n) = flat.segment(pos, n);
            pos += n;
        });
    }

    template <typename Other>
    LstmParams<Other> cast() const {
        LstmParams<Other> p = LstmParams<Other>::zeros(hidden(), input_dim());
        p.assign(flatten().template cast<Other>());
        return p;
    }
};

template <typename Scalar>
struct LstmState {
    using Vector = typename LstmParams<Scalar>::Vector;
    Vector h;  ///< output h_t
    Vector c;  ///< cell state C_t

    static LstmState zeros(Eigen::Index hidden) { return {Vector::Zero(hidden), Vector::Zero(hidden)}; }
};

/// Gate activations and inputs of one step, kept for backpropagation.
template <typename Scalar>
struct GateRecord {
    using Vector = typename LstmParams<Scalar>::Vector;
    Vector x, h_prev, c_prev;
    Vector input_gate, forget_gate, output_gate, candidate;
    Vector c, tanh_c, h;
};

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
    using S = typename Derived::Scalar;
    return z.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
}

template <typename Derived>
auto tanh(const Eigen::MatrixBase<Derived>& z) {
    using S = typename Derived::Scalar;
    return z.unaryExpr([](S v) { return std::tanh(v); });
}

}  // namespace detail

/// One cell update: sigmoid gates, tanh candidate, C = f*C_prev + i*C~, h = o*tanh(C).
template <typename Scalar>
std::pair<LstmState<Scalar>, GateRecord<Scalar>> lstm_step(
    const LstmParams<Scalar>& p, const Eigen::Ref<const typename LstmParams<Scalar>::Vector>& x,
    const LstmState<Scalar>& prev) {
    if (x.size() != p.input_dim()) throw AlignmentError("lstm input has wrong dimension");
    GateRecord<Scalar> g;
    g.x = x;
    g.h_prev = prev.h;
    g.c_prev = prev.c;
    g.input_gate = detail::sigmoid(p.w_xi * x + p.w_hi * prev.h + p.b_i);
    g.forget_gate = detail::sigmoid(p.w_xf * x + p.w_hf * prev.h + p.b_f);
    g.output_gate = detail::sigmoid(p.w_xo * x + p.w_ho * prev.h + p.b_o);
    g.candidate = detail::tanh(p.w_xc * x + p.w_hc * prev.h + p.b_c);
    g.c = g.forget_gate.cwiseProduct(prev.c) + g.input_gate.cwiseProduct(g.candidate);
    g.tanh_c = detail::tanh(g.c);
    g.h = g.output_gate.cwiseProduct(g.tanh_c);
    return {LstmState<Scalar>{g.h, g.c}, std::move(g)};
}

/// Sequence of input vectors, one per row.
template <typename Scalar>
using Window = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Scalar readout(const LstmParams<Scalar>& p, const LstmState<Scalar>& s) {
    return p.w_out.dot(s.h.transpose()) + p.b_out;
}

/// Folds lstm_step over the window from the zero state and reads out the final h.
template <typename Scalar>
Scalar lstm_forward(const LstmParams<Scalar>& p, const Window<Scalar>& window) {
    if (window.rows() == 0) throw InsufficientDataError("lstm window must be nonempty");
    auto state = LstmState<Scalar>::zeros(p.hidden());
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        state = lstm_step<Scalar>(p, window.row(t).transpose(), state).first;
    }
    return readout(p, state);
}

template <typename Scalar>
struct Sample {
    Window<Scalar> window;
    Scalar target;
};

template <typename Scalar>
struct GradientRecord {
    LstmParams<Scalar> grad;  ///< same shape as the parameters
    Scalar loss = Scalar(0);  ///< 1/2 mean squared error over the batch
};

/// Gradient of 1/2 * mean((pred - target)^2) by backpropagation through time.
template <typename Scalar>
GradientRecord<Scalar> lstm_gradients(const LstmParams<Scalar>& p, const std::vector<Sample<Scalar>>& batch) {
    using Vector = typename LstmParams<Scalar>::Vector;
    if (batch.empty()) throw InsufficientDataError("gradient batch must be nonempty");
    const auto hidden = p.hidden();
    GradientRecord<Scalar> out{LstmParams<Scalar>::zeros(hidden, p.input_dim()), Scalar(0)};
    auto& gr = out.grad;
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(batch.size());

    std::vector<GateRecord<Scalar>> tape;
    for (const auto& sample : batch) {
        const auto& window = sample.window;
        if (window.rows() == 0) throw InsufficientDataError("lstm window must be nonempty");
        tape.clear();
        auto state = LstmState<Scalar>::zeros(hidden);
        for (Eigen::Index t = 0; t < window.rows(); ++t) {
            auto [next, rec] = lstm_step<Scalar>(p, window.row(t).transpose(), state);
            state = std::move(next);
            tape.push_back(std::move(rec));
        }
        const Scalar pred = readout(p, state);
        const Scalar err = pred - sample.target;
        out.loss += Scalar(0.5) * err * err * inv_n;

        const Scalar dpred = err * inv_n;
        gr.w_out += dpred * state.h.transpose();
        gr.b_out += dpred;

        Vector dh = dpred * p.w_out.transpose();
        Vector dc = Vector::Zero(hidden);
        for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
            const auto& g = *it;
            const Vector ones = Vector::Ones(hidden);
            const Vector d_o = dh.cwiseProduct(g.tanh_c);
            dc += dh.cwiseProduct(g.output_gate).cwiseProduct(ones - g.tanh_c.cwiseAbs2());
            const Vector d_i = dc.cwiseProduct(g.candidate);
            const Vector d_g = dc.cwiseProduct(g.input_gate);
            const Vector d_f = dc.cwiseProduct(g.c_prev);

            const Vector a_i = d_i.cwiseProduct(g.input_gate).cwiseProduct(ones - g.input_gate);
            const Vector a_f = d_f.cwiseProduct(g.forget_gate).cwiseProduct(ones - g.forget_gate);
            const Vector a_o = d_o.cwiseProduct(g.output_gate).cwiseProduct(ones - g.output_gate);
            const Vector a_c = d_g.cwiseProduct(ones - g.candidate.cwiseAbs2());

            gr.w_xi.noalias() += a_i * g.x.transpose();
            gr.w_xf.noalias() += a_f * g.x.transpose();
            gr.w_xo.noalias() += a_o * g.x.transpose();
            gr.w_xc.noalias() += a_c * g.x.transpose();
            gr.w_hi.noalias() += a_i * g.h_prev.transpose();
            gr.w_hf.noalias() += a_f * g.h_prev.transpose();
            gr.w_ho.noalias() += a_o * g.h_prev.transpose();
            gr.w_hc.noalias() += a_c * g.h_prev.transpose();
            gr.b_i += a_i;
            gr.b_f += a_f;
            gr.b_o += a_o;
            gr.b_c += a_c;

            dh = p.w_hi.transpose() * a_i + p.w_hf.transpose() * a_f + p.w_ho.transpose() * a_o +
                 p.w_hc.transpose() * a_c;
            dc = dc.cwiseProduct(g.forget_gate).eval();
        }
    }
    return out;
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 120;
    int batch_size = 12;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lr > 0.0)) throw ConfigError("adam lr must be positive");
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
            throw ConfigError("adam betas must lie in (0, 1)");
        }
        if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
        if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be positive");
    }
};

/// Adam with bias-corrected moment estimates over a flat parameter vector.
template <typename Scalar>
class AdamOptimizer {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    AdamOptimizer(const AdamConfig& config, Eigen::Index size)
        : cfg_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

    void step(Vector& params, const Vector& grad) {
        ++t_;
        const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
        const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
        m_ = b1 * m_ + (Scalar(1) - b1) * grad;
        v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
        const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t_));
        const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t_));
        const Scalar lr = static_cast<Scalar>(cfg_.lr);
        const Scalar eps = static_cast<Scalar>(cfg_.epsilon);
        for (Eigen::Index k = 0; k < params.size(); ++k) {
            const Scalar m_hat = m_[k] / c1;
            const Scalar v_hat = v_[k] / c2;
            params[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }

    long steps() const { return t_; }

private:
    AdamConfig cfg_;
    Vector m_;
    Vector v_;
    long t_ = 0;
};

template <typename Scalar>
struct TrainResult {
    LstmParams<Scalar> params;
    std::vector<double> epoch_losses;  ///< mean per-sample 1/2 squared error seen during each epoch
};

/// Mini-batch Adam over `dataset`, reshuffled every epoch from a generator
/// seeded with `config.seed`. DivergenceError on a non-finite loss or gradient.
template <typename Scalar>
TrainResult<Scalar> adam_train(LstmParams<Scalar> params, const std::vector<Sample<Scalar>>& dataset,
                               const AdamConfig& config) {
    config.validate();
    if (dataset.empty()) throw InsufficientDataError("training dataset must be nonempty");
    TrainResult<Scalar> res{std::move(params), {}};
    AdamOptimizer<Scalar> adam(config, res.params.parameter_count());
    auto flat = res.params.flatten();

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    std::vector<Sample<Scalar>> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batch_index = 0;
        for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.batch_size)) {
            const auto last = std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (auto k = first; k < last; ++k) batch.push_back(dataset[order[k]]);
            const auto g = lstm_gradients(res.params, batch);
            const auto grad_flat = g.grad.flatten();
            if (!std::isfinite(static_cast<double>(g.loss)) || !grad_flat.allFinite()) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch_index));
            }
            epoch_loss += static_cast<double>(g.loss) * static_cast<double>(last - first);
            adam.step(flat, grad_flat);
            res.params.assign(flat);
            ++batch_index;
        }
        res.epoch_losses.push_back(epoch_loss / static_cast<double>(dataset.size()));
    }
    return res;
}

/// Per-column z-score statistics.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  ///< standard deviation, 1 for constant columns

    /// Statistics over the rows of `x` (each row one observation).
    static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
    Eigen::RowVectorXd apply(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    double apply(double v, Eigen::Index col) const { return (v - mean[col]) / scale[col]; }
    double invert(double z, Eigen::Index col) const { return z * scale[col] + mean[col]; }
};

nlohmann::json to_json(const LstmParams<double>& params);
LstmParams<double> lstm_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace eclf
