#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gradbench/errors.hpp"
#include "gradbench/objective.hpp"
#include "gradbench/param_vector.hpp"
#include "gradbench/rng.hpp"

namespace gradbench {

enum class Activation { Identity, Relu };
enum class Loss { Mse, SoftmaxCrossEntropy };

struct InitStrategy {
    enum class Kind { Normal, Uniform } kind = Kind::Normal;
    std::uint64_t seed = 0;

    static InitStrategy from_string(const std::string& s, std::uint64_t seed) {
        if (s == "normal") return {Kind::Normal, seed};
        if (s == "uniform") return {Kind::Uniform, seed};
        throw io_error("unknown init strategy: " + s);
    }
};

// Fully-connected network. All weights and biases live in one flat
// ParamVector, laid out layer by layer as [W_0, b_0, W_1, b_1, ...] with
// each W column-major (fan_in x fan_out). Hidden layers share one
// activation; the output layer is linear and the loss interprets it.
struct DenseNet {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Identity;
    Loss loss = Loss::Mse;
    ParamVector params;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t output_dim() const { return layer_sizes.back(); }
    std::size_t layers() const { return layer_sizes.size() - 1; }
};

inline std::size_t param_count(const std::vector<std::size_t>& layer_sizes) {
    if (layer_sizes.size() < 2)
        throw dimension_error("param_count: need at least input and output layer");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
}

namespace detail {

// Weight/bias views into the flat parameter vector for layer l.
struct LayerView {
    Eigen::Map<const Eigen::MatrixXd> w;
    Eigen::Map<const Eigen::VectorXd> b;
};

inline LayerView layer_view(const DenseNet& net, std::size_t l) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k)
        off += net.layer_sizes[k] * net.layer_sizes[k + 1] + net.layer_sizes[k + 1];
    const std::size_t in = net.layer_sizes[l], out = net.layer_sizes[l + 1];
    return {Eigen::Map<const Eigen::MatrixXd>(net.params.data() + off, in, out),
            Eigen::Map<const Eigen::VectorXd>(net.params.data() + off + in * out, out)};
}

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd p = (z.colwise() - z.rowwise().maxCoeff()).array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

}  // namespace detail

// Weight initialization: normal entries with stddev 1/sqrt(fan_in), or
// uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)]; biases zero. Deterministic
// given the strategy seed.
inline DenseNet init(std::vector<std::size_t> layer_sizes, Activation activation,
                     Loss loss, InitStrategy strategy) {
    DenseNet net;
    net.layer_sizes = std::move(layer_sizes);
    net.activation = activation;
    net.loss = loss;
    net.params = ParamVector(param_count(net.layer_sizes));

    SeededRng rng = SeededRng(strategy.seed).substream("init");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const std::size_t in = net.layer_sizes[l], out = net.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < in * out; ++i) {
            net.params[off + i] = strategy.kind == InitStrategy::Kind::Normal
                                      ? rng.normal(0.0, scale)
                                      : rng.uniform(-scale, scale);
        }
        off += in * out + out;  // biases stay zero
    }
    return net;
}

// Forward pass on a batch; X is samples-by-features.
inline Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != net.input_dim())
        throw dimension_error("forward: input has " + std::to_string(x.cols()) +
                              " features, net expects " + std::to_string(net.input_dim()));
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < net.layers(); ++l) {
        const auto [w, b] = detail::layer_view(net, l);
        h = (h * w).rowwise() + b.transpose();
        if (l + 1 < net.layers() && net.activation == Activation::Relu)
            h = h.cwiseMax(0.0);
    }
    return h;
}

inline ParamVector forward(const DenseNet& net, const ParamVector& x) {
    Eigen::MatrixXd row(1, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) row(0, i) = x[i];
    const Eigen::MatrixXd out = forward_batch(net, row);
    ParamVector r(net.output_dim());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = out(0, i);
    return r;
}

// Mean loss over the batch plus the exact reverse-mode gradient with
// respect to every parameter. MSE is the plain mean over samples of the
// squared error (summed across output coordinates, no 1/2 factor);
// cross-entropy is applied to the softmax of the output layer, with targets
// given as class indices in the same matrix (single column).
inline std::pair<double, ParamVector> loss_and_grad(const DenseNet& net,
                                                    const Eigen::MatrixXd& x,
                                                    const Eigen::MatrixXd& y) {
    const auto n = x.rows();
    if (n == 0) throw dimension_error("loss_and_grad: empty batch");
    if (y.rows() != n) throw dimension_error("loss_and_grad: feature/target row mismatch");

    // forward, keeping activations per layer
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(net.layers() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < net.layers(); ++l) {
        const auto [w, b] = detail::layer_view(net, l);
        Eigen::MatrixXd h = (acts.back() * w).rowwise() + b.transpose();
        if (l + 1 < net.layers() && net.activation == Activation::Relu) h = h.cwiseMax(0.0);
        acts.push_back(std::move(h));
    }
    const Eigen::MatrixXd& out = acts.back();

    double loss = 0.0;
    Eigen::MatrixXd delta;  // dLoss/d(out), already averaged over the batch
    if (net.loss == Loss::Mse) {
        if (static_cast<std::size_t>(y.cols()) != net.output_dim())
            throw dimension_error("loss_and_grad: target width != output dim");
        const Eigen::MatrixXd r = out - y;
        loss = r.squaredNorm() / static_cast<double>(n);
        delta = 2.0 / static_cast<double>(n) * r;
    } else {
        if (y.cols() != 1) throw dimension_error("loss_and_grad: labels must be one column");
        const Eigen::MatrixXd p = detail::softmax_rows(out);
        delta = p;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto label = static_cast<Eigen::Index>(y(i, 0));
            if (label < 0 || label >= out.cols())
                throw dimension_error("loss_and_grad: label out of range");
            loss -= std::log(std::max(p(i, label), 1e-300));
            delta(i, label) -= 1.0;
        }
        loss /= static_cast<double>(n);
        delta /= static_cast<double>(n);
    }
    if (!std::isfinite(loss)) throw numeric_error("loss_and_grad: non-finite loss");

    // backward
    ParamVector grad(net.params.size());
    std::size_t off = net.params.size();
    for (std::size_t l = net.layers(); l-- > 0;) {
        const std::size_t in = net.layer_sizes[l], outw = net.layer_sizes[l + 1];
        off -= in * outw + outw;
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + off, in, outw);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + in * outw, outw);
        gw = acts[l].transpose() * delta;
        gb = delta.colwise().sum();
        if (l > 0) {
            const auto [w, b] = detail::layer_view(net, l);
            delta = delta * w.transpose();
            if (net.activation == Activation::Relu)
                delta = ((acts[l].array() > 0.0).cast<double>() * delta.array()).matrix();
        }
    }
    return {loss, std::move(grad)};
}

// Objective adapter: trains a DenseNet architecture over a fixed feature
// matrix and target vector, with minibatch selection through set_batch.
class NetObjective : public Objective {
public:
    NetObjective(DenseNet net_template, Eigen::MatrixXd features, Eigen::MatrixXd targets)
        : net_(std::move(net_template)), x_(std::move(features)), y_(std::move(targets)) {
        if (x_.rows() != y_.rows())
            throw dimension_error("NetObjective: feature/target row mismatch");
        batch_x_ = x_;
        batch_y_ = y_;
    }

    std::size_t dim() const override { return net_.params.size(); }
    std::size_t sample_count() const override { return static_cast<std::size_t>(x_.rows()); }

    void set_batch(std::span<const std::size_t> indices) override {
        batch_x_.resize(static_cast<Eigen::Index>(indices.size()), x_.cols());
        batch_y_.resize(static_cast<Eigen::Index>(indices.size()), y_.cols());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            batch_x_.row(static_cast<Eigen::Index>(i)) =
                x_.row(static_cast<Eigen::Index>(indices[i]));
            batch_y_.row(static_cast<Eigen::Index>(i)) =
                y_.row(static_cast<Eigen::Index>(indices[i]));
        }
    }

    double value(const ParamVector& theta) const override {
        DenseNet net = with_params(theta);
        return loss_and_grad(net, batch_x_, batch_y_).first;
    }

    ParamVector gradient(const ParamVector& theta) const override {
        DenseNet net = with_params(theta);
        return loss_and_grad(net, batch_x_, batch_y_).second;
    }

    const DenseNet& net() const { return net_; }

private:
    DenseNet with_params(const ParamVector& theta) const {
        if (theta.size() != net_.params.size())
            throw dimension_error("NetObjective: parameter length mismatch");
        DenseNet net = net_;
        net.params = theta;
        return net;
    }

    DenseNet net_;
    Eigen::MatrixXd x_, y_;
    Eigen::MatrixXd batch_x_, batch_y_;
};

}  // namespace gradbench
