#pragma once

// Full-batch softmax classifiers: logistic regression, or an MLP with one
// ReLU hidden layer. Trained with Adam + L2 weight decay, step learning-rate
// decay and early stopping on validation accuracy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hlp/graph.hpp"
#include "hlp/rng.hpp"
#include "hlp/sparse.hpp"

namespace hlp {

struct MlpConfig {
    /// Absent: logistic regression.
    std::optional<Index> hidden_dim;
    double dropout = 0.5;
    /// Apply dropout to the input features as well as the hidden layer.
    bool dropout_input = true;
    double weight_decay = 5e-4;
    double learning_rate = 0.01;
    double lr_decay_factor = 0.99;
    int lr_decay_every = 50;
    int max_epochs = 300;
    int patience = 30;
    std::uint64_t seed = 0;

    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

inline void validate(const MlpConfig& c) {
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
    if (!(c.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(c.weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be non-negative");
    if (c.hidden_dim && *c.hidden_dim < 1) throw std::invalid_argument("hidden_dim must be positive");
    if (c.max_epochs < 1) throw std::invalid_argument("max_epochs must be positive");
    if (c.patience < 0) throw std::invalid_argument("patience must be non-negative");
    if (c.lr_decay_every < 1) throw std::invalid_argument("lr_decay_every must be positive");
}

struct Layer {
    DenseMatrix weight;        ///< fan_in × fan_out
    Eigen::RowVectorXd bias;   ///< fan_out
};

struct Model {
    std::vector<Layer> layers;  ///< 1 (logistic regression) or 2 (MLP)
    MlpConfig config;

    Index input_dim() const { return layers.front().weight.rows(); }
    Index num_classes() const { return layers.back().weight.cols(); }
    bool all_finite() const {
        return std::all_of(layers.begin(), layers.end(), [](const Layer& l) {
            return l.weight.allFinite() && l.bias.allFinite();
        });
    }
};

using Gradients = std::vector<Layer>;

/// Glorot-uniform weights, zero biases.
inline Model init_model(Index input_dim, int num_classes, const MlpConfig& config) {
    validate(config);
    if (input_dim < 1 || num_classes < 1) throw std::invalid_argument("init_model: empty shape");
    Model m;
    m.config = config;
    Rng rng(derive_seed(config.seed, {0x1417}));
    auto make = [&](Index fan_in, Index fan_out) {
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-a, a);
        Layer l{DenseMatrix(fan_in, fan_out), Eigen::RowVectorXd::Zero(fan_out)};
        for (Index j = 0; j < fan_out; ++j)
            for (Index i = 0; i < fan_in; ++i) l.weight(i, j) = u(rng);
        return l;
    };
    if (config.hidden_dim) {
        m.layers.push_back(make(input_dim, *config.hidden_dim));
        m.layers.push_back(make(*config.hidden_dim, num_classes));
    } else {
        m.layers.push_back(make(input_dim, num_classes));
    }
    return m;
}

namespace detail {

/// Inverted-dropout mask: entries are 0 or 1/(1-rate).
inline DenseMatrix dropout_mask(Index rows, Index cols, double rate, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep = 1.0 / (1.0 - rate);
    DenseMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = u(rng) < rate ? 0.0 : keep;
    return m;
}

inline void softmax_rows(DenseMatrix& z) {
    for (Index i = 0; i < z.rows(); ++i) {
        auto r = z.row(i);
        r.array() -= r.maxCoeff();
        r = r.array().exp().matrix();
        r /= r.sum();
    }
}

struct ForwardPass {
    DenseMatrix input;       // after input dropout
    DenseMatrix hidden_pre;  // before ReLU (MLP only)
    DenseMatrix hidden;      // after ReLU and hidden dropout
    DenseMatrix hidden_mask;
    DenseMatrix probs;
};

inline ForwardPass run_forward(const Model& model, const DenseMatrix& x, bool dropout_active,
                               std::uint64_t seed) {
    if (x.cols() != model.input_dim())
        throw std::invalid_argument("forward: feature dim " + std::to_string(x.cols()) +
                                    " != model input dim " + std::to_string(model.input_dim()));
    if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
    const double rate = model.config.dropout;
    const bool drop = dropout_active && rate > 0.0;
    ForwardPass f;
    if (drop && model.config.dropout_input)
        f.input = x.cwiseProduct(dropout_mask(x.rows(), x.cols(), rate, derive_seed(seed, {1})));
    else
        f.input = x;

    if (model.layers.size() == 2) {
        const auto& l0 = model.layers[0];
        f.hidden_pre = (f.input * l0.weight).rowwise() + l0.bias;
        f.hidden = f.hidden_pre.cwiseMax(0.0);
        if (drop) {
            f.hidden_mask = dropout_mask(f.hidden.rows(), f.hidden.cols(), rate, derive_seed(seed, {2}));
            f.hidden = f.hidden.cwiseProduct(f.hidden_mask);
        }
        const auto& l1 = model.layers[1];
        f.probs = (f.hidden * l1.weight).rowwise() + l1.bias;
    } else {
        const auto& l0 = model.layers[0];
        f.probs = (f.input * l0.weight).rowwise() + l0.bias;
    }
    softmax_rows(f.probs);
    return f;
}

inline DenseMatrix gather_rows(const DenseMatrix& x, const std::vector<Index>& rows) {
    DenseMatrix out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= x.rows()) throw std::out_of_range("row index out of range");
        out.row(static_cast<Index>(i)) = x.row(rows[i]);
    }
    return out;
}

inline std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<Index>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (Index r : rows) out.push_back(labels.at(static_cast<std::size_t>(r)));
    return out;
}

inline double mean_cross_entropy(const DenseMatrix& probs, const std::vector<int>& y) {
    double loss = 0.0;
    for (Index i = 0; i < probs.rows(); ++i)
        loss -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]), std::numeric_limits<double>::min()));
    return loss / static_cast<double>(probs.rows());
}

}  // namespace detail

/// Row-stochastic class probabilities.
inline DenseMatrix forward(const Model& model, const DenseMatrix& features, bool dropout_active = false,
                           std::uint64_t seed = 0) {
    return detail::run_forward(model, features, dropout_active, seed).probs;
}

/// Input of the final (pre-softmax) layer: hidden activations for an MLP,
/// the features themselves for logistic regression. Dropout off.
inline DenseMatrix penultimate(const Model& model, const DenseMatrix& features) {
    if (model.layers.size() == 1) return features;
    return detail::run_forward(model, features, false, 0).hidden;
}

struct LossAndGrad {
    double loss = 0.0;
    Gradients grads;
};

/// Mean cross-entropy over the given rows of `x` plus ½·weight_decay·Σ‖W‖²
/// (biases not decayed), with exact gradients.
inline LossAndGrad loss_and_grad_rows(const Model& model, const DenseMatrix& x, const std::vector<int>& y,
                                      bool dropout_active = false, std::uint64_t seed = 0) {
    if (x.rows() == 0) throw std::invalid_argument("loss_and_grad: empty mask");
    const auto f = detail::run_forward(model, x, dropout_active, seed);
    const double wd = model.config.weight_decay;
    const auto n = static_cast<double>(x.rows());

    LossAndGrad out;
    out.loss = detail::mean_cross_entropy(f.probs, y);
    for (const auto& l : model.layers) out.loss += 0.5 * wd * l.weight.squaredNorm();

    DenseMatrix delta = f.probs;
    for (Index i = 0; i < x.rows(); ++i) delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    delta /= n;

    out.grads.resize(model.layers.size());
    if (model.layers.size() == 2) {
        const auto& l1 = model.layers[1];
        out.grads[1].weight = f.hidden.transpose() * delta + wd * l1.weight;
        out.grads[1].bias = delta.colwise().sum();
        DenseMatrix dh = delta * l1.weight.transpose();
        if (f.hidden_mask.size() > 0) dh = dh.cwiseProduct(f.hidden_mask);
        dh = dh.cwiseProduct((f.hidden_pre.array() > 0.0).cast<double>().matrix());
        out.grads[0].weight = f.input.transpose() * dh + wd * model.layers[0].weight;
        out.grads[0].bias = dh.colwise().sum();
    } else {
        out.grads[0].weight = f.input.transpose() * delta + wd * model.layers[0].weight;
        out.grads[0].bias = delta.colwise().sum();
    }
    return out;
}

inline LossAndGrad loss_and_grad(const Model& model, const DenseMatrix& features, const std::vector<int>& labels,
                                 const std::vector<Index>& mask, bool dropout_active = false,
                                 std::uint64_t seed = 0) {
    if (mask.empty()) throw std::invalid_argument("loss_and_grad: empty mask");
    return loss_and_grad_rows(model, detail::gather_rows(features, mask), detail::gather_labels(labels, mask),
                              dropout_active, seed);
}

// ---------------------------------------------------------------------------
// Adam

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of a single tensor; `t` is the 1-based step.
template <typename Param>
void adam_update(Param& param, Param& m, Param& v, const Param& grad, long t, double lr,
                 const AdamHyper& h = {}) {
    m = h.beta1 * m + (1.0 - h.beta1) * grad;
    v = h.beta2 * v + (1.0 - h.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + h.eps);
}

struct AdamState {
    std::vector<Layer> m;
    std::vector<Layer> v;
    long t = 0;
    AdamHyper hyper;
};

inline AdamState adam_init(const Model& model, AdamHyper hyper = {}) {
    AdamState s;
    s.hyper = hyper;
    for (const auto& l : model.layers) {
        Layer z{DenseMatrix::Zero(l.weight.rows(), l.weight.cols()), Eigen::RowVectorXd::Zero(l.bias.size())};
        s.m.push_back(z);
        s.v.push_back(z);
    }
    return s;
}

inline void adam_step(AdamState& state, Model& model, const Gradients& grads, double lr) {
    ++state.t;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        adam_update(model.layers[i].weight, state.m[i].weight, state.v[i].weight, grads[i].weight, state.t, lr,
                    state.hyper);
        adam_update(model.layers[i].bias, state.m[i].bias, state.v[i].bias, grads[i].bias, state.t, lr,
                    state.hyper);
    }
}

// ---------------------------------------------------------------------------
// Training and evaluation

enum class SplitTag { train, val, test };

struct Metrics {
    double accuracy = 0.0;
    double loss = 0.0;
    SplitTag tag = SplitTag::test;
};

inline Metrics evaluate_rows(const Model& model, const DenseMatrix& x, const std::vector<int>& y, SplitTag tag) {
    if (x.rows() == 0) throw std::invalid_argument("evaluate: empty mask");
    const DenseMatrix p = forward(model, x, false);
    Index correct = 0;
    for (Index i = 0; i < p.rows(); ++i) {
        Index arg;
        p.row(i).maxCoeff(&arg);
        correct += arg == y[static_cast<std::size_t>(i)];
    }
    return {static_cast<double>(correct) / static_cast<double>(p.rows()), detail::mean_cross_entropy(p, y), tag};
}

/// Accuracy and mean cross-entropy of argmax predictions over `mask`, dropout off.
inline Metrics evaluate(const Model& model, const DenseMatrix& features, const std::vector<int>& labels,
                        const std::vector<Index>& mask, SplitTag tag = SplitTag::test) {
    if (mask.empty()) throw std::invalid_argument("evaluate: empty mask");
    return evaluate_rows(model, detail::gather_rows(features, mask), detail::gather_labels(labels, mask), tag);
}

struct TrainedModel {
    Model model;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

struct TrainResult {
    TrainedModel trained;
    Metrics train{0.0, 0.0, SplitTag::train};
    Metrics val{0.0, 0.0, SplitTag::val};
    Metrics test{0.0, 0.0, SplitTag::test};
    bool diverged = false;
    int epochs_run = 0;
    std::vector<double> val_history;
    std::vector<double> loss_history;
};

inline TrainResult train(const DenseMatrix& features, const std::vector<int>& labels, int num_classes,
                         const Split& split, const MlpConfig& config) {
    validate(config);
    if (static_cast<Index>(labels.size()) != features.rows())
        throw std::invalid_argument("train: label count != feature rows");
    if (split.train.empty() || split.val.empty() || split.test.empty())
        throw std::invalid_argument("train: split has an empty part");

    const DenseMatrix x_train = detail::gather_rows(features, split.train);
    const DenseMatrix x_val = detail::gather_rows(features, split.val);
    const auto y_train = detail::gather_labels(labels, split.train);
    const auto y_val = detail::gather_labels(labels, split.val);

    Model model = init_model(features.cols(), num_classes, config);
    AdamState adam = adam_init(model);
    TrainResult result;
    result.trained.model = model;
    double best = -1.0;
    double lr = config.learning_rate;
    int since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto lg = loss_and_grad_rows(model, x_train, y_train, config.dropout > 0.0,
                                           derive_seed(config.seed, {0xd0, static_cast<std::uint64_t>(epoch)}));
        result.epochs_run = epoch;
        result.loss_history.push_back(lg.loss);
        if (!std::isfinite(lg.loss)) {
            result.diverged = true;
            break;
        }
        adam_step(adam, model, lg.grads, lr);
        if (epoch % config.lr_decay_every == 0) lr *= config.lr_decay_factor;
        if (!model.all_finite()) {
            result.diverged = true;
            break;
        }

        const double val_acc = evaluate_rows(model, x_val, y_val, SplitTag::val).accuracy;
        result.val_history.push_back(val_acc);
        if (val_acc > best) {
            best = val_acc;
            since_best = 0;
            result.trained.model = model;
            result.trained.best_epoch = epoch;
            result.trained.best_val_accuracy = val_acc;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    if (result.diverged) return result;
    const Model& m = result.trained.model;
    result.train = evaluate_rows(m, x_train, y_train, SplitTag::train);
    result.val = evaluate_rows(m, x_val, y_val, SplitTag::val);
    result.test = evaluate(m, features, labels, split.test, SplitTag::test);
    return result;
}

}  // namespace hlp
