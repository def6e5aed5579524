#include "mibids/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mibids/error.hpp"
#include "mibids/rng.hpp"
#include "mibids/tree.hpp"

namespace mibids {

namespace {

struct Activations {
    std::vector<double> hidden;
    std::vector<double> output;
};

void forward_into(const Mlp& m, std::span<const double> x, Activations& a) {
    a.hidden.resize(m.num_hidden());
    a.output.resize(m.num_outputs());
    for (std::size_t h = 0; h < m.num_hidden(); ++h) {
        double z = m.hidden.bias[h];
        for (std::size_t i = 0; i < m.num_inputs(); ++i) z += m.hidden.at(h, i) * x[i];
        a.hidden[h] = sigmoid(z);
    }
    for (std::size_t o = 0; o < m.num_outputs(); ++o) {
        double z = m.output.bias[o];
        for (std::size_t h = 0; h < m.num_hidden(); ++h) z += m.output.at(o, h) * a.hidden[h];
        a.output[o] = sigmoid(z);
    }
}

/// Fills g with the gradient; returns the loss at x.
double backprop(const Mlp& m, std::span<const double> x, std::span<const double> target, Activations& a,
                std::vector<double>& delta_out, std::vector<double>& delta_hidden, MlpGradient& g) {
    forward_into(m, x, a);
    double loss = 0.0;
    delta_out.resize(m.num_outputs());
    for (std::size_t o = 0; o < m.num_outputs(); ++o) {
        const double r = a.output[o] - target[o];
        loss += 0.5 * r * r;
        delta_out[o] = r * a.output[o] * (1.0 - a.output[o]);
    }
    delta_hidden.assign(m.num_hidden(), 0.0);
    for (std::size_t o = 0; o < m.num_outputs(); ++o) {
        for (std::size_t h = 0; h < m.num_hidden(); ++h) delta_hidden[h] += m.output.at(o, h) * delta_out[o];
    }
    for (std::size_t h = 0; h < m.num_hidden(); ++h) delta_hidden[h] *= a.hidden[h] * (1.0 - a.hidden[h]);

    for (std::size_t o = 0; o < m.num_outputs(); ++o) {
        for (std::size_t h = 0; h < m.num_hidden(); ++h) g.output.at(o, h) = delta_out[o] * a.hidden[h];
        g.output.bias[o] = delta_out[o];
    }
    for (std::size_t h = 0; h < m.num_hidden(); ++h) {
        for (std::size_t i = 0; i < m.num_inputs(); ++i) g.hidden.at(h, i) = delta_hidden[h] * x[i];
        g.hidden.bias[h] = delta_hidden[h];
    }
    return loss;
}

void step(std::vector<double>& w, const std::vector<double>& grad, std::vector<double>& prev, double lr,
          double mu) {
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double delta = -lr * grad[k] + mu * prev[k];
        w[k] += delta;
        prev[k] = delta;
    }
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t default_hidden_units(std::size_t num_features, std::size_t num_classes) {
    return std::max<std::size_t>(1, (num_features + num_classes + 1) / 2);
}

void MlpConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw UsageError("learning_rate must be finite and non-negative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("momentum must lie in [0, 1)");
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (!(init_range >= 0.0) || !std::isfinite(init_range)) throw UsageError("init_range must be >= 0");
}

void Mlp::validate() const {
    if (num_inputs() == 0 || num_hidden() == 0 || num_outputs() == 0) throw DataError("MLP has an empty layer");
    if (output.inputs != hidden.outputs) throw DataError("MLP layer dimensions are inconsistent");
    for (const auto* layer : {&hidden, &output}) {
        if (layer->weights.size() != layer->inputs * layer->outputs || layer->bias.size() != layer->outputs) {
            throw DataError("MLP weight array has the wrong size");
        }
        for (double w : layer->weights) {
            if (!std::isfinite(w)) throw DataError("MLP weight is not finite");
        }
        for (double b : layer->bias) {
            if (!std::isfinite(b)) throw DataError("MLP bias is not finite");
        }
    }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    if (x.size() != num_inputs()) {
        throw DataError("feature vector has " + std::to_string(x.size()) + " values, MLP expects " +
                        std::to_string(num_inputs()));
    }
    Activations a;
    forward_into(*this, x, a);
    return a.output;
}

std::size_t Mlp::predict(std::span<const double> x) const { return argmax(forward(x)); }

MlpGradient gradient(const Mlp& m, std::span<const double> x, std::span<const double> target) {
    if (x.size() != m.num_inputs() || target.size() != m.num_outputs()) {
        throw UsageError("input or target width does not match the network");
    }
    MlpGradient g{DenseLayer(m.num_inputs(), m.num_hidden()), DenseLayer(m.num_hidden(), m.num_outputs())};
    Activations a;
    std::vector<double> d_out, d_hidden;
    backprop(m, x, target, a, d_out, d_hidden, g);
    return g;
}

void train_mlp_epochs(Mlp& m, const Dataset& d, const MlpConfig& cfg, std::size_t epochs) {
    const std::size_t n = d.size();
    const std::size_t k = m.num_outputs();
    MlpGradient g{DenseLayer(m.num_inputs(), m.num_hidden()), DenseLayer(m.num_hidden(), m.num_outputs())};
    MlpGradient prev = g;
    Activations a;
    std::vector<double> d_out, d_hidden, target(k, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, 1));

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t idx : order) {
            const auto& r = d[idx];
            std::fill(target.begin(), target.end(), 0.0);
            target[r.label] = 1.0;
            const double loss = backprop(m, r.values, target, a, d_out, d_hidden, g);
            if (!std::isfinite(loss)) {
                throw DataError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", record " +
                                std::to_string(idx + 1));
            }
            step(m.output.weights, g.output.weights, prev.output.weights, cfg.learning_rate, cfg.momentum);
            step(m.output.bias, g.output.bias, prev.output.bias, cfg.learning_rate, cfg.momentum);
            step(m.hidden.weights, g.hidden.weights, prev.hidden.weights, cfg.learning_rate, cfg.momentum);
            step(m.hidden.bias, g.hidden.bias, prev.hidden.bias, cfg.learning_rate, cfg.momentum);
        }
    }
}

Mlp train_mlp(const Dataset& d, const MlpConfig& cfg) {
    cfg.validate();
    if (d.empty()) throw UsageError("cannot train an MLP on an empty dataset");
    if (d.num_classes() < 2) throw UsageError("MLP training needs at least two classes");
    const std::size_t hidden =
        cfg.hidden_units == 0 ? default_hidden_units(d.num_features(), d.num_classes()) : cfg.hidden_units;

    Mlp m(d.num_features(), hidden, d.num_classes());
    Rng init(cfg.seed);
    for (auto* v : {&m.hidden.weights, &m.hidden.bias, &m.output.weights, &m.output.bias}) {
        for (auto& w : *v) w = init.uniform(-cfg.init_range, cfg.init_range);
    }
    train_mlp_epochs(m, d, cfg, cfg.epochs);
    return m;
}

}  // namespace mibids
