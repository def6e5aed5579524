#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mibids/dataset.hpp"

namespace mibids {

/// ceil((M + K) / 2).
std::size_t default_hidden_units(std::size_t num_features, std::size_t num_classes);

struct MlpConfig {
    double learning_rate = 0.3;
    double momentum = 0.2;
    std::size_t epochs = 500;
    /// 0 selects default_hidden_units().
    std::size_t hidden_units = 0;
    /// Initial weights are uniform in [-init_range, init_range].
    double init_range = 0.5;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Fully connected sigmoid layer; `weights` is row-major (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out)
        : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

    double& at(std::size_t out, std::size_t in) { return weights[out * inputs + in]; }
    double at(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }

    bool operator==(const DenseLayer&) const = default;
};

/// One hidden layer; sigmoid at hidden and output units, one output per class.
struct Mlp {
    DenseLayer hidden;
    DenseLayer output;

    Mlp() = default;
    Mlp(std::size_t num_inputs, std::size_t num_hidden, std::size_t num_outputs)
        : hidden(num_inputs, num_hidden), output(num_hidden, num_outputs) {}

    std::size_t num_inputs() const noexcept { return hidden.inputs; }
    std::size_t num_hidden() const noexcept { return hidden.outputs; }
    std::size_t num_outputs() const noexcept { return output.outputs; }

    /// Throws DataError on inconsistent dimensions or non-finite weights.
    void validate() const;

    /// sigmoid(W2 * sigmoid(W1 x + b1) + b2).
    std::vector<double> forward(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;

    bool operator==(const Mlp&) const = default;
};

/// Partial derivatives of 0.5 * |forward(x) - target|^2, laid out like Mlp.
struct MlpGradient {
    DenseLayer hidden;
    DenseLayer output;
};

MlpGradient gradient(const Mlp& m, std::span<const double> x, std::span<const double> target);

double sigmoid(double z);

/// Per-record momentum backpropagation over seeded-shuffled epochs. Expects
/// inputs already normalized to [-1, 1].
Mlp train_mlp(const Dataset& d, const MlpConfig& cfg);

/// Runs `epochs` further epochs on an existing network; used by train_mlp.
void train_mlp_epochs(Mlp& m, const Dataset& d, const MlpConfig& cfg, std::size_t epochs);

}  // namespace mibids
