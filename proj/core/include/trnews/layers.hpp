#pragma once

#include <span>
#include <string>
#include <vector>

#include "trnews/ops.hpp"
#include "trnews/random.hpp"
#include "trnews/tensor.hpp"

namespace trnews {

enum class Activation { none, relu, tanh };

/// A fully connected layer stored in a ParameterSet. An empty `bias` name
/// means the layer has no bias term.
struct DenseLayer {
  std::string weight;
  std::string bias;
  Activation activation = Activation::none;
};

/// Per-layer inputs and outputs recorded by the forward pass.
struct MlpTrace {
  std::vector<Vec> inputs;
  std::vector<Vec> outputs;
};

Vec mlp_forward(const ParameterSet& params, std::span<const DenseLayer> layers, ConstSpan x,
                MlpTrace* trace = nullptr);

/// Accumulates parameter gradients into `grads` (skipped when null or when a
/// name is absent) and the input gradient into `dx` (skipped when empty).
void mlp_backward(const ParameterSet& params, std::span<const DenseLayer> layers, const MlpTrace& trace,
                  ConstSpan dout, ParameterSet* grads, std::span<double> dx);

/// Adds Xavier-initialised weights and zero biases for each layer; layer i
/// maps widths[i] to widths[i + 1].
void add_dense_layers(ParameterSet& params, std::span<const DenseLayer> layers, std::span<const std::size_t> widths,
                      Rng& rng);

}  // namespace trnews
