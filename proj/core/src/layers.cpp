#include "trnews/layers.hpp"

namespace trnews {

namespace {

Tensor* grad_slot(ParameterSet* grads, const std::string& name) {
  if (!grads || name.empty() || !grads->contains(name)) return nullptr;
  return &grads->get(name);
}

}  // namespace

Vec mlp_forward(const ParameterSet& params, std::span<const DenseLayer> layers, ConstSpan x, MlpTrace* trace) {
  if (trace) {
    trace->inputs.clear();
    trace->outputs.clear();
  }
  Vec current(x.begin(), x.end());
  for (const auto& layer : layers) {
    const Tensor& w = params.get(layer.weight);
    Vec y = layer.bias.empty() ? matvec(w, current) : affine(w, params.get(layer.bias), current);
    switch (layer.activation) {
      case Activation::relu:
        for (double& v : y) v = relu(v);
        break;
      case Activation::tanh:
        y = tanh(y);
        break;
      case Activation::none:
        break;
    }
    if (trace) {
      trace->inputs.push_back(std::move(current));
      trace->outputs.push_back(y);
    }
    current = std::move(y);
  }
  return current;
}

void mlp_backward(const ParameterSet& params, std::span<const DenseLayer> layers, const MlpTrace& trace,
                  ConstSpan dout, ParameterSet* grads, std::span<double> dx) {
  Vec grad(dout.begin(), dout.end());
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& layer = layers[i];
    switch (layer.activation) {
      case Activation::relu:
        relu_backward_inplace(trace.outputs[i], grad);
        break;
      case Activation::tanh:
        tanh_backward_inplace(trace.outputs[i], grad);
        break;
      case Activation::none:
        break;
    }
    const Tensor& w = params.get(layer.weight);
    const bool need_input_grad = i > 0 || !dx.empty();
    Vec dinput(need_input_grad ? w.cols() : 0, 0.0);
    affine_backward(w, trace.inputs[i], grad, grad_slot(grads, layer.weight), grad_slot(grads, layer.bias),
                    dinput);
    if (i == 0) {
      if (!dx.empty()) {
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += dinput[k];
      }
    } else {
      grad = std::move(dinput);
    }
  }
}

void add_dense_layers(ParameterSet& params, std::span<const DenseLayer> layers, std::span<const std::size_t> widths,
                      Rng& rng) {
  if (widths.size() != layers.size() + 1) {
    throw ShapeError("add_dense_layers: " + std::to_string(layers.size()) + " layers need " +
                     std::to_string(layers.size() + 1) + " widths");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Tensor w({widths[i + 1], widths[i]});
    xavier_uniform(w, rng);
    params.add(layers[i].weight, std::move(w));
    if (!layers[i].bias.empty()) params.add(layers[i].bias, Tensor({widths[i + 1]}));
  }
}

}  // namespace trnews
