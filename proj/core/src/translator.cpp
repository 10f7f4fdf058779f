#include "trnews/translator.hpp"

#include <stdexcept>

namespace trnews {

std::string_view to_string(TransferStrategy s) {
  switch (s) {
    case TransferStrategy::identity:
      return "identity";
    case TransferStrategy::linear:
      return "linear";
    case TransferStrategy::orthogonal:
      return "orthogonal";
    case TransferStrategy::mlp:
      return "mlp";
    case TransferStrategy::translator:
      return "translator";
  }
  return "unknown";
}

TransferStrategy parse_strategy(std::string_view name) {
  for (auto s : {TransferStrategy::identity, TransferStrategy::linear, TransferStrategy::orthogonal,
                 TransferStrategy::mlp, TransferStrategy::translator}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown transfer strategy '" + std::string(name) +
                              "' (expected identity|linear|orthogonal|mlp|translator)");
}

Translator::Translator(TransferStrategy strategy, TranslatorShape shape, std::string prefix)
    : strategy_(strategy), shape_(shape), prefix_(std::move(prefix)) {
  if (shape_.source_dim == 0 || shape_.target_dim == 0) throw std::invalid_argument("translator dims must be positive");
  if (shape_.hidden_dim == 0) shape_.hidden_dim = std::max<std::size_t>(1, shape_.source_dim / 2);
  switch (strategy_) {
    case TransferStrategy::identity:
      if (shape_.source_dim != shape_.target_dim) {
        throw ShapeError("identity transfer needs equal dimensions, got source " + std::to_string(shape_.source_dim) +
                         " and target " + std::to_string(shape_.target_dim));
      }
      break;
    case TransferStrategy::linear:
    case TransferStrategy::orthogonal:
      layers_.push_back({projection_name(), "", Activation::none});
      break;
    case TransferStrategy::mlp:
      for (int i = 0; i < 2; ++i) {
        const std::string base = prefix_ + "mlp." + std::to_string(i);
        layers_.push_back({base + ".weight", base + ".bias", Activation::tanh});
      }
      layers_.push_back({prefix_ + "mlp.2.weight", prefix_ + "mlp.2.bias", Activation::none});
      break;
    case TransferStrategy::translator:
      if (shape_.hidden_layers == 0) throw std::invalid_argument("translator needs at least one hidden layer");
      for (std::size_t i = 0; i < shape_.hidden_layers; ++i) {
        const std::string base = prefix_ + "encoder." + std::to_string(i);
        layers_.push_back({base + ".weight", base + ".bias", Activation::tanh});
      }
      layers_.push_back({prefix_ + "decoder.weight", prefix_ + "decoder.bias", Activation::none});
      layers_.push_back({projection_name(), "", Activation::none});
      break;
  }
}

bool Translator::uses_projection() const {
  return strategy_ == TransferStrategy::linear || strategy_ == TransferStrategy::orthogonal ||
         strategy_ == TransferStrategy::translator;
}

void Translator::add_parameters(ParameterSet& params, Rng& rng) const {
  const std::size_t ds = shape_.source_dim;
  const std::size_t dt = shape_.target_dim;
  std::vector<std::size_t> widths;
  switch (strategy_) {
    case TransferStrategy::identity:
      return;
    case TransferStrategy::linear:
    case TransferStrategy::orthogonal:
      widths = {ds, dt};
      break;
    case TransferStrategy::mlp:
      widths = {ds, 2 * ds, 2 * ds, dt};
      break;
    case TransferStrategy::translator:
      widths.push_back(ds);
      for (std::size_t i = 0; i < shape_.hidden_layers; ++i) widths.push_back(shape_.hidden_dim);
      widths.push_back(ds);
      widths.push_back(dt);
      break;
  }
  add_dense_layers(params, layers_, widths, rng);
  if (uses_projection() && ds == dt) {
    Tensor& h = params.get(projection_name());
    h.fill(0.0);
    for (std::size_t i = 0; i < ds; ++i) h.at(i, i) = 1.0;
  }
}

Vec Translator::translate(const ParameterSet& params, ConstSpan source) const {
  if (source.size() != shape_.source_dim) {
    throw ShapeError("translate: expected [" + std::to_string(shape_.source_dim) + "] input, got [" +
                     std::to_string(source.size()) + "]");
  }
  if (strategy_ == TransferStrategy::identity) return Vec(source.begin(), source.end());
  return mlp_forward(params, layers_, source);
}

double Translator::orthogonality_gap(const ParameterSet& params) const {
  if (!uses_projection()) return 0.0;
  const Tensor& h = params.get(projection_name());
  const std::size_t rows = h.rows();
  const std::size_t cols = h.cols();
  double gap = 0.0;
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double g = 0.0;
      for (std::size_t r = 0; r < rows; ++r) g += h.at(r, i) * h.at(r, j);
      if (i == j) g -= 1.0;
      gap += g * g;
    }
  }
  return gap;
}

double Translator::loss(const ParameterSet& params, std::span<const TranslatorPair> pairs, ParameterSet* grads,
                        double grad_scale, std::vector<Vec>* d_sources, std::vector<Vec>* d_targets) const {
  if (pairs.empty()) throw std::invalid_argument("translator loss over an empty pair list");
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  if (d_sources) d_sources->assign(pairs.size(), Vec(shape_.source_dim, 0.0));
  if (d_targets) d_targets->assign(pairs.size(), Vec(shape_.target_dim, 0.0));

  double total = 0.0;
  MlpTrace trace;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pair = pairs[p];
    if (pair.target.size() != shape_.target_dim) {
      throw ShapeError("translator loss: target of size " + std::to_string(pair.target.size()) + ", expected " +
                       std::to_string(shape_.target_dim));
    }
    Vec out;
    if (strategy_ == TransferStrategy::identity) {
      out = translate(params, pair.source);
    } else {
      if (pair.source.size() != shape_.source_dim) {
        throw ShapeError("translator loss: source of size " + std::to_string(pair.source.size()));
      }
      out = mlp_forward(params, layers_, pair.source, &trace);
    }
    Vec diff(out.size());
    double sq = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      diff[k] = out[k] - pair.target[k];
      sq += diff[k] * diff[k];
    }
    total += sq * inv_n;

    if (!grads && !d_sources && !d_targets) continue;
    Vec dout(diff.size());
    for (std::size_t k = 0; k < diff.size(); ++k) dout[k] = 2.0 * diff[k] * inv_n * grad_scale;
    if (d_targets) {
      for (std::size_t k = 0; k < dout.size(); ++k) (*d_targets)[p][k] = -dout[k];
    }
    if (strategy_ == TransferStrategy::identity) {
      if (d_sources) (*d_sources)[p] = dout;
    } else {
      std::span<double> dx = d_sources ? std::span<double>((*d_sources)[p]) : std::span<double>();
      mlp_backward(params, layers_, trace, dout, grads, dx);
    }
  }

  if (strategy_ == TransferStrategy::orthogonal && shape_.orthogonal_lambda != 0.0) {
    const double lambda = shape_.orthogonal_lambda;
    total += lambda * orthogonality_gap(params);
    if (grads && grads->contains(projection_name())) {
      // d/dH ||H^T H - I||^2 = 4 H (H^T H - I)
      const Tensor& h = params.get(projection_name());
      Tensor& gh = grads->get(projection_name());
      const std::size_t rows = h.rows();
      const std::size_t cols = h.cols();
      Tensor gap({cols, cols});
      for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          double g = 0.0;
          for (std::size_t r = 0; r < rows; ++r) g += h.at(r, i) * h.at(r, j);
          gap.at(i, j) = g - (i == j ? 1.0 : 0.0);
        }
      }
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < cols; ++i) s += h.at(r, i) * gap.at(i, j);
          gh.at(r, j) += grad_scale * lambda * 4.0 * s;
        }
      }
    }
  }
  return total;
}

}  // namespace trnews
