#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trnews/layers.hpp"
#include "trnews/ops.hpp"
#include "trnews/random.hpp"
#include "trnews/tensor.hpp"

namespace trnews {

/// How a source-domain user representation is carried into the target domain.
enum class TransferStrategy {
  identity,    ///< target = source
  linear,      ///< target = H source
  orthogonal,  ///< target = H source, with a soft penalty on H^T H - I
  mlp,         ///< target = MLP(source), two wide tanh layers
  translator,  ///< target = H decoder(encoder(source)), small-waist autoencoder
};

std::string_view to_string(TransferStrategy s);
/// Accepts the config spellings identity|linear|orthogonal|mlp|translator.
TransferStrategy parse_strategy(std::string_view name);

struct TranslatorShape {
  std::size_t source_dim = 128;
  std::size_t target_dim = 128;
  /// Encoder depth for the autoencoder strategy.
  std::size_t hidden_layers = 1;
  /// Encoder width; 0 means source_dim / 2.
  std::size_t hidden_dim = 0;
  /// Weight of ||H^T H - I||_F^2 for the orthogonal strategy.
  double orthogonal_lambda = 0.1;
};

struct TranslatorPair {
  Vec source;
  Vec target;
};

class Translator {
 public:
  Translator(TransferStrategy strategy, TranslatorShape shape, std::string prefix = "translator.");

  TransferStrategy strategy() const { return strategy_; }
  const TranslatorShape& shape() const { return shape_; }
  const std::string& prefix() const { return prefix_; }
  bool has_parameters() const { return strategy_ != TransferStrategy::identity; }

  /// Adds the strategy's tensors. H starts at the identity when the two
  /// dimensions agree and is Xavier-initialised otherwise.
  void add_parameters(ParameterSet& params, Rng& rng) const;

  Vec translate(const ParameterSet& params, ConstSpan source) const;

  /// Mean over pairs of ||translate(source) - target||^2, plus the
  /// orthogonality penalty when applicable. Throws on an empty pair list.
  /// With `grads`, adds `grad_scale` times the parameter gradient. With
  /// `d_sources` / `d_targets`, also writes per-pair input gradients (scaled).
  double loss(const ParameterSet& params, std::span<const TranslatorPair> pairs, ParameterSet* grads = nullptr,
              double grad_scale = 1.0, std::vector<Vec>* d_sources = nullptr,
              std::vector<Vec>* d_targets = nullptr) const;

  /// ||H^T H - I||_F^2 (zero for strategies without H).
  double orthogonality_gap(const ParameterSet& params) const;

 private:
  std::string projection_name() const { return prefix_ + "projection"; }
  bool uses_projection() const;

  TransferStrategy strategy_;
  TranslatorShape shape_;
  std::string prefix_;
  std::vector<DenseLayer> layers_;
};

}  // namespace trnews
