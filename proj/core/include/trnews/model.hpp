#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trnews/base_network.hpp"
#include "trnews/tensor.hpp"
#include "trnews/translator.hpp"

namespace trnews {

struct ModelConfig {
  std::size_t dim = 128;
  std::size_t attention_hidden = 0;
  std::vector<std::size_t> cf_hidden{80, 40};
  TransferStrategy strategy = TransferStrategy::translator;
  std::size_t translator_hidden_layers = 1;
  std::size_t translator_hidden_dim = 0;
  double orthogonal_lambda = 0.1;
};

inline const std::string kSourcePrefix = "source.";
inline const std::string kTargetPrefix = "target.";
inline const std::string kTranslatorPrefix = "translator.";

/// Source network, target network and translator over one ParameterSet.
class TrNewsModel {
 public:
  /// Fresh parameters. Each component draws from its own seed sub-stream, so
  /// e.g. changing the transfer strategy leaves network initialisation alone.
  TrNewsModel(ModelConfig config, std::size_t vocab_size, std::uint64_t seed);
  /// Wraps existing parameters (e.g. from a checkpoint); shapes are validated.
  TrNewsModel(ModelConfig config, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return params_.get(kEmbeddingName).rows(); }

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  const BaseNetwork& network(Domain d) const { return d == Domain::source ? source_ : target_; }
  const BaseNetwork& source() const { return source_; }
  const BaseNetwork& target() const { return target_; }
  const Translator& translator() const { return translator_; }

  ParameterSet network_parameters() const { return params_.without_prefix(kTranslatorPrefix); }
  ParameterSet translator_parameters() const { return params_.with_prefix(kTranslatorPrefix); }
  std::uint64_t network_hash() const;

 private:
  ModelConfig config_;
  BaseNetwork source_;
  BaseNetwork target_;
  Translator translator_;
  ParameterSet params_;
};

}  // namespace trnews
