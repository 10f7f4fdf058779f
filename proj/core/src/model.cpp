#include "trnews/model.hpp"

#include "trnews/checkpoint.hpp"

namespace trnews {

namespace {

NetworkShape network_shape(const ModelConfig& c) { return {c.dim, c.attention_hidden, c.cf_hidden}; }

TranslatorShape translator_shape(const ModelConfig& c) {
  return {c.dim, c.dim, c.translator_hidden_layers, c.translator_hidden_dim, c.orthogonal_lambda};
}

}  // namespace

TrNewsModel::TrNewsModel(ModelConfig config, std::size_t vocab_size, std::uint64_t seed)
    : config_(std::move(config)),
      source_(kSourcePrefix, network_shape(config_)),
      target_(kTargetPrefix, network_shape(config_)),
      translator_(config_.strategy, translator_shape(config_), kTranslatorPrefix) {
  Rng embedding_rng = make_rng(seed, "init-embedding");
  add_embedding(params_, vocab_size, config_.dim, embedding_rng);
  Rng source_rng = make_rng(seed, "init-source");
  source_.add_parameters(params_, source_rng);
  Rng target_rng = make_rng(seed, "init-target");
  target_.add_parameters(params_, target_rng);
  Rng translator_rng = make_rng(seed, "init-translator");
  translator_.add_parameters(params_, translator_rng);
}

TrNewsModel::TrNewsModel(ModelConfig config, ParameterSet params)
    : config_(std::move(config)),
      source_(kSourcePrefix, network_shape(config_)),
      target_(kTargetPrefix, network_shape(config_)),
      translator_(config_.strategy, translator_shape(config_), kTranslatorPrefix),
      params_(std::move(params)) {
  if (!params_.contains(kEmbeddingName)) throw ShapeError("parameters lack the embedding matrix");
  // Build a reference layout and compare names and shapes.
  ParameterSet reference;
  Rng rng(0);
  reference.add(kEmbeddingName, Tensor({params_.get(kEmbeddingName).rows(), config_.dim}));
  source_.add_parameters(reference, rng);
  target_.add_parameters(reference, rng);
  translator_.add_parameters(reference, rng);
  for (const auto& [name, t] : reference) {
    if (!params_.contains(name)) throw ShapeError("parameters lack tensor '" + name + "'");
    if (!params_.get(name).same_shape(t)) {
      throw ShapeError("tensor '" + name + "' has shape " + shape_string(params_.get(name).dims()) + ", expected " +
                       shape_string(t.dims()));
    }
  }
  if (reference.size() != params_.size()) throw ShapeError("parameters contain tensors not used by this model");
}

std::uint64_t TrNewsModel::network_hash() const { return checkpoint_hash(network_parameters()); }

}  // namespace trnews
