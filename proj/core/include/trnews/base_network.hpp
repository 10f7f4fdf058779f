#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trnews/corpus.hpp"
#include "trnews/layers.hpp"
#include "trnews/ops.hpp"
#include "trnews/random.hpp"
#include "trnews/tensor.hpp"

namespace trnews {

inline constexpr double kPredictionClamp = 1e-12;
inline const std::string kEmbeddingName = "embedding";

struct NetworkShape {
  std::size_t dim = 128;
  /// Width of the attention unit's hidden layer; 0 means `dim`.
  std::size_t attention_hidden = 0;
  std::vector<std::size_t> cf_hidden{80, 40};
};

/// Adds the shared |V| x D word-embedding matrix: U(-0.05, 0.05) with the
/// padding row fixed at zero.
void add_embedding(ParameterSet& params, std::size_t vocab_size, std::size_t dim, Rng& rng);

/// Mean of the article's word embeddings.
Vec news_encode(const ParameterSet& params, std::span<const WordId> tokens);
/// dE[w] += d_repr / |tokens| for each token occurrence.
void news_encode_backward(std::span<const WordId> tokens, ConstSpan d_repr, ParameterSet& grads);

/// Unweighted mean of history representations.
Vec user_encode_unconditioned(std::span<const Vec> history);

/// Binary cross-entropy of one prediction with the prediction clamped to
/// [1e-12, 1 - 1e-12]. Throws std::invalid_argument for labels outside {0, 1}.
double binary_cross_entropy(double prediction, int label);

/// One domain's (news encoder, attention user encoder, neural CF) tuple. All
/// tensors live in an external ParameterSet under `prefix`; the embedding
/// matrix is shared between domains.
class BaseNetwork {
 public:
  BaseNetwork(std::string prefix, NetworkShape shape);

  const std::string& prefix() const { return prefix_; }
  const NetworkShape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.dim; }

  /// Adds the attention-unit and CF tensors (not the embedding).
  void add_parameters(ParameterSet& params, Rng& rng) const;

  /// Softmax over attention-unit logits a([history_i, candidate]).
  Vec attention_weights(const ParameterSet& params, std::span<const Vec> history, ConstSpan candidate) const;
  /// Attention-weighted sum of the history. Throws on empty history.
  Vec user_encode(const ParameterSet& params, std::span<const Vec> history, ConstSpan candidate) const;
  /// sigmoid(CF([user, news])).
  double predict(const ParameterSet& params, ConstSpan user, ConstSpan news) const;
  /// predict(user_encode(history, candidate), candidate) over article ids.
  double score(const ParameterSet& params, std::span<const NewsArticle> articles,
               std::span<const ArticleId> history, ArticleId candidate) const;

  /// Sum of cross-entropies over `batch`. When `grads` is non-null, adds
  /// `grad_scale` times the gradient of that sum; entries missing from
  /// `grads` are skipped.
  double batch_loss(const ParameterSet& params, std::span<const NewsArticle> articles,
                    std::span<const TrainingExample> batch, ParameterSet* grads, double grad_scale = 1.0) const;

  /// Smallest |pre-activation| of any ReLU unit over the batch; central
  /// differences are only trustworthy when this is well above eps.
  double relu_margin(const ParameterSet& params, std::span<const NewsArticle> articles,
                     std::span<const TrainingExample> batch) const;

  /// Names of this network's own tensors (excluding the embedding).
  std::vector<std::string> parameter_names() const;

 private:
  std::string prefix_;
  NetworkShape shape_;
  std::vector<DenseLayer> attention_;
  std::vector<DenseLayer> cf_;
};

/// Joint objective: summed cross-entropy over a target batch
/// and a source batch. The two terms interact only through the embedding.
double joint_loss(const ParameterSet& params, std::span<const NewsArticle> articles, const BaseNetwork& target,
                  std::span<const TrainingExample> target_batch, const BaseNetwork& source,
                  std::span<const TrainingExample> source_batch, ParameterSet* grads = nullptr,
                  double grad_scale = 1.0);

}  // namespace trnews
