#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "trnews/corpus.hpp"
#include "trnews/ops.hpp"

namespace trnews {

enum class InterestMap { identity, linear, nonlinear };

std::string_view to_string(InterestMap m);
InterestMap parse_interest_map(std::string_view name);

struct SynthConfig {
  std::size_t users = 500;
  std::size_t latent_dim = 8;  ///< k
  std::size_t source_vocab = 300;
  std::size_t target_vocab = 300;
  /// Shared words as a fraction of the smaller vocabulary.
  double overlap = 0.0;
  std::size_t topics = 16;  ///< per domain
  /// Spread of the log topic-word weights; larger is peakier.
  double topic_concentration = 2.0;
  /// Use the source topic-word distributions (and topic vectors) in the
  /// target domain too. Requires overlap 1 and equal vocabulary sizes.
  bool identical_topics = false;
  std::size_t articles_per_domain = 400;
  std::size_t min_words = 8;
  std::size_t max_words = 16;
  /// Mixture weight of an article's primary topic; the rest is uniform.
  double primary_topic_weight = 0.8;
  InterestMap map = InterestMap::nonlinear;
  /// Gain of the nonlinear map's random matrix.
  double map_gain = 1.5;
  std::size_t events_per_user = 30;
  /// Inverse temperature of the interest-topic affinity when sampling reads.
  double affinity_scale = 2.0;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Per-domain generative parameters.
struct SynthDomainTruth {
  std::vector<std::string> words;          ///< the domain's vocabulary
  std::vector<Vec> topic_vectors;          ///< beta_t in R^k
  std::vector<Vec> topic_words;            ///< distribution over `words`
  std::vector<Vec> article_mixtures;       ///< theta_a over topics
  std::vector<std::vector<std::size_t>> article_words;  ///< indices into `words`
};

struct SynthTruth {
  std::vector<Vec> latents;           ///< z_u; also the source interests
  std::vector<Vec> target_interests;  ///< map(z_u)
  Vec map_matrix;                     ///< row-major k x k (linear / nonlinear)
  Vec map_bias;                       ///< nonlinear only
  SynthDomainTruth source;
  SynthDomainTruth target;

  const SynthDomainTruth& domain(Domain d) const { return d == Domain::source ? source : target; }
};

struct SynthCorpus {
  std::vector<RawArticle> articles;  ///< source articles first, then target
  std::vector<EventRecord> events;   ///< grouped by user, source reads first
  SynthTruth truth;
};

/// Deterministic for a given config (including seed).
SynthCorpus generate(const SynthConfig& config);

/// Applies the configured map to one latent vector.
Vec apply_interest_map(const SynthTruth& truth, InterestMap map, ConstSpan z);

/// Affinity sum_t theta_{a,t} <interest, beta_t> of one article.
double article_affinity(const SynthDomainTruth& domain, std::size_t article, ConstSpan interest);

std::string synth_user_id(std::size_t u);
std::string synth_article_id(Domain d, std::size_t a);

}  // namespace trnews
