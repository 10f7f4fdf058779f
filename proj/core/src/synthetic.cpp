#include "trnews/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

#include "trnews/random.hpp"

namespace trnews {

std::string_view to_string(InterestMap m) {
  switch (m) {
    case InterestMap::identity:
      return "identity";
    case InterestMap::linear:
      return "linear";
    case InterestMap::nonlinear:
      return "nonlinear";
  }
  return "unknown";
}

InterestMap parse_interest_map(std::string_view name) {
  for (auto m : {InterestMap::identity, InterestMap::linear, InterestMap::nonlinear}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown interest map '" + std::string(name) + "' (expected identity|linear|nonlinear)");
}

void SynthConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(users, "synth.users");
  positive(latent_dim, "synth.latent_dim");
  positive(source_vocab, "synth.source_vocab");
  positive(target_vocab, "synth.target_vocab");
  positive(topics, "synth.topics");
  positive(articles_per_domain, "synth.articles_per_domain");
  positive(min_words, "synth.min_words");
  positive(events_per_user, "synth.events_per_user");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("synth.overlap must lie in [0, 1]");
  if (max_words < min_words) throw std::invalid_argument("synth.max_words is below synth.min_words");
  if (events_per_user > articles_per_domain) {
    throw std::invalid_argument("synth.events_per_user exceeds synth.articles_per_domain");
  }
  if (!(primary_topic_weight >= 0.0 && primary_topic_weight <= 1.0)) {
    throw std::invalid_argument("synth.primary_topic_weight must lie in [0, 1]");
  }
  if (!(topic_concentration >= 0.0)) throw std::invalid_argument("synth.topic_concentration must be non-negative");
  if (!std::isfinite(affinity_scale)) throw std::invalid_argument("synth.affinity_scale must be finite");
  if (identical_topics && (overlap != 1.0 || source_vocab != target_vocab)) {
    throw std::invalid_argument("synth.identical_topics needs synth.overlap=1 and equal vocabulary sizes");
  }
}

std::string synth_user_id(std::size_t u) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "U%05zu", u);
  return buf;
}

std::string synth_article_id(Domain d, std::size_t a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", domain_code(d), a);
  return buf;
}

Vec apply_interest_map(const SynthTruth& truth, InterestMap map, ConstSpan z) {
  if (map == InterestMap::identity) return Vec(z.begin(), z.end());
  const std::size_t k = z.size();
  Vec out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += truth.map_matrix[i * k + j] * z[j];
    out[i] = map == InterestMap::nonlinear ? std::tanh(s + truth.map_bias[i]) : s;
  }
  return out;
}

double article_affinity(const SynthDomainTruth& domain, std::size_t article, ConstSpan interest) {
  const Vec& theta = domain.article_mixtures[article];
  double a = 0.0;
  for (std::size_t t = 0; t < theta.size(); ++t) a += theta[t] * dot(interest, domain.topic_vectors[t]);
  return a;
}

namespace {

Vec gaussian_vector(std::size_t n, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Vec v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::vector<std::string> domain_words(Domain d, std::size_t size, std::size_t shared) {
  std::vector<std::string> words;
  words.reserve(size);
  for (std::size_t i = 0; i < shared; ++i) words.push_back("w" + std::to_string(i));
  const char own = d == Domain::source ? 's' : 't';
  for (std::size_t i = shared; i < size; ++i) words.push_back(own + std::to_string(i - shared));
  return words;
}

void draw_topics(SynthDomainTruth& dom, const SynthConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < cfg.topics; ++t) {
    dom.topic_vectors.push_back(gaussian_vector(cfg.latent_dim, 1.0, rng));
    Vec w(dom.words.size());
    double total = 0.0;
    for (auto& x : w) {
      x = std::exp(cfg.topic_concentration * normal(rng));
      total += x;
    }
    for (auto& x : w) x /= total;
    dom.topic_words.push_back(std::move(w));
  }
}

void draw_articles(SynthDomainTruth& dom, const SynthConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<std::size_t> topic_pick(0, cfg.topics - 1);
  std::uniform_int_distribution<std::size_t> length_pick(cfg.min_words, cfg.max_words);
  const double rest = cfg.topics > 1 ? (1.0 - cfg.primary_topic_weight) / static_cast<double>(cfg.topics - 1) : 0.0;
  for (std::size_t a = 0; a < cfg.articles_per_domain; ++a) {
    const std::size_t primary = topic_pick(rng);
    Vec theta(cfg.topics, rest);
    theta[primary] = cfg.topics > 1 ? cfg.primary_topic_weight : 1.0;
    Vec word_probs(dom.words.size(), 0.0);
    for (std::size_t t = 0; t < cfg.topics; ++t) {
      for (std::size_t w = 0; w < word_probs.size(); ++w) word_probs[w] += theta[t] * dom.topic_words[t][w];
    }
    std::discrete_distribution<std::size_t> word_pick(word_probs.begin(), word_probs.end());
    const std::size_t len = length_pick(rng);
    std::vector<std::size_t> words(len);
    for (auto& w : words) w = word_pick(rng);
    dom.article_mixtures.push_back(std::move(theta));
    dom.article_words.push_back(std::move(words));
  }
}

/// Sequential sampling without replacement, P(a) proportional to
/// exp(scale * affinity(a)) over the articles not yet read.
std::vector<std::size_t> sample_reads(const SynthDomainTruth& dom, ConstSpan interest, const SynthConfig& cfg,
                                      Rng& rng) {
  const std::size_t n = dom.article_mixtures.size();
  Vec logits(n);
  for (std::size_t a = 0; a < n; ++a) logits[a] = cfg.affinity_scale * article_affinity(dom, a, interest);
  const double top = *std::max_element(logits.begin(), logits.end());
  Vec weights(n);
  for (std::size_t a = 0; a < n; ++a) weights[a] = std::exp(logits[a] - top);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> reads;
  for (std::size_t e = 0; e < cfg.events_per_user; ++e) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = unit(rng) * total;
    std::size_t pick = n;
    for (std::size_t a = 0; a < n; ++a) {
      if (weights[a] == 0.0) continue;
      pick = a;
      r -= weights[a];
      if (r < 0.0) break;
    }
    reads.push_back(pick);
    weights[pick] = 0.0;
  }
  return reads;
}

std::string article_text(const SynthDomainTruth& dom, std::size_t a) {
  std::string text;
  for (std::size_t w : dom.article_words[a]) {
    if (!text.empty()) text += ' ';
    text += dom.words[w];
  }
  return text;
}

}  // namespace

SynthCorpus generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus out;
  SynthTruth& truth = out.truth;
  const std::size_t k = cfg.latent_dim;
  const auto shared = static_cast<std::size_t>(
      std::llround(cfg.overlap * static_cast<double>(std::min(cfg.source_vocab, cfg.target_vocab))));

  Rng map_rng = make_rng(cfg.seed, "synth-map");
  if (cfg.map != InterestMap::identity) {
    const double gain = cfg.map == InterestMap::nonlinear ? cfg.map_gain : 1.0;
    truth.map_matrix = gaussian_vector(k * k, gain / std::sqrt(static_cast<double>(k)), map_rng);
    if (cfg.map == InterestMap::nonlinear) truth.map_bias = gaussian_vector(k, 0.5, map_rng);
  }

  truth.source.words = domain_words(Domain::source, cfg.source_vocab, shared);
  truth.target.words = domain_words(Domain::target, cfg.target_vocab, shared);
  Rng topic_rng_s = make_rng(cfg.seed, "synth-topics", 0);
  draw_topics(truth.source, cfg, topic_rng_s);
  if (cfg.identical_topics) {
    truth.target.topic_vectors = truth.source.topic_vectors;
    truth.target.topic_words = truth.source.topic_words;
  } else {
    Rng topic_rng_t = make_rng(cfg.seed, "synth-topics", 1);
    draw_topics(truth.target, cfg, topic_rng_t);
  }
  Rng article_rng_s = make_rng(cfg.seed, "synth-articles", 0);
  Rng article_rng_t = make_rng(cfg.seed, "synth-articles", 1);
  draw_articles(truth.source, cfg, article_rng_s);
  draw_articles(truth.target, cfg, article_rng_t);

  for (Domain d : {Domain::source, Domain::target}) {
    const auto& dom = truth.domain(d);
    for (std::size_t a = 0; a < cfg.articles_per_domain; ++a) {
      out.articles.push_back({synth_article_id(d, a), d, article_text(dom, a)});
    }
  }

  for (std::size_t u = 0; u < cfg.users; ++u) {
    Rng user_rng = make_rng(cfg.seed, "synth-users", u);
    Vec z = gaussian_vector(k, 1.0, user_rng);
    Vec target_interest = apply_interest_map(truth, cfg.map, z);
    const std::string uid = synth_user_id(u);
    std::int64_t ts = 0;
    for (Domain d : {Domain::source, Domain::target}) {
      const Vec& interest = d == Domain::source ? z : target_interest;
      for (std::size_t a : sample_reads(truth.domain(d), interest, cfg, user_rng)) {
        out.events.push_back({uid, synth_article_id(d, a), d, ++ts});
      }
    }
    truth.latents.push_back(std::move(z));
    truth.target_interests.push_back(std::move(target_interest));
  }
  return out;
}

}  // namespace trnews
