#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "trnews/synthetic.hpp"

using namespace trnews;

namespace {

std::set<std::string> words_of(const SynthCorpus& c, Domain d) {
  std::set<std::string> out;
  for (const auto& a : c.articles) {
    if (a.domain != d) continue;
    std::istringstream in(a.text);
    std::string w;
    while (in >> w) out.insert(w);
  }
  return out;
}

// Fraction of (read, unread) target pairs ordered correctly by the affinity
// under `interest`.
double read_auc(const SynthCorpus& c, std::size_t user, ConstSpan interest) {
  const auto& dom = c.truth.target;
  const std::string uid = synth_user_id(user);
  std::set<std::size_t> read;
  for (const auto& e : c.events) {
    if (e.user == uid && e.domain == Domain::target) read.insert(std::stoul(e.news.substr(1)));
  }
  double good = 0.0;
  double total = 0.0;
  for (std::size_t r : read) {
    const double ar = article_affinity(dom, r, interest);
    for (std::size_t a = 0; a < dom.article_mixtures.size(); ++a) {
      if (read.count(a)) continue;
      const double aa = article_affinity(dom, a, interest);
      good += ar > aa ? 1.0 : (ar == aa ? 0.5 : 0.0);
      total += 1.0;
    }
  }
  return good / total;
}

}  // namespace

TEST(Synthetic, DeterministicForSeed) {
  const auto a = generate(trnews::testing::small_synth_config(3));
  const auto b = generate(trnews::testing::small_synth_config(3));
  const auto c = generate(trnews::testing::small_synth_config(4));
  std::ostringstream ea, eb, ec, na, nb;
  write_events(ea, a.events);
  write_events(eb, b.events);
  write_events(ec, c.events);
  write_news(na, a.articles);
  write_news(nb, b.articles);
  EXPECT_EQ(ea.str(), eb.str());
  EXPECT_EQ(na.str(), nb.str());
  EXPECT_NE(ea.str(), ec.str());
}

TEST(Synthetic, OverlapControlsSharedVocabulary) {
  SynthConfig cfg = trnews::testing::small_synth_config(2);
  cfg.overlap = 0.0;
  const auto disjoint = generate(cfg);
  const auto s = words_of(disjoint, Domain::source);
  const auto t = words_of(disjoint, Domain::target);
  for (const auto& w : s) EXPECT_EQ(t.count(w), 0u) << w;

  cfg.overlap = 1.0;
  const auto shared = generate(cfg);
  const auto s2 = words_of(shared, Domain::source);
  std::size_t common = 0;
  for (const auto& w : words_of(shared, Domain::target)) common += s2.count(w);
  EXPECT_GT(common, 10u);
}

TEST(Synthetic, EveryUserReadsInBothDomainsWithoutRepeats) {
  const SynthConfig cfg = trnews::testing::small_synth_config(5);
  const auto c = generate(cfg);
  std::map<std::string, std::map<Domain, std::set<std::string>>> reads;
  std::map<std::string, std::int64_t> last_ts;
  for (const auto& e : c.events) {
    EXPECT_TRUE(reads[e.user][e.domain].insert(e.news).second);
    EXPECT_GT(e.timestamp, last_ts[e.user]);
    last_ts[e.user] = e.timestamp;
    EXPECT_EQ(e.news[0], domain_code(e.domain));
  }
  ASSERT_EQ(reads.size(), cfg.users);
  for (const auto& [user, by_domain] : reads) {
    EXPECT_EQ(by_domain.at(Domain::source).size(), cfg.events_per_user);
    EXPECT_EQ(by_domain.at(Domain::target).size(), cfg.events_per_user);
  }
  const Corpus corpus(c.articles, c.events, 1, true);
  EXPECT_EQ(corpus.shared_users().size(), cfg.users);
}

TEST(Synthetic, WordFrequenciesFollowTopicDistribution) {
  SynthConfig cfg = trnews::testing::small_synth_config(7);
  cfg.topics = 1;
  cfg.source_vocab = 10;
  cfg.target_vocab = 10;
  cfg.articles_per_domain = 400;
  cfg.min_words = 16;
  cfg.max_words = 16;
  cfg.topic_concentration = 0.5;
  const auto c = generate(cfg);
  const auto& dom = c.truth.source;
  std::vector<double> counts(10, 0.0);
  double total = 0.0;
  for (const auto& words : dom.article_words) {
    for (std::size_t w : words) {
      counts[w] += 1.0;
      total += 1.0;
    }
  }
  double chi2 = 0.0;
  for (std::size_t w = 0; w < 10; ++w) {
    const double expected = total * dom.topic_words[0][w];
    chi2 += (counts[w] - expected) * (counts[w] - expected) / expected;
  }
  EXPECT_LT(chi2, 27.88);  // 9 dof, p = 0.001
}

TEST(Synthetic, IdentityMapKeepsInterests) {
  SynthConfig cfg = trnews::testing::small_synth_config(1);
  cfg.map = InterestMap::identity;
  const auto c = generate(cfg);
  EXPECT_EQ(c.truth.latents, c.truth.target_interests);
}

TEST(Synthetic, TargetReadsFollowMappedInterest) {
  SynthConfig cfg = trnews::testing::small_synth_config(9);
  cfg.users = 100;
  cfg.latent_dim = 6;
  cfg.map = InterestMap::nonlinear;
  const auto c = generate(cfg);
  double mapped = 0.0;
  double raw = 0.0;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    mapped += read_auc(c, u, c.truth.target_interests[u]);
    raw += read_auc(c, u, c.truth.latents[u]);
  }
  mapped /= static_cast<double>(cfg.users);
  raw /= static_cast<double>(cfg.users);
  EXPECT_GT(mapped, 0.7);
  EXPECT_GT(mapped, raw + 0.1);
}

TEST(Synthetic, ValidationRejectsBadSettings) {
  SynthConfig cfg = trnews::testing::small_synth_config(1);
  cfg.events_per_user = cfg.articles_per_domain + 1;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = trnews::testing::small_synth_config(1);
  cfg.overlap = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = trnews::testing::small_synth_config(1);
  cfg.identical_topics = true;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_interest_map("linear"), InterestMap::linear);
  EXPECT_THROW(parse_interest_map("quadratic"), std::invalid_argument);
}
