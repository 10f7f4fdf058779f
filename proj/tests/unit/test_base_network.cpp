#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "trnews/base_network.hpp"
#include "trnews/gradcheck.hpp"

using namespace trnews;

namespace {

struct Fixture {
  std::vector<NewsArticle> articles;
  ParameterSet params;
  BaseNetwork target{"target.", NetworkShape{4, 0, {6, 3}}};
  BaseNetwork source{"source.", NetworkShape{4, 0, {6, 3}}};

  explicit Fixture(std::uint64_t seed) {
    Rng rng = make_rng(seed, "fixture");
    add_embedding(params, 12, 4, rng);
    target.add_parameters(params, rng);
    source.add_parameters(params, rng);
    std::uniform_int_distribution<WordId> word(2, 11);
    for (std::size_t a = 0; a < 8; ++a) {
      NewsArticle n;
      n.id = "A" + std::to_string(a);
      n.domain = a < 4 ? Domain::source : Domain::target;
      for (int i = 0; i < 3; ++i) n.tokens.push_back(word(rng));
      articles.push_back(n);
    }
    // Move away from the near-zero init so no ReLU sits on its kink.
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (auto& [name, t] : params) {
      for (double& v : t.values()) v += jitter(rng);
    }
    params.get(kEmbeddingName).row(kPadId)[0] = 0.0;
  }
};

std::vector<TrainingExample> batch(Domain d, std::size_t offset) {
  return {{0, d, {offset + 0, offset + 1}, offset + 2, 1},
          {1, d, {offset + 1}, offset + 3, 0},
          {2, d, {offset + 0, offset + 2, offset + 3}, offset + 1, 1}};
}

}  // namespace

TEST(NewsEncoder, MeanOfWordEmbeddings) {
  ParameterSet p;
  p.add(kEmbeddingName, Tensor::matrix(4, 2, {0, 0, 0, 0, 1, 2, 3, 6}));
  const std::vector<WordId> toks{2, 3, 3};
  const Vec r = news_encode(p, toks);
  EXPECT_DOUBLE_EQ(r[0], 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(r[1], 14.0 / 3.0);
  ParameterSet g = p.zeros_like();
  news_encode_backward(toks, Vec{3.0, 0.0}, g);
  EXPECT_DOUBLE_EQ(g.get(kEmbeddingName).at(3, 0), 2.0);
  EXPECT_DOUBLE_EQ(g.get(kEmbeddingName).at(2, 0), 1.0);
}

TEST(NewsEncoder, PaddingRowStartsAtZero) {
  ParameterSet p;
  Rng rng = make_rng(1, "init");
  add_embedding(p, 20, 5, rng);
  for (double v : p.get(kEmbeddingName).row(kPadId)) EXPECT_EQ(v, 0.0);
  for (double v : p.get(kEmbeddingName).values()) EXPECT_LE(std::abs(v), 0.05);
}

TEST(CrossEntropy, ClampsAndValidatesLabels) {
  EXPECT_NEAR(binary_cross_entropy(0.0, 1), -std::log(kPredictionClamp), 1e-9);
  EXPECT_NEAR(binary_cross_entropy(1.0, 0), -std::log(kPredictionClamp), 1e-4);
  EXPECT_DOUBLE_EQ(binary_cross_entropy(0.25, 1), -std::log(0.25));
  EXPECT_THROW(binary_cross_entropy(0.5, 2), std::invalid_argument);
}

TEST(Attention, WeightsFormDistributionAndEncodeIsWeightedSum) {
  Fixture f(3);
  std::vector<Vec> hist;
  for (ArticleId a : {4, 5, 6}) hist.push_back(news_encode(f.params, f.articles[a].tokens));
  const Vec cand = news_encode(f.params, f.articles[7].tokens);
  const Vec w = f.target.attention_weights(f.params, hist, cand);
  double s = 0.0;
  for (double x : w) {
    EXPECT_GT(x, 0.0);
    s += x;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  const Vec u = f.target.user_encode(f.params, hist, cand);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(u[i], w[0] * hist[0][i] + w[1] * hist[1][i] + w[2] * hist[2][i], 1e-12);
  }
  EXPECT_THROW(f.target.user_encode(f.params, {}, cand), std::invalid_argument);
}

TEST(BaseNetwork, BatchLossIsSumOfPerExampleCrossEntropy) {
  Fixture f(4);
  const auto b = batch(Domain::target, 4);
  double expect = 0.0;
  for (const auto& ex : b) {
    expect += binary_cross_entropy(f.target.score(f.params, f.articles, ex.history, ex.candidate), ex.label);
  }
  EXPECT_NEAR(f.target.batch_loss(f.params, f.articles, b, nullptr), expect, 1e-12);
}

TEST(BaseNetwork, GradientsMatchFiniteDifferences) {
  Fixture f(5);
  const auto b = batch(Domain::target, 4);
  ASSERT_GT(f.target.relu_margin(f.params, f.articles, b), 1e-3);
  ParameterSet g = f.params.zeros_like();
  f.target.batch_loss(f.params, f.articles, b, &g, 0.5);
  const auto numeric = finite_difference_gradient(
      [&](const ParameterSet& p) { return 0.5 * f.target.batch_loss(p, f.articles, b, nullptr); }, f.params);
  EXPECT_LT(compare_gradients(g, numeric, 1e-6).max_relative_error, 1e-5);
}

TEST(BaseNetwork, DomainsShareOnlyTheEmbedding) {
  Fixture f(6);
  ParameterSet g = f.params.zeros_like();
  joint_loss(f.params, f.articles, f.target, batch(Domain::target, 4), f.source, batch(Domain::source, 0), &g);
  ParameterSet only_t = f.params.zeros_like();
  f.target.batch_loss(f.params, f.articles, batch(Domain::target, 4), &only_t);
  for (const auto& name : f.source.parameter_names()) {
    for (double v : only_t.get(name).values()) EXPECT_EQ(v, 0.0) << name;
  }
  const double sum = f.target.batch_loss(f.params, f.articles, batch(Domain::target, 4), nullptr) +
                     f.source.batch_loss(f.params, f.articles, batch(Domain::source, 0), nullptr);
  EXPECT_NEAR(joint_loss(f.params, f.articles, f.target, batch(Domain::target, 4), f.source,
                         batch(Domain::source, 0)),
              sum, 1e-12);
}

TEST(BaseNetwork, ParameterNamesCarryPrefix) {
  BaseNetwork n("target.", NetworkShape{8, 0, {80, 40}});
  const auto names = n.parameter_names();
  EXPECT_EQ(names.size(), 10u);
  for (const auto& name : names) EXPECT_EQ(name.rfind("target.", 0), 0u) << name;
}
