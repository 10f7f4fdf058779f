#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "trnews/checkpoint.hpp"
#include "trnews/training.hpp"

using namespace trnews;
using trnews::testing::small_corpus;
using trnews::testing::small_train_config;

namespace {

struct World {
  Corpus corpus;
  UserSplit split;
  explicit World(std::uint64_t seed) : corpus(small_corpus(seed)), split(split_users(corpus, 0.9, seed)) {}
};

TrainHooks constant_validation() {
  TrainHooks h;
  h.validation = [](std::size_t, const TrNewsModel&) { return 0.5; };
  return h;
}

TrainHooks rising_validation() {
  TrainHooks h;
  h.validation = [](std::size_t iter, const TrNewsModel&) { return static_cast<double>(iter); };
  return h;
}

}  // namespace

TEST(Batches, CoverEveryIndexOnce) {
  Rng rng = make_rng(1, "b");
  const auto b = make_batches(10, 4, rng);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 4u);
  EXPECT_EQ(b[1].size(), 4u);
  EXPECT_EQ(b[2].size(), 2u);
  std::set<std::size_t> seen;
  for (const auto& batch : b) seen.insert(batch.begin(), batch.end());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_THROW(make_batches(3, 0, rng), std::invalid_argument);
}

TEST(Batches, ShuffleIsUniformOverPermutations) {
  std::map<std::vector<std::size_t>, double> counts;
  const int epochs = 10000;
  for (int e = 0; e < epochs; ++e) {
    Rng rng = make_rng(5, "shuffle-target", static_cast<std::uint64_t>(e));
    counts[make_batches(4, 4, rng)[0]] += 1.0;
  }
  ASSERT_EQ(counts.size(), 24u);
  const double expected = epochs / 24.0;
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 49.73);  // 23 dof, p = 0.001
}

TEST(Examples, EachPositiveGetsNegativesWithSameHistory) {
  const World s(2);
  const auto seqs = visible_sequences(s.corpus, s.split, Domain::target);
  Rng rng = make_rng(2, "neg");
  const auto ex = build_domain_examples(s.corpus, Domain::target, seqs, 3, 2, rng);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    if (ex[i].label == 1) {
      ++positives;
      continue;
    }
    const auto reads = s.corpus.history(ex[i].user, Domain::target).articles();
    EXPECT_EQ(std::count(reads.begin(), reads.end(), ex[i].candidate), 0);
    EXPECT_EQ(s.corpus.article(ex[i].candidate).domain, Domain::target);
  }
  EXPECT_EQ(ex.size(), 3 * positives);
}

TEST(Examples, VisibleSequencesHideTestTargetsAndValidation) {
  const World s(3);
  const auto target = visible_sequences(s.corpus, s.split, Domain::target);
  const auto source = visible_sequences(s.corpus, s.split, Domain::source);
  for (UserId u : s.split.test) {
    EXPECT_TRUE(target[u].empty());
    EXPECT_EQ(source[u], s.corpus.history(u, Domain::source).articles());
  }
  for (const auto& [u, held] : s.split.validation) {
    EXPECT_EQ(target[u].size() + 1, s.corpus.history(u, Domain::target).events.size());
    EXPECT_EQ(std::count(target[u].begin(), target[u].end(), held), 0);
  }
}

TEST(EarlyStopping, FrozenValidationStopsAfterPatience) {
  const World s(1);
  TrainConfig cfg = small_train_config(1);
  cfg.max_iterations = 15;
  cfg.patience = 10;
  std::uint64_t first_hash = 0;
  TrainHooks hooks = constant_validation();
  hooks.on_event = [&](const TrainEvent& e) {
    if (e.kind == TrainEvent::Kind::iteration_end && e.iteration == 1) first_hash = checkpoint_hash(e.model.params());
  };
  const TrainResult r = fit(cfg, s.corpus, s.split, hooks);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.iterations_run, 11u);
  EXPECT_EQ(r.log.size(), 11u);
  EXPECT_EQ(r.best_iteration, 1u);
  EXPECT_EQ(checkpoint_hash(r.model.params()), first_hash);
}

TEST(EarlyStopping, ImprovingValidationRunsEveryIteration) {
  const World s(1);
  TrainConfig cfg = small_train_config(1);
  cfg.max_iterations = 5;
  cfg.patience = 2;
  const TrainResult r = fit(cfg, s.corpus, s.split, rising_validation());
  EXPECT_FALSE(r.stopped_early);
  EXPECT_EQ(r.iterations_run, 5u);
  EXPECT_EQ(r.best_iteration, 5u);
}

TEST(Isolation, TranslatorStepsLeaveNetworksUnchanged) {
  const World s(4);
  for (TrainingMode mode : {TrainingMode::alternating, TrainingMode::separated}) {
    TrainConfig cfg = small_train_config(4);
    cfg.mode = mode;
    std::uint64_t before = 0;
    std::size_t checked = 0;
    TrainHooks hooks = rising_validation();
    hooks.on_event = [&](const TrainEvent& e) {
      if (e.kind == TrainEvent::Kind::translator_begin) before = e.model.network_hash();
      if (e.kind == TrainEvent::Kind::translator_end) {
        EXPECT_EQ(e.model.network_hash(), before) << to_string(mode) << " iteration " << e.iteration;
        ++checked;
      }
    };
    const TrainResult r = train(cfg, s.corpus, s.split, hooks);
    EXPECT_EQ(checked, mode == TrainingMode::alternating ? r.iterations_run : 1u);
  }
}

TEST(Schedule, AlternatingRegeneratesPairsEveryIteration) {
  const World s(5);
  const TrainResult r = fit(small_train_config(5), s.corpus, s.split, rising_validation());
  EXPECT_EQ(r.pair_generations, r.iterations_run);
  EXPECT_EQ(r.translator_passes, r.iterations_run);
  for (const auto& row : r.log) EXPECT_GT(row.loss_translator, 0.0);
}

TEST(Schedule, SeparatedGeneratesPairsOnce) {
  const World s(5);
  const TrainResult r = fit_separated(small_train_config(5), s.corpus, s.split, rising_validation());
  EXPECT_EQ(r.pair_generations, 1u);
  EXPECT_EQ(r.translator_passes, r.iterations_run);
}

TEST(Schedule, TranslatorEpochReducesPairLossInSeparatedMode) {
  const World s(6);
  TrainConfig cfg = small_train_config(6);
  cfg.max_iterations = 6;
  const TrainResult r = fit_separated(cfg, s.corpus, s.split, rising_validation());
  EXPECT_LT(r.log.back().loss_translator, r.log.front().loss_translator);
}

TEST(EndToEnd, ZeroWeightMatchesTwoStageNetworks) {
  const World s(7);
  TrainConfig cfg = small_train_config(7);
  cfg.end_to_end_weight = 0.0;
  const TrainResult two_stage = fit(cfg, s.corpus, s.split, rising_validation());
  const TrainResult e2e = fit_end_to_end(cfg, s.corpus, s.split, rising_validation());
  EXPECT_EQ(checkpoint_hash(two_stage.model.network_parameters()), checkpoint_hash(e2e.model.network_parameters()));
}

TEST(EndToEnd, TranslatorTermChangesNetworks) {
  const World s(7);
  TrainConfig cfg = small_train_config(7);
  cfg.max_iterations = 2;
  cfg.end_to_end_weight = 1.0;
  const TrainResult two_stage = fit(cfg, s.corpus, s.split, rising_validation());
  const TrainResult e2e = fit_end_to_end(cfg, s.corpus, s.split, rising_validation());
  EXPECT_NE(checkpoint_hash(two_stage.model.network_parameters()), checkpoint_hash(e2e.model.network_parameters()));
  EXPECT_GT(e2e.log.back().loss_translator, 0.0);
}

TEST(Objective, TotalCombinesNormalisedTerms) {
  const World s(8);
  const TrainConfig cfg = small_train_config(8);
  const TrNewsModel model(cfg.model, s.corpus.vocabulary().size(), 8);
  Rng rng = make_rng(8, "obj");
  const auto t = build_domain_examples(s.corpus, Domain::target, visible_sequences(s.corpus, s.split, Domain::target),
                                       3, 1, rng);
  const auto src = build_domain_examples(s.corpus, Domain::source,
                                         visible_sequences(s.corpus, s.split, Domain::source), 3, 1, rng);
  const std::span<const TrainingExample> tb(t.data(), 10);
  const std::span<const TrainingExample> sb(src.data(), 7);
  std::vector<PairHistory> pairs;
  for (UserId u : {s.split.train[0], s.split.train[1]}) {
    pairs.push_back({s.corpus.history(u, Domain::source).articles(), s.corpus.history(u, Domain::target).articles()});
  }
  const ObjectiveValue v = training_objective(model, model.params(), s.corpus, tb, sb, pairs, 0.25, nullptr);
  EXPECT_NEAR(v.target_sum, model.target().batch_loss(model.params(), s.corpus.articles(), tb, nullptr), 1e-12);
  EXPECT_NEAR(v.source_sum, model.source().batch_loss(model.params(), s.corpus.articles(), sb, nullptr), 1e-12);
  EXPECT_NEAR(v.total, v.target_sum / 10 + v.source_sum / 7 + 0.25 * v.translator_mean, 1e-12);
  const ObjectiveValue no_pairs = training_objective(model, model.params(), s.corpus, tb, sb, {}, 0.25, nullptr);
  EXPECT_EQ(no_pairs.translator_mean, 0.0);
}

TEST(Training, LossDecreasesOverFiveIterations) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const World s(seed);
    TrainConfig cfg = small_train_config(seed);
    cfg.max_iterations = 5;
    const TrainResult r = fit(cfg, s.corpus, s.split, rising_validation());
    ASSERT_EQ(r.log.size(), 5u);
    EXPECT_LT(r.log.back().loss_target, r.log.front().loss_target) << "seed " << seed;
    EXPECT_LT(r.log.back().loss_source, r.log.front().loss_source) << "seed " << seed;
  }
}

TEST(Training, DeterministicForSeed) {
  const World s(9);
  const TrainConfig cfg = small_train_config(9);
  const TrainResult a = fit(cfg, s.corpus, s.split);
  const TrainResult b = fit(cfg, s.corpus, s.split);
  EXPECT_EQ(checkpoint_hash(a.model.params()), checkpoint_hash(b.model.params()));
  EXPECT_EQ(a.best_iteration, b.best_iteration);
}

TEST(Training, SharedUserFractionSubsamplesOnce) {
  const World s(10);
  TrainConfig cfg = small_train_config(10);
  cfg.max_iterations = 2;
  cfg.patience = 1;
  const TrainResult all = fit(cfg, s.corpus, s.split, rising_validation());
  cfg.shared_user_fraction = 0.5;
  const TrainResult half = fit(cfg, s.corpus, s.split, rising_validation());
  EXPECT_EQ(half.translator_users.size(),
            static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(all.translator_users.size()))));
  for (UserId u : half.translator_users) {
    EXPECT_TRUE(std::binary_search(all.translator_users.begin(), all.translator_users.end(), u));
  }
}

TEST(Training, WarnsWhenNoSharedTrainingUsers) {
  const SynthCorpus synth = generate(trnews::testing::small_synth_config(11));
  const Corpus full(synth.articles, synth.events, 1, true);
  const UserSplit split = split_users(full, 0.9, 11);
  std::set<std::string> test_ids;
  for (UserId u : split.test) test_ids.insert(full.user_id(u));
  std::vector<EventRecord> events;
  for (const auto& e : synth.events) {
    if (e.domain == Domain::target || test_ids.count(e.user)) events.push_back(e);
  }
  const Corpus corpus(synth.articles, events, 1, true);
  TrainConfig cfg = small_train_config(11);
  cfg.max_iterations = 1;
  cfg.patience = 1;
  const UserSplit split2 = split_users(corpus, 0.9, 11);
  ASSERT_EQ(split2.test, split.test);
  const TrainResult r = fit(cfg, corpus, split2, rising_validation());
  EXPECT_FALSE(r.transfer_enabled);
  EXPECT_TRUE(r.translator_users.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("no shared training users"), std::string::npos);
  EXPECT_EQ(r.translator_passes, 0u);
}

TEST(Training, ModesRoundTrip) {
  for (auto m : {TrainingMode::alternating, TrainingMode::separated, TrainingMode::end_to_end}) {
    EXPECT_EQ(parse_training_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_training_mode("joint"), std::invalid_argument);
  TrainConfig bad = small_train_config(1);
  bad.patience = bad.max_iterations + 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
