#include "experiment.hpp"

#include <chrono>

namespace trnews::testing {

SynthConfig transfer_corpus_config(InterestMap map, std::uint64_t seed) {
  SynthConfig c;
  c.users = 500;
  c.latent_dim = 8;
  c.map = map;
  c.seed = seed;
  return c;
}

TrainConfig transfer_train_config(TransferStrategy strategy, std::uint64_t seed) {
  TrainConfig c;
  c.model.dim = 32;
  c.model.strategy = strategy;
  c.history_length = 5;
  c.max_iterations = 20;
  c.patience = 5;
  c.seed = seed;
  return c;
}

Corpus corpus_from(const SynthCorpus& synth, bool shared_vocab) {
  return Corpus(synth.articles, synth.events, 1, shared_vocab);
}

ExperimentOutcome run_transfer_experiment(const SynthConfig& synth, const TrainConfig& train) {
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = corpus_from(generate(synth));
  const UserSplit split = split_users(corpus, 0.9, train.seed);
  TrainResult trained = trnews::train(train, corpus, split);
  auto cases = build_eval_cases(corpus, split.test, train.history_length, train.seed);
  const MetricsReport translated = evaluate(trained.model, corpus, cases, ScoringMode::translated, train.history_length);
  const MetricsReport zero = evaluate(trained.model, corpus, cases, ScoringMode::zero_vector, train.history_length);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ExperimentOutcome{std::move(trained), translated, zero, seconds};
}

}  // namespace trnews::testing
