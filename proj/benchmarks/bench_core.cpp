#include <benchmark/benchmark.h>

#include <random>

#include "trnews/adam.hpp"
#include "trnews/evaluation.hpp"
#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

using namespace trnews;

namespace {

struct World {
  Corpus corpus;
  UserSplit split;
  TrNewsModel model;
  std::vector<TrainingExample> examples;

  explicit World(std::size_t dim)
      : corpus(make_corpus()),
        split(split_users(corpus, 0.9, 1)),
        model(model_config(dim), corpus.vocabulary().size(), 1) {
    Rng rng = make_rng(1, "bench");
    examples = build_domain_examples(corpus, Domain::target, visible_sequences(corpus, split, Domain::target), 10, 1,
                                     rng);
  }

  static Corpus make_corpus() {
    SynthConfig s;
    s.users = 200;
    const SynthCorpus synth = generate(s);
    return Corpus(synth.articles, synth.events, 1, true);
  }

  static ModelConfig model_config(std::size_t dim) {
    ModelConfig m;
    m.dim = dim;
    return m;
  }
};

void BM_BatchLossForward(benchmark::State& state) {
  const World w(static_cast<std::size_t>(state.range(0)));
  const std::span<const TrainingExample> batch(w.examples.data(), 256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(w.model.target().batch_loss(w.model.params(), w.corpus.articles(), batch, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_BatchLossForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BatchLossBackward(benchmark::State& state) {
  const World w(static_cast<std::size_t>(state.range(0)));
  const std::span<const TrainingExample> batch(w.examples.data(), 256);
  ParameterSet grads = w.model.params().zeros_like();
  for (auto _ : state) {
    w.model.target().batch_loss(w.model.params(), w.corpus.articles(), batch, &grads);
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_BatchLossBackward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TranslatorLoss(benchmark::State& state) {
  TranslatorShape shape;
  shape.source_dim = 128;
  shape.target_dim = 128;
  const Translator t(TransferStrategy::translator, shape);
  ParameterSet params;
  Rng rng = make_rng(2, "bench");
  t.add_parameters(params, rng);
  std::normal_distribution<double> normal(0.0, 0.1);
  std::vector<TranslatorPair> pairs(256, {Vec(128), Vec(128)});
  for (auto& p : pairs) {
    for (auto& x : p.source) x = normal(rng);
    for (auto& x : p.target) x = normal(rng);
  }
  ParameterSet grads = params.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(t.loss(params, pairs, &grads));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TranslatorLoss)->Unit(benchmark::kMillisecond);

void BM_RankMetrics(benchmark::State& state) {
  Rng rng = make_rng(3, "bench");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EvalCase> cases(1000);
  for (auto& c : cases) {
    c.positive = 0;
    for (ArticleId a = 1; a < 100; ++a) c.negatives.push_back(a);
    for (int i = 0; i < 100; ++i) c.scores.push_back(unit(rng));
  }
  for (auto _ : state) {
    std::vector<CaseMetrics> m;
    m.reserve(cases.size());
    for (const auto& c : cases) m.push_back(rank_metrics(c));
    benchmark::DoNotOptimize(aggregate(m));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RankMetrics);

void BM_AdamStep(benchmark::State& state) {
  const World w(128);
  ParameterSet params = w.model.params();
  ParameterSet grads = params.zeros_like();
  for (auto& [name, t] : grads) t.fill(1e-3);
  AdamState adam;
  for (auto _ : state) adam_step(params, grads, adam);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(params.scalar_count()));
}
BENCHMARK(BM_AdamStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
