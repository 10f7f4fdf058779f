#include "trnews/diagnostics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "trnews/inference.hpp"
#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

namespace trnews {

namespace {

SynthConfig tiny_corpus(std::uint64_t seed) {
  SynthConfig c;
  c.users = 6;
  c.latent_dim = 3;
  c.source_vocab = 30;
  c.target_vocab = 30;
  c.overlap = 0.2;
  c.topics = 3;
  c.articles_per_domain = 20;
  c.min_words = 3;
  c.max_words = 6;
  c.events_per_user = 6;
  c.seed = seed;
  return c;
}

std::vector<std::string> names_of(const ParameterSet& params, bool with_translator, bool with_networks) {
  std::vector<std::string> out;
  for (const auto& [name, _] : params) {
    const bool translator = name.starts_with(kTranslatorPrefix);
    if (translator ? with_translator : with_networks) out.push_back(name);
  }
  return out;
}

/// Moves every parameter off its initial value. Freshly initialised
/// embeddings are so small that many ReLU pre-activations sit within eps of
/// the kink, where central differences are meaningless.
/// The point is redrawn until no ReLU unit of either batch is within
/// `kKinkMargin` of its kink.
constexpr double kKinkMargin = 1e-3;

void perturb(TrNewsModel& model, const Corpus& corpus, std::span<const TrainingExample> target_batch,
             std::span<const TrainingExample> source_batch, std::uint64_t seed) {
  const ParameterSet initial = model.params();
  for (std::uint64_t attempt = 0;; ++attempt) {
    ParameterSet& params = model.params();
    params = initial;
    Rng rng = make_rng(seed, "gradcheck-point", attempt);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (auto& [name, t] : params) {
      for (double& v : t.values()) v += u(rng);
    }
    const double margin = std::min(model.target().relu_margin(params, corpus.articles(), target_batch),
                                   model.source().relu_margin(params, corpus.articles(), source_batch));
    if (margin > kKinkMargin || attempt == 100) return;
  }
}

LossCheck check(std::string name, const LossFn& loss, const ParameterSet& analytic, const ParameterSet& params,
                const std::vector<std::string>& names, const GradientCheckOptions& o) {
  const ParameterSet numeric = finite_difference_gradient(loss, params, o.eps, names);
  LossCheck c{std::move(name), compare_gradients(analytic, numeric, o.floor), false};
  c.passed = c.comparison.max_relative_error < o.tolerance;
  return c;
}

}  // namespace

std::vector<LossCheck> run_gradient_checks(std::uint64_t seed, const GradientCheckOptions& o) {
  const SynthCorpus synth = generate(tiny_corpus(seed));
  const Corpus corpus(synth.articles, synth.events, 1, true);
  const std::size_t L = o.history_length;

  std::vector<UserId> users(corpus.user_count());
  for (UserId u = 0; u < users.size(); ++u) users[u] = u;
  UserSplit split;
  split.train = users;
  Rng rng = make_rng(seed, "gradcheck-examples");
  auto batch_of = [&](Domain d) {
    const auto seqs = visible_sequences(corpus, split, d);
    auto ex = build_domain_examples(corpus, d, seqs, L, 1, rng);
    std::shuffle(ex.begin(), ex.end(), rng);
    ex.resize(std::min(ex.size(), o.batch_size));
    return ex;
  };
  const auto target_batch = batch_of(Domain::target);
  const auto source_batch = batch_of(Domain::source);
  std::vector<PairHistory> pairs;
  for (UserId u : users) {
    pairs.push_back({latest_articles(corpus.history(u, Domain::source), L),
                     latest_articles(corpus.history(u, Domain::target), L)});
  }

  ModelConfig mc;
  mc.dim = o.dim;
  std::vector<LossCheck> out;

  {
    TrNewsModel model(mc, corpus.vocabulary().size(), seed);
    perturb(model, corpus, target_batch, source_batch, seed);
    auto loss = [&](const ParameterSet& p) {
      return training_objective(model, p, corpus, target_batch, source_batch, {}, 0.0, nullptr).total;
    };
    ParameterSet grads = model.params().zeros_like();
    training_objective(model, model.params(), corpus, target_batch, source_batch, {}, 0.0, &grads);
    out.push_back(check("network", loss, grads, model.params(), names_of(model.params(), false, true), o));
  }

  for (auto strategy : {TransferStrategy::linear, TransferStrategy::orthogonal, TransferStrategy::mlp,
                        TransferStrategy::translator}) {
    mc.strategy = strategy;
    TrNewsModel model(mc, corpus.vocabulary().size(), seed);
    perturb(model, corpus, target_batch, source_batch, seed);
    auto loss = [&](const ParameterSet& p) {
      return training_objective(model, p, corpus, {}, {}, pairs, 1.0, nullptr).total;
    };
    ParameterSet grads = model.params().zeros_like();
    training_objective(model, model.params(), corpus, {}, {}, pairs, 1.0, &grads);
    out.push_back(check("translator/" + std::string(to_string(strategy)), loss, grads, model.params(),
                        names_of(model.params(), true, false), o));
  }

  {
    mc.strategy = TransferStrategy::translator;
    TrNewsModel model(mc, corpus.vocabulary().size(), seed);
    perturb(model, corpus, target_batch, source_batch, seed);
    auto loss = [&](const ParameterSet& p) {
      return training_objective(model, p, corpus, target_batch, source_batch, pairs, 1.0, nullptr).total;
    };
    ParameterSet grads = model.params().zeros_like();
    training_objective(model, model.params(), corpus, target_batch, source_batch, pairs, 1.0, &grads);
    out.push_back(check("end_to_end", loss, grads, model.params(), {}, o));
  }
  return out;
}

void write_gradient_checks(std::ostream& out, const std::vector<LossCheck>& checks) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " max_rel=" << std::scientific << std::setprecision(3)
        << c.comparison.max_relative_error << " at " << c.comparison.worst_parameter << '['
        << c.comparison.worst_index << "] analytic=" << c.comparison.worst_analytic
        << " numeric=" << c.comparison.worst_numeric << " (" << c.comparison.compared << " entries)\n";
    out.flags(flags);
  }
  out.precision(precision);
}

}  // namespace trnews
