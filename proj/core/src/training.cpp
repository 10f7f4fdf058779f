#include "trnews/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <unordered_set>

#include "trnews/evaluation.hpp"
#include "trnews/inference.hpp"

namespace trnews {

std::string_view to_string(TrainingMode m) {
  switch (m) {
    case TrainingMode::alternating:
      return "alternating";
    case TrainingMode::separated:
      return "separated";
    case TrainingMode::end_to_end:
      return "end_to_end";
  }
  return "unknown";
}

TrainingMode parse_training_mode(std::string_view name) {
  for (auto m : {TrainingMode::alternating, TrainingMode::separated, TrainingMode::end_to_end}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown training mode '" + std::string(name) +
                              "' (expected alternating|separated|end_to_end)");
}

void TrainConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(batch_size, "train.batch_size");
  positive(max_iterations, "train.max_iterations");
  positive(patience, "train.patience");
  positive(history_length, "train.history_length");
  positive(negatives_per_positive, "train.negative_ratio");
  positive(model.dim, "model.dim");
  if (patience > max_iterations) throw std::invalid_argument("train.patience exceeds train.max_iterations");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("train.lr must be positive");
  if (!(shared_user_fraction > 0.0 && shared_user_fraction <= 1.0)) {
    throw std::invalid_argument("transfer.shared_user_fraction must lie in (0, 1]");
  }
  if (!(end_to_end_weight >= 0.0)) throw std::invalid_argument("transfer.e2e_weight must be non-negative");
  for (std::size_t h : model.cf_hidden) positive(h, "model.cf_hidden");
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void write_training_log(std::ostream& out, std::span<const IterationLog> log) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(8);
  for (const auto& row : log) {
    out << row.iteration << '\t' << row.loss_target << '\t' << row.loss_source << '\t' << row.loss_translator << '\t'
        << row.validation_auc << '\t' << std::fixed << std::setprecision(3) << row.seconds << '\n';
    out.flags(flags);
    out << std::setprecision(8);
  }
  out.flags(flags);
  out.precision(precision);
}

std::vector<std::vector<ArticleId>> visible_sequences(const Corpus& corpus, const UserSplit& split, Domain domain) {
  std::vector<std::vector<ArticleId>> seqs(corpus.user_count());
  if (domain == Domain::source) {
    for (UserId u = 0; u < corpus.user_count(); ++u) seqs[u] = corpus.history(u, Domain::source).articles();
    return seqs;
  }
  for (UserId u : split.train) {
    seqs[u] = corpus.history(u, Domain::target).articles();
    if (split.validation.count(u) && !seqs[u].empty()) seqs[u].pop_back();
  }
  return seqs;
}

std::vector<TrainingExample> build_domain_examples(const Corpus& corpus, Domain domain,
                                                   std::span<const std::vector<ArticleId>> sequences,
                                                   std::size_t history_length, std::size_t negatives_per_positive,
                                                   Rng& rng) {
  std::vector<TrainingExample> out;
  const auto& pool = corpus.domain_articles(domain);
  for (UserId u = 0; u < sequences.size(); ++u) {
    auto positives = generate_positive_examples(u, domain, sequences[u], history_length);
    if (positives.empty()) continue;
    std::unordered_set<ArticleId> seen;
    for (const auto& e : corpus.history(u, domain).events) seen.insert(e.article);
    for (auto& p : positives) {
      for (std::size_t k = 0; k < negatives_per_positive; ++k) {
        TrainingExample neg = p;
        neg.candidate = sample_negative(pool, seen, rng);
        neg.label = 0;
        out.push_back(std::move(neg));
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

ObjectiveValue training_objective(const TrNewsModel& model, const ParameterSet& params, const Corpus& corpus,
                                  std::span<const TrainingExample> target_batch,
                                  std::span<const TrainingExample> source_batch, std::span<const PairHistory> pairs,
                                  double translator_weight, ParameterSet* grads) {
  const auto& articles = corpus.articles();
  ObjectiveValue v;
  if (!target_batch.empty()) {
    const double scale = 1.0 / static_cast<double>(target_batch.size());
    v.target_sum = model.target().batch_loss(params, articles, target_batch, grads, scale);
    v.total += v.target_sum * scale;
  }
  if (!source_batch.empty()) {
    const double scale = 1.0 / static_cast<double>(source_batch.size());
    v.source_sum = model.source().batch_loss(params, articles, source_batch, grads, scale);
    v.total += v.source_sum * scale;
  }
  if (pairs.empty() || translator_weight == 0.0) return v;

  std::vector<TranslatorPair> reps;
  reps.reserve(pairs.size());
  for (const auto& p : pairs) {
    reps.push_back({unconditioned_representation(params, corpus, p.source),
                    unconditioned_representation(params, corpus, p.target)});
  }
  std::vector<Vec> d_src;
  std::vector<Vec> d_tgt;
  v.translator_mean = model.translator().loss(params, reps, grads, translator_weight, grads ? &d_src : nullptr,
                                              grads ? &d_tgt : nullptr);
  v.total += translator_weight * v.translator_mean;
  if (!grads) return v;
  auto route = [&](const std::vector<ArticleId>& hist, const Vec& d_user) {
    Vec d_news(d_user.size());
    const double inv = 1.0 / static_cast<double>(hist.size());
    for (std::size_t k = 0; k < d_user.size(); ++k) d_news[k] = d_user[k] * inv;
    for (ArticleId a : hist) news_encode_backward(corpus.article(a).tokens, d_news, *grads);
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    route(pairs[i].source, d_src[i]);
    route(pairs[i].target, d_tgt[i]);
  }
  return v;
}

namespace {

using Clock = std::chrono::steady_clock;

ParameterSet zero_grads(const ParameterSet& params, std::initializer_list<std::string> prefixes) {
  ParameterSet g;
  for (const auto& [name, t] : params) {
    for (const auto& p : prefixes) {
      if (name.starts_with(p)) {
        g.add(name, Tensor(t.dims()));
        break;
      }
    }
  }
  return g;
}

void require_finite(double v, const char* what, std::size_t iteration) {
  if (!std::isfinite(v)) {
    throw TrainingError(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration));
  }
}

/// Shared machinery of the three training procedures.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const Corpus& corpus, const UserSplit& split, const TrainHooks& hooks)
      : config_(config),
        corpus_(corpus),
        split_(split),
        hooks_(hooks),
        model_(config.model, corpus.vocabulary().size(), config.seed) {
    config_.validate();
    for (Domain d : {Domain::source, Domain::target}) sequences_[index_of(d)] = visible_sequences(corpus, split, d);

    for (UserId u : split.train) {
      if (!sequences_[index_of(Domain::target)][u].empty() && !corpus.history(u, Domain::source).empty()) {
        translator_users_.push_back(u);
      }
    }
    if (config_.shared_user_fraction < 1.0 && !translator_users_.empty()) {
      Rng rng = make_rng(config_.seed, "shared-users");
      std::shuffle(translator_users_.begin(), translator_users_.end(), rng);
      auto keep = static_cast<std::size_t>(
          std::llround(config_.shared_user_fraction * static_cast<double>(translator_users_.size())));
      translator_users_.resize(std::max<std::size_t>(1, keep));
      std::sort(translator_users_.begin(), translator_users_.end());
    }
    if (translator_users_.empty()) {
      transfer_enabled_ = false;
      warnings_.push_back("no shared training users: translator training disabled");
      std::cerr << "warning: " << warnings_.back() << '\n';
    }
    if (!hooks_.validation) {
      validation_cases_ = build_validation_cases(corpus, split, config_.history_length, config_.seed,
                                                 config_.validation_negatives);
    }

    grads_both_ = zero_grads(model_.params(), {kEmbeddingName, kSourcePrefix, kTargetPrefix});
    grads_translator_ = zero_grads(model_.params(), {kTranslatorPrefix});
    grads_all_ = model_.params().zeros_like();
  }

  TrainResult run_alternating() {
    return run_network_loop([&](std::size_t iter, IterationLog& row) {
      if (!transfer_enabled_) return;
      emit(TrainEvent::Kind::translator_begin, iter);
      const auto pairs = make_pairs();
      ++pair_generations_;
      row.loss_translator = translator_epoch(pairs, iter);
      ++translator_passes_;
      emit(TrainEvent::Kind::translator_end, iter);
    });
  }

  TrainResult run_separated() {
    TrainResult result = run_network_loop([](std::size_t, IterationLog&) {});
    if (!transfer_enabled_) return result;
    // Networks are final; train the translator on one fixed set of pairs.
    model_.params() = result.model.params();
    emit(TrainEvent::Kind::translator_begin, result.iterations_run);
    const auto pairs = make_pairs();
    ++pair_generations_;
    for (std::size_t epoch = 1; epoch <= result.iterations_run; ++epoch) {
      result.log[epoch - 1].loss_translator = translator_epoch(pairs, epoch);
      ++translator_passes_;
    }
    emit(TrainEvent::Kind::translator_end, result.iterations_run);
    result.model.params() = model_.params();
    result.pair_generations = pair_generations_;
    result.translator_passes = translator_passes_;
    return result;
  }

  TrainResult run_end_to_end() {
    end_to_end_ = true;
    return run_network_loop([](std::size_t, IterationLog&) {});
  }

 private:
  template <typename AfterEpoch>
  TrainResult run_network_loop(AfterEpoch after_epoch) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_iter = 0;
    ParameterSet best_params = model_.params();
    std::vector<IterationLog> log;
    bool stopped = false;
    std::size_t iter = 0;
    for (iter = 1; iter <= config_.max_iterations; ++iter) {
      const auto start = Clock::now();
      IterationLog row;
      row.iteration = iter;
      network_epoch(iter, row);
      after_epoch(iter, row);
      row.validation_auc = validate(iter);
      row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      log.push_back(row);
      if (row.validation_auc > best) {
        best = row.validation_auc;
        best_iter = iter;
        best_params = model_.params();
      }
      emit(TrainEvent::Kind::iteration_end, iter);
      if (iter - best_iter >= config_.patience) {
        stopped = true;
        break;
      }
    }
    const std::size_t ran = std::min(iter, config_.max_iterations);

    return TrainResult{.model = TrNewsModel(config_.model, best_params),
                       .log = std::move(log),
                       .best_iteration = best_iter,
                       .best_validation = best,
                       .iterations_run = ran,
                       .stopped_early = stopped,
                       .transfer_enabled = transfer_enabled_,
                       .pair_generations = pair_generations_,
                       .translator_passes = translator_passes_,
                       .translator_users = translator_users_,
                       .warnings = warnings_};
  }

  void emit(TrainEvent::Kind kind, std::size_t iter) const {
    if (hooks_.on_event) hooks_.on_event(TrainEvent{kind, iter, model_});
  }

  void network_epoch(std::size_t epoch, IterationLog& row) {
    Rng neg_t = make_rng(config_.seed, "negatives-target", epoch);
    Rng neg_s = make_rng(config_.seed, "negatives-source", epoch);
    const auto target = build_domain_examples(corpus_, Domain::target, sequences_[index_of(Domain::target)],
                                              config_.history_length, config_.negatives_per_positive, neg_t);
    const auto source = build_domain_examples(corpus_, Domain::source, sequences_[index_of(Domain::source)],
                                              config_.history_length, config_.negatives_per_positive, neg_s);
    Rng shuffle_t = make_rng(config_.seed, "shuffle-target", epoch);
    Rng shuffle_s = make_rng(config_.seed, "shuffle-source", epoch);
    const auto batches_t = make_batches(target.size(), config_.batch_size, shuffle_t);
    const auto batches_s = make_batches(source.size(), config_.batch_size, shuffle_s);

    std::vector<std::vector<std::size_t>> pair_batches;
    if (end_to_end_ && transfer_enabled_ && config_.end_to_end_weight > 0.0) {
      Rng pair_rng = make_rng(config_.seed, "e2e-pairs", epoch);
      pair_batches = make_batches(translator_users_.size(), config_.batch_size, pair_rng);
    }

    double sum_t = 0.0;
    double sum_s = 0.0;
    double sum_f = 0.0;
    std::size_t pair_count = 0;
    std::vector<TrainingExample> bt;
    std::vector<TrainingExample> bs;
    std::vector<PairHistory> pairs;
    const std::size_t steps = std::max(batches_t.size(), batches_s.size());
    for (std::size_t step = 0; step < steps; ++step) {
      bt.clear();
      bs.clear();
      pairs.clear();
      if (step < batches_t.size()) {
        for (std::size_t i : batches_t[step]) bt.push_back(target[i]);
      }
      if (step < batches_s.size()) {
        for (std::size_t i : batches_s[step]) bs.push_back(source[i]);
      }
      if (!pair_batches.empty()) {
        for (std::size_t i : pair_batches[step % pair_batches.size()]) {
          const UserId u = translator_users_[i];
          pairs.push_back({recent(u, Domain::source), recent(u, Domain::target)});
        }
      }
      ParameterSet& grads = end_to_end_ ? grads_all_ : grads_both_;
      grads.set_zero();
      const ObjectiveValue v =
          training_objective(model_, model_.params(), corpus_, bt, bs, pairs, config_.end_to_end_weight, &grads);
      sum_t += v.target_sum;
      sum_s += v.source_sum;
      sum_f += v.translator_mean * static_cast<double>(pairs.size());
      pair_count += pairs.size();
      adam_step(model_.params(), grads, network_adam_, config_.adam);
    }
    row.loss_target = target.empty() ? 0.0 : sum_t / static_cast<double>(target.size());
    row.loss_source = source.empty() ? 0.0 : sum_s / static_cast<double>(source.size());
    if (end_to_end_) row.loss_translator = pair_count ? sum_f / static_cast<double>(pair_count) : 0.0;
    require_finite(row.loss_target, "target loss", epoch);
    require_finite(row.loss_source, "source loss", epoch);
    require_finite(row.loss_translator, "translator loss", epoch);
  }

  std::vector<ArticleId> recent(UserId u, Domain d) const {
    const auto& seq = sequences_[index_of(d)][u];
    const std::size_t begin = seq.size() > config_.history_length ? seq.size() - config_.history_length : 0;
    return {seq.begin() + static_cast<std::ptrdiff_t>(begin), seq.end()};
  }

  std::vector<TranslatorPair> make_pairs() const {
    std::vector<TranslatorPair> pairs;
    pairs.reserve(translator_users_.size());
    for (UserId u : translator_users_) {
      pairs.push_back({unconditioned_representation(model_.params(), corpus_, recent(u, Domain::source)),
                       unconditioned_representation(model_.params(), corpus_, recent(u, Domain::target))});
    }
    return pairs;
  }

  double translator_epoch(const std::vector<TranslatorPair>& pairs, std::size_t epoch) {
    Rng rng = make_rng(config_.seed, "translator-shuffle", epoch);
    const auto batches = make_batches(pairs.size(), config_.batch_size, rng);
    double total = 0.0;
    std::vector<TranslatorPair> batch;
    for (const auto& idx : batches) {
      batch.clear();
      for (std::size_t i : idx) batch.push_back(pairs[i]);
      if (!model_.translator().has_parameters()) {
        total += model_.translator().loss(model_.params(), batch) * static_cast<double>(batch.size());
        continue;
      }
      grads_translator_.set_zero();
      total += model_.translator().loss(model_.params(), batch, &grads_translator_) * static_cast<double>(batch.size());
      adam_step(model_.params(), grads_translator_, translator_adam_, config_.adam);
    }
    return total / static_cast<double>(pairs.size());
  }

  double validate(std::size_t iter) {
    if (hooks_.validation) return hooks_.validation(iter, model_);
    if (validation_cases_.empty()) return 0.0;
    score_cases(model_, corpus_, validation_cases_, ScoringMode::warm, config_.history_length);
    double auc = 0.0;
    for (const auto& c : validation_cases_) auc += case_auc(c);
    return auc / static_cast<double>(validation_cases_.size());
  }

  TrainConfig config_;
  const Corpus& corpus_;
  const UserSplit& split_;
  const TrainHooks& hooks_;
  TrNewsModel model_;
  std::array<std::vector<std::vector<ArticleId>>, 2> sequences_;
  std::vector<UserId> translator_users_;
  bool transfer_enabled_ = true;
  bool end_to_end_ = false;
  std::vector<std::string> warnings_;
  std::vector<EvalCase> validation_cases_;
  AdamState network_adam_;
  AdamState translator_adam_;
  ParameterSet grads_both_;
  ParameterSet grads_translator_;
  ParameterSet grads_all_;
  std::size_t pair_generations_ = 0;
  std::size_t translator_passes_ = 0;
};

}  // namespace

TrainResult fit(const TrainConfig& config, const Corpus& corpus, const UserSplit& split, const TrainHooks& hooks) {
  return Trainer(config, corpus, split, hooks).run_alternating();
}

TrainResult fit_separated(const TrainConfig& config, const Corpus& corpus, const UserSplit& split,
                          const TrainHooks& hooks) {
  return Trainer(config, corpus, split, hooks).run_separated();
}

TrainResult fit_end_to_end(const TrainConfig& config, const Corpus& corpus, const UserSplit& split,
                           const TrainHooks& hooks) {
  return Trainer(config, corpus, split, hooks).run_end_to_end();
}

TrainResult train(const TrainConfig& config, const Corpus& corpus, const UserSplit& split, const TrainHooks& hooks) {
  switch (config.mode) {
    case TrainingMode::alternating:
      return fit(config, corpus, split, hooks);
    case TrainingMode::separated:
      return fit_separated(config, corpus, split, hooks);
    case TrainingMode::end_to_end:
      return fit_end_to_end(config, corpus, split, hooks);
  }
  throw std::invalid_argument("unknown training mode");
}

}  // namespace trnews
