#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trnews/adam.hpp"
#include "trnews/corpus.hpp"
#include "trnews/model.hpp"

namespace trnews {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainingMode { alternating, separated, end_to_end };

std::string_view to_string(TrainingMode m);
TrainingMode parse_training_mode(std::string_view name);

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  std::size_t batch_size = 256;
  std::size_t max_iterations = 50;
  std::size_t patience = 10;
  std::size_t history_length = 10;
  /// Sampled negatives per sliding-window positive.
  std::size_t negatives_per_positive = 1;
  TrainingMode mode = TrainingMode::alternating;
  /// Weight of the translator loss in the end-to-end objective.
  double end_to_end_weight = 1.0;
  /// Fraction of shared users that supervise the translator (subsampled once).
  double shared_user_fraction = 1.0;
  std::size_t validation_negatives = 99;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct IterationLog {
  std::size_t iteration = 0;
  double loss_target = 0.0;
  double loss_source = 0.0;
  double loss_translator = 0.0;
  double validation_auc = 0.0;
  double seconds = 0.0;
};

struct TrainEvent {
  enum class Kind { translator_begin, translator_end, iteration_end };
  Kind kind;
  std::size_t iteration;
  const TrNewsModel& model;
};

struct TrainHooks {
  /// Replaces the validation metric (higher is better) when set.
  std::function<double(std::size_t iteration, const TrNewsModel& model)> validation;
  std::function<void(const TrainEvent&)> on_event;
};

struct TrainResult {
  TrNewsModel model;  ///< parameters from the best validation iteration
  std::vector<IterationLog> log;
  std::size_t best_iteration = 0;
  double best_validation = -std::numeric_limits<double>::infinity();
  std::size_t iterations_run = 0;
  bool stopped_early = false;
  bool transfer_enabled = true;
  std::size_t pair_generations = 0;
  std::size_t translator_passes = 0;
  std::vector<UserId> translator_users;
  std::vector<std::string> warnings;
};

/// Alternating two-stage training: each outer iteration runs one epoch of
/// mini-batch Adam on the joint cross-entropy of both networks, regenerates
/// (source, target) representation pairs for the shared training users and
/// runs one translator epoch on them, then validates. Stops after `patience`
/// iterations without improvement and returns the best checkpoint.
TrainResult fit(const TrainConfig& config, const Corpus& corpus, const UserSplit& split, const TrainHooks& hooks = {});
/// Networks first (with early stopping), then one pair generation and
/// translator training on those fixed pairs.
TrainResult fit_separated(const TrainConfig& config, const Corpus& corpus, const UserSplit& split,
                          const TrainHooks& hooks = {});
/// Single objective: joint cross-entropy plus end_to_end_weight times the
/// translator loss, whose gradient also reaches the embedding.
TrainResult fit_end_to_end(const TrainConfig& config, const Corpus& corpus, const UserSplit& split,
                           const TrainHooks& hooks = {});
/// Dispatches on config.mode.
TrainResult train(const TrainConfig& config, const Corpus& corpus, const UserSplit& split, const TrainHooks& hooks = {});

/// Latest reads of one shared user in each domain, for the translator term.
struct PairHistory {
  std::vector<ArticleId> source;
  std::vector<ArticleId> target;
};

struct ObjectiveValue {
  double target_sum = 0.0;      ///< summed cross-entropy over the target batch
  double source_sum = 0.0;      ///< summed cross-entropy over the source batch
  double translator_mean = 0.0; ///< translator loss over `pairs` (0 when empty)
  double total = 0.0;
};

/// The per-step objective
///   target_sum / |target| + source_sum / |source| + weight * translator_mean.
/// The translator term is skipped when `pairs` is empty or the weight is 0;
/// otherwise its gradient also flows through the unconditioned user
/// encoders into the embedding. Gradients are added into `grads`.
ObjectiveValue training_objective(const TrNewsModel& model, const ParameterSet& params, const Corpus& corpus,
                                  std::span<const TrainingExample> target_batch,
                                  std::span<const TrainingExample> source_batch, std::span<const PairHistory> pairs,
                                  double translator_weight, ParameterSet* grads);

/// Shuffled index batches over [0, count); the last batch may be short.
std::vector<std::vector<std::size_t>> make_batches(std::size_t count, std::size_t batch_size, Rng& rng);

/// One row per iteration: iter, loss_T, loss_S, loss_F, val_AUC, seconds.
void write_training_log(std::ostream& out, std::span<const IterationLog> log);

/// Sliding-window positives plus `negatives_per_positive` sampled negatives
/// (sharing the positive's history) for each user's visible sequence.
std::vector<TrainingExample> build_domain_examples(const Corpus& corpus, Domain domain,
                                                   std::span<const std::vector<ArticleId>> sequences,
                                                   std::size_t history_length, std::size_t negatives_per_positive,
                                                   Rng& rng);

/// Chronological reads usable for training: all source reads; target reads
/// of train users only, minus their held-out validation read.
std::vector<std::vector<ArticleId>> visible_sequences(const Corpus& corpus, const UserSplit& split, Domain domain);

}  // namespace trnews
