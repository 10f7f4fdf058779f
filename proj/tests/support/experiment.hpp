#pragma once

#include <cstdint>
#include <vector>

#include "trnews/config.hpp"
#include "trnews/evaluation.hpp"
#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

namespace trnews::testing {

struct ExperimentOutcome {
  TrainResult trained;
  MetricsReport translated;
  MetricsReport zero_vector;
  double seconds = 0.0;
};

/// Corpus used by the transfer experiments: 500 users, k = 8.
SynthConfig transfer_corpus_config(InterestMap map, std::uint64_t seed);
/// D = 32, L = 5 with a shortened iteration budget.
TrainConfig transfer_train_config(TransferStrategy strategy, std::uint64_t seed);

/// Generates, splits 90/10, trains and scores held-out users cold-start.
ExperimentOutcome run_transfer_experiment(const SynthConfig& synth, const TrainConfig& train);

Corpus corpus_from(const SynthCorpus& synth, bool shared_vocab = true);

}  // namespace trnews::testing
