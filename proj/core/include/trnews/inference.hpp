#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "trnews/corpus.hpp"
#include "trnews/model.hpp"

namespace trnews {

class ColdStartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ColdStartQuery {
  UserId user = 0;
  std::vector<ArticleId> candidates;
  /// Only source reads strictly before this timestamp are used, if set.
  std::optional<std::int64_t> cutoff;
};

/// Latest `history_length` article ids of `history` read before `cutoff`.
std::vector<ArticleId> latest_articles(const ReadingHistory& history, std::size_t history_length,
                                       std::optional<std::int64_t> cutoff = std::nullopt);

/// Candidate-free representation: mean of the news representations of `articles`.
Vec unconditioned_representation(const ParameterSet& params, const Corpus& corpus,
                                 std::span<const ArticleId> articles);

/// Target-domain representation of a user unseen in target training,
/// obtained by translating the candidate-free representation of their latest
/// source reads. Reads only source-domain history.
/// Throws ColdStartError if the user was a target training user or has no
/// source reads before the cutoff.
Vec infer_unseen_user(const TrNewsModel& model, const Corpus& corpus, const UserSplit& split,
                      const ColdStartQuery& query, std::size_t history_length);

struct ScoredCandidate {
  ArticleId article = 0;
  double score = 0.0;
  std::size_t rank = 0;
};

/// Sorts by descending score, ties by ascending article id; ranks are 1-based.
std::vector<ScoredCandidate> rank_scores(std::span<const ArticleId> articles, std::span<const double> scores);

/// f_T([target_repr, psi(c)]) for each candidate, ranked. Throws
/// ColdStartError for unknown or non-target candidates.
std::vector<ScoredCandidate> score_candidates(const TrNewsModel& model, const Corpus& corpus, ConstSpan target_repr,
                                              std::span<const ArticleId> candidates);

/// "user \t candidate \t score \t rank" lines.
void write_scores(std::ostream& out, const Corpus& corpus, UserId user, std::span<const ScoredCandidate> scored);

}  // namespace trnews
