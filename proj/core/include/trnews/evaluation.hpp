#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trnews/corpus.hpp"
#include "trnews/model.hpp"

namespace trnews {

inline constexpr std::size_t kEvalNegatives = 99;

/// One positive ranked against sampled negatives. scores[0] belongs to the
/// positive and scores[1 + i] to negatives[i].
struct EvalCase {
  UserId user = 0;
  ArticleId positive = 0;
  std::vector<ArticleId> negatives;
  /// Target reads preceding the positive (latest L), for warm scoring.
  std::vector<ArticleId> history;
  std::vector<double> scores;

  std::size_t item_count() const { return negatives.size() + 1; }
  ArticleId item(std::size_t i) const { return i == 0 ? positive : negatives[i - 1]; }
};

struct CaseMetrics {
  std::size_t rank = 0;
  double hr5 = 0.0;
  double hr10 = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  double mrr = 0.0;
  double auc = 0.0;
};

/// 1-based rank of the positive after a descending sort with ties broken by
/// ascending article id.
std::size_t positive_rank(const EvalCase& c);
double hit_ratio_at(std::size_t rank, std::size_t k);
double ndcg_at(std::size_t rank, std::size_t k);
/// (#negatives strictly below the positive + 0.5 * #ties) / #negatives.
double case_auc(const EvalCase& c);
CaseMetrics rank_metrics(const EvalCase& c);

/// Means over cases, as percentages.
struct MetricsReport {
  double hr5 = 0.0;
  double hr10 = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  double mrr = 0.0;
  double auc = 0.0;
  std::size_t cases = 0;
};

MetricsReport aggregate(std::span<const CaseMetrics> metrics);

/// One case per target-domain read with at least one earlier target read,
/// for each user in `users`. Negatives are drawn without replacement from
/// target articles the user never read; each user has its own seed
/// sub-stream. Throws CorpusError when fewer than `negatives` are available.
std::vector<EvalCase> build_eval_cases(const Corpus& corpus, std::span<const UserId> users,
                                       std::size_t history_length, std::uint64_t seed,
                                       std::size_t negatives = kEvalNegatives);

/// One case per held-out validation read. Negatives are capped at what the
/// target pool can supply.
std::vector<EvalCase> build_validation_cases(const Corpus& corpus, const UserSplit& split,
                                             std::size_t history_length, std::uint64_t seed,
                                             std::size_t negatives = kEvalNegatives);

/// How the user side of f_T is formed.
enum class ScoringMode {
  translated,   ///< translator applied to the latest source reads
  zero_vector,  ///< no transfer: the user representation is all zeros
  warm,         ///< attention over the case's own target history
};

std::string_view to_string(ScoringMode m);

void score_cases(const TrNewsModel& model, const Corpus& corpus, std::span<EvalCase> cases, ScoringMode mode,
                 std::size_t history_length);

/// Scores and aggregates. Throws std::invalid_argument on an empty case list.
MetricsReport evaluate(const TrNewsModel& model, const Corpus& corpus, std::span<EvalCase> cases, ScoringMode mode,
                       std::size_t history_length);

/// Header "name HR@5 HR@10 NDCG@5 NDCG@10 MRR AUC" (tab-separated) when
/// `header` is set, then one row with two decimals.
void write_report_row(std::ostream& out, std::string_view name, const MetricsReport& r, bool header);
/// key=value lines (hr@5=..., cases=...).
void write_report_kv(std::ostream& out, const MetricsReport& r);

struct AttentionRow {
  std::size_t position = 0;
  ArticleId article = 0;
  std::string text;
  std::optional<double> weight;  ///< empty for the candidate row
};

/// History rows sorted by descending weight followed by the candidate row.
std::vector<AttentionRow> attention_report(const TrNewsModel& model, const Corpus& corpus, Domain domain,
                                           std::span<const ArticleId> history, ArticleId candidate);
void write_attention_report(std::ostream& out, std::span<const AttentionRow> rows);

}  // namespace trnews
