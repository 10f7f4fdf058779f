#include "trnews/inference.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace trnews {

std::vector<ArticleId> latest_articles(const ReadingHistory& history, std::size_t history_length,
                                       std::optional<std::int64_t> cutoff) {
  std::size_t end = history.events.size();
  if (cutoff) {
    end = 0;
    while (end < history.events.size() && history.events[end].timestamp < *cutoff) ++end;
  }
  const std::size_t begin = end > history_length ? end - history_length : 0;
  std::vector<ArticleId> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(history.events[i].article);
  return out;
}

Vec unconditioned_representation(const ParameterSet& params, const Corpus& corpus,
                                 std::span<const ArticleId> articles) {
  std::vector<Vec> reps;
  reps.reserve(articles.size());
  for (ArticleId a : articles) reps.push_back(news_encode(params, corpus.article(a).tokens));
  return user_encode_unconditioned(reps);
}

Vec infer_unseen_user(const TrNewsModel& model, const Corpus& corpus, const UserSplit& split,
                      const ColdStartQuery& query, std::size_t history_length) {
  if (std::binary_search(split.train.begin(), split.train.end(), query.user) &&
      !corpus.history(query.user, Domain::target).empty()) {
    throw ColdStartError("user '" + corpus.user_id(query.user) + "' is a target training user, not unseen");
  }
  const auto recent = latest_articles(corpus.history(query.user, Domain::source), history_length, query.cutoff);
  if (recent.empty()) {
    throw ColdStartError("user '" + corpus.user_id(query.user) + "' has no source-domain history to translate");
  }
  const Vec source = unconditioned_representation(model.params(), corpus, recent);
  return model.translator().translate(model.params(), source);
}

std::vector<ScoredCandidate> rank_scores(std::span<const ArticleId> articles, std::span<const double> scores) {
  if (articles.size() != scores.size()) throw std::invalid_argument("rank_scores: size mismatch");
  std::vector<ScoredCandidate> out(articles.size());
  for (std::size_t i = 0; i < articles.size(); ++i) out[i] = {articles[i], scores[i], 0};
  std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.article < b.article;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

std::vector<ScoredCandidate> score_candidates(const TrNewsModel& model, const Corpus& corpus, ConstSpan target_repr,
                                              std::span<const ArticleId> candidates) {
  if (candidates.empty()) throw ColdStartError("no candidates to score");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (ArticleId c : candidates) {
    if (c >= corpus.article_count()) throw ColdStartError("unknown candidate article " + std::to_string(c));
    if (corpus.article(c).domain != Domain::target) {
      throw ColdStartError("candidate '" + corpus.article(c).id + "' is not a target-domain article");
    }
    const Vec news = news_encode(model.params(), corpus.article(c).tokens);
    scores.push_back(model.target().predict(model.params(), target_repr, news));
  }
  return rank_scores(candidates, scores);
}

void write_scores(std::ostream& out, const Corpus& corpus, UserId user, std::span<const ScoredCandidate> scored) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& s : scored) {
    out << corpus.user_id(user) << '\t' << corpus.article(s.article).id << '\t' << s.score << '\t' << s.rank << '\n';
  }
  out.precision(precision);
}

}  // namespace trnews
