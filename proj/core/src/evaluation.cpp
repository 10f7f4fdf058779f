#include "trnews/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "trnews/inference.hpp"

namespace trnews {

std::size_t positive_rank(const EvalCase& c) {
  if (c.scores.size() != c.item_count()) throw std::invalid_argument("eval case is missing scores");
  const double pos = c.scores[0];
  std::size_t above = 0;
  for (std::size_t i = 0; i < c.negatives.size(); ++i) {
    const double s = c.scores[i + 1];
    if (s > pos || (s == pos && c.negatives[i] < c.positive)) ++above;
  }
  return above + 1;
}

double hit_ratio_at(std::size_t rank, std::size_t k) { return rank <= k ? 1.0 : 0.0; }

double ndcg_at(std::size_t rank, std::size_t k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

double case_auc(const EvalCase& c) {
  if (c.negatives.empty()) throw std::invalid_argument("AUC needs at least one negative");
  const double pos = c.scores[0];
  double credit = 0.0;
  for (std::size_t i = 0; i < c.negatives.size(); ++i) {
    const double s = c.scores[i + 1];
    if (s < pos) {
      credit += 1.0;
    } else if (s == pos) {
      credit += 0.5;
    }
  }
  return credit / static_cast<double>(c.negatives.size());
}

CaseMetrics rank_metrics(const EvalCase& c) {
  CaseMetrics m;
  m.rank = positive_rank(c);
  m.hr5 = hit_ratio_at(m.rank, 5);
  m.hr10 = hit_ratio_at(m.rank, 10);
  m.ndcg5 = ndcg_at(m.rank, 5);
  m.ndcg10 = ndcg_at(m.rank, 10);
  m.mrr = 1.0 / static_cast<double>(m.rank);
  m.auc = case_auc(c);
  return m;
}

MetricsReport aggregate(std::span<const CaseMetrics> metrics) {
  if (metrics.empty()) throw std::invalid_argument("cannot aggregate an empty case list");
  MetricsReport r;
  for (const auto& m : metrics) {
    r.hr5 += m.hr5;
    r.hr10 += m.hr10;
    r.ndcg5 += m.ndcg5;
    r.ndcg10 += m.ndcg10;
    r.mrr += m.mrr;
    r.auc += m.auc;
  }
  const double scale = 100.0 / static_cast<double>(metrics.size());
  r.hr5 *= scale;
  r.hr10 *= scale;
  r.ndcg5 *= scale;
  r.ndcg10 *= scale;
  r.mrr *= scale;
  r.auc *= scale;
  r.cases = metrics.size();
  return r;
}

namespace {

std::unordered_set<ArticleId> full_target_history(const Corpus& corpus, UserId u) {
  std::unordered_set<ArticleId> seen;
  for (const auto& e : corpus.history(u, Domain::target).events) seen.insert(e.article);
  return seen;
}

}  // namespace

std::vector<EvalCase> build_eval_cases(const Corpus& corpus, std::span<const UserId> users,
                                       std::size_t history_length, std::uint64_t seed, std::size_t negatives) {
  std::vector<EvalCase> cases;
  const auto& pool = corpus.domain_articles(Domain::target);
  for (UserId u : users) {
    const auto& events = corpus.history(u, Domain::target).events;
    if (events.size() < 2) continue;
    const auto seen = full_target_history(corpus, u);
    Rng rng = make_rng(seed, "eval-negatives", u);
    for (std::size_t pos = 1; pos < events.size(); ++pos) {
      EvalCase c;
      c.user = u;
      c.positive = events[pos].article;
      const std::size_t begin = pos > history_length ? pos - history_length : 0;
      for (std::size_t i = begin; i < pos; ++i) c.history.push_back(events[i].article);
      c.negatives = sample_negatives_without_replacement(pool, seen, negatives, rng);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

std::vector<EvalCase> build_validation_cases(const Corpus& corpus, const UserSplit& split,
                                             std::size_t history_length, std::uint64_t seed,
                                             std::size_t negatives) {
  std::vector<EvalCase> cases;
  const auto& pool = corpus.domain_articles(Domain::target);
  for (const auto& [u, held_out] : split.validation) {
    const auto& events = corpus.history(u, Domain::target).events;
    const auto seen = full_target_history(corpus, u);
    const std::size_t available = pool.size() > seen.size() ? pool.size() - seen.size() : 0;
    if (available == 0) continue;
    Rng rng = make_rng(seed, "validation-negatives", u);
    EvalCase c;
    c.user = u;
    c.positive = held_out;
    const std::size_t pos = events.size() - 1;
    const std::size_t begin = pos > history_length ? pos - history_length : 0;
    for (std::size_t i = begin; i < pos; ++i) c.history.push_back(events[i].article);
    c.negatives = sample_negatives_without_replacement(pool, seen, std::min(negatives, available), rng);
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string_view to_string(ScoringMode m) {
  switch (m) {
    case ScoringMode::translated:
      return "translated";
    case ScoringMode::zero_vector:
      return "zero_vector";
    case ScoringMode::warm:
      return "warm";
  }
  return "unknown";
}

void score_cases(const TrNewsModel& model, const Corpus& corpus, std::span<EvalCase> cases, ScoringMode mode,
                 std::size_t history_length) {
  const ParameterSet& params = model.params();
  const BaseNetwork& net = model.target();
  std::unordered_map<ArticleId, Vec> news_cache;
  auto news = [&](ArticleId a) -> const Vec& {
    auto it = news_cache.find(a);
    if (it == news_cache.end()) it = news_cache.emplace(a, news_encode(params, corpus.article(a).tokens)).first;
    return it->second;
  };
  std::unordered_map<UserId, Vec> user_cache;
  for (auto& c : cases) {
    c.scores.assign(c.item_count(), 0.0);
    if (mode == ScoringMode::warm) {
      if (c.history.empty()) throw std::invalid_argument("warm scoring needs a non-empty history");
      std::vector<Vec> hist;
      for (ArticleId a : c.history) hist.push_back(news(a));
      for (std::size_t i = 0; i < c.item_count(); ++i) {
        const Vec& cand = news(c.item(i));
        c.scores[i] = net.predict(params, net.user_encode(params, hist, cand), cand);
      }
      continue;
    }
    auto it = user_cache.find(c.user);
    if (it == user_cache.end()) {
      Vec repr;
      if (mode == ScoringMode::zero_vector) {
        repr.assign(net.dim(), 0.0);
      } else {
        const auto recent = latest_articles(corpus.history(c.user, Domain::source), history_length);
        if (recent.empty()) {
          throw ColdStartError("user '" + corpus.user_id(c.user) + "' has no source-domain history to translate");
        }
        repr = model.translator().translate(params, unconditioned_representation(params, corpus, recent));
      }
      it = user_cache.emplace(c.user, std::move(repr)).first;
    }
    for (std::size_t i = 0; i < c.item_count(); ++i) c.scores[i] = net.predict(params, it->second, news(c.item(i)));
  }
}

MetricsReport evaluate(const TrNewsModel& model, const Corpus& corpus, std::span<EvalCase> cases, ScoringMode mode,
                       std::size_t history_length) {
  if (cases.empty()) throw std::invalid_argument("evaluate: no evaluation cases");
  score_cases(model, corpus, cases, mode, history_length);
  std::vector<CaseMetrics> metrics;
  metrics.reserve(cases.size());
  for (const auto& c : cases) metrics.push_back(rank_metrics(c));
  return aggregate(metrics);
}

void write_report_row(std::ostream& out, std::string_view name, const MetricsReport& r, bool header) {
  if (header) out << "name\tHR@5\tHR@10\tNDCG@5\tNDCG@10\tMRR\tAUC\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(2);
  out << name << '\t' << r.hr5 << '\t' << r.hr10 << '\t' << r.ndcg5 << '\t' << r.ndcg10 << '\t' << r.mrr << '\t'
      << r.auc << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_report_kv(std::ostream& out, const MetricsReport& r) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(2);
  out << "hr@5=" << r.hr5 << "\nhr@10=" << r.hr10 << "\nndcg@5=" << r.ndcg5 << "\nndcg@10=" << r.ndcg10
      << "\nmrr=" << r.mrr << "\nauc=" << r.auc << "\ncases=" << r.cases << '\n';
  out.flags(flags);
  out.precision(precision);
}

std::vector<AttentionRow> attention_report(const TrNewsModel& model, const Corpus& corpus, Domain domain,
                                           std::span<const ArticleId> history, ArticleId candidate) {
  if (history.empty()) throw std::invalid_argument("attention report needs a non-empty history");
  const ParameterSet& params = model.params();
  std::vector<Vec> reps;
  for (ArticleId a : history) reps.push_back(news_encode(params, corpus.article(a).tokens));
  const Vec cand = news_encode(params, corpus.article(candidate).tokens);
  const Vec weights = model.network(domain).attention_weights(params, reps, cand);

  std::vector<AttentionRow> rows;
  for (std::size_t i = 0; i < history.size(); ++i) {
    rows.push_back({i, history[i], corpus.article(history[i]).text, weights[i]});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AttentionRow& a, const AttentionRow& b) {
    return *a.weight > *b.weight;
  });
  rows.push_back({history.size(), candidate, corpus.article(candidate).text, std::nullopt});
  return rows;
}

void write_attention_report(std::ostream& out, std::span<const AttentionRow> rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "no\ttitle\tweight\n" << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << r.position << '\t' << r.text << '\t';
    if (r.weight) {
      out << *r.weight;
    } else {
      out << "N/A";
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace trnews
