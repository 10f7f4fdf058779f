#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trnews/random.hpp"

namespace trnews {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Domain : std::uint8_t { source = 0, target = 1 };

inline constexpr std::size_t index_of(Domain d) { return static_cast<std::size_t>(d); }
inline constexpr Domain other(Domain d) { return d == Domain::source ? Domain::target : Domain::source; }
char domain_code(Domain d);
Domain parse_domain(std::string_view code);

using WordId = std::size_t;
using ArticleId = std::size_t;
using UserId = std::size_t;

inline constexpr WordId kOovId = 0;
inline constexpr WordId kPadId = 1;

// ---------------------------------------------------------------------------
// Tokenization and vocabulary

/// Lowercases, removes ASCII punctuation and splits on whitespace.
/// Throws CorpusError when nothing is left.
std::vector<std::string> normalize_text(std::string_view text);

/// Word-to-id map over both domains. Ids 0 (OOV) and 1 (padding) are
/// reserved. In shared mode a word seen in both domains has one id; otherwise
/// each (word, domain) pair gets its own id.
class Vocabulary {
 public:
  struct Entry {
    std::string word;
    bool in_source = false;
    bool in_target = false;
  };

  explicit Vocabulary(bool shared = true);

  bool shared() const { return shared_; }
  /// Total ids including the reserved ones.
  std::size_t size() const { return entries_.size(); }
  /// Ids assigned to real words.
  std::size_t word_count() const { return entries_.size() - 2; }
  std::size_t count_in(Domain d) const;

  WordId add(std::string_view word, Domain d);
  std::optional<WordId> find(std::string_view word, Domain d) const;
  WordId lookup(std::string_view word, Domain d) const { return find(word, d).value_or(kOovId); }
  const Entry& entry(WordId id) const { return entries_.at(id); }

  /// "word \t id \t flags" per line sorted by id; flags are S, T, ST or - .
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in, bool shared);

 private:
  std::string key(std::string_view word, Domain d) const;

  bool shared_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, WordId> index_;
};

enum class VocabMode { build, lookup };

std::vector<WordId> tokenize(std::string_view text, Vocabulary& vocab, Domain d, VocabMode mode);
std::vector<WordId> tokenize(std::string_view text, const Vocabulary& vocab, Domain d);

struct RawArticle {
  std::string id;
  Domain domain = Domain::source;
  std::string text;
};

/// Words occurring fewer than `min_count` times (counted per id key) are left
/// out and therefore map to OOV on lookup.
Vocabulary build_vocabulary(std::span<const RawArticle> source, std::span<const RawArticle> target,
                            std::size_t min_count = 1, bool shared = true);

// ---------------------------------------------------------------------------
// Corpus

struct NewsArticle {
  std::string id;
  Domain domain = Domain::source;
  std::vector<WordId> tokens;
  std::string text;
};

struct ReadingEvent {
  ArticleId article = 0;
  std::int64_t timestamp = 0;
};

struct ReadingHistory {
  UserId user = 0;
  Domain domain = Domain::source;
  std::vector<ReadingEvent> events;

  std::vector<ArticleId> articles() const;
  bool empty() const { return events.empty(); }
};

struct EventRecord {
  std::string user;
  std::string news;
  Domain domain = Domain::source;
  std::int64_t timestamp = 0;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<RawArticle> raw, std::span<const EventRecord> events, std::size_t min_count, bool shared);

  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<NewsArticle>& articles() const { return articles_; }
  const NewsArticle& article(ArticleId a) const { return articles_.at(a); }
  std::size_t article_count() const { return articles_.size(); }
  /// Article ids of one domain in ascending order.
  const std::vector<ArticleId>& domain_articles(Domain d) const { return pools_[index_of(d)]; }
  std::optional<ArticleId> find_article(std::string_view id) const;

  std::size_t user_count() const { return user_ids_.size(); }
  const std::string& user_id(UserId u) const { return user_ids_.at(u); }
  std::optional<UserId> find_user(std::string_view id) const;
  /// Chronological history; empty when the user never read in that domain.
  const ReadingHistory& history(UserId u, Domain d) const { return histories_[index_of(d)].at(u); }
  std::vector<UserId> users_in(Domain d) const;
  /// Users with events in both domains.
  std::vector<UserId> shared_users() const;

 private:
  Vocabulary vocab_;
  std::vector<NewsArticle> articles_;
  std::unordered_map<std::string, ArticleId> article_index_;
  std::array<std::vector<ArticleId>, 2> pools_;
  std::vector<std::string> user_ids_;
  std::unordered_map<std::string, UserId> user_index_;
  std::array<std::vector<ReadingHistory>, 2> histories_;
};

// File formats: news "id \t S|T \t text"; events "user \t news \t S|T \t timestamp".
std::vector<RawArticle> read_news(std::istream& in);
void write_news(std::ostream& out, std::span<const RawArticle> articles);
std::vector<EventRecord> read_events(std::istream& in);
void write_events(std::ostream& out, std::span<const EventRecord> events);

Corpus load_corpus(const std::filesystem::path& news, const std::filesystem::path& events, std::size_t min_count,
                   bool shared);

/// Converts MIND-format news.tsv / behaviors.tsv into the news and events
/// records above. Articles of `source_category` become domain S and those of
/// `target_category` domain T; everything else is dropped. Clicked history is
/// replayed before clicked impressions, and timestamps are per-user sequence
/// positions.
struct MindImport {
  std::vector<RawArticle> articles;
  std::vector<EventRecord> events;
};
MindImport import_mind(std::istream& news_tsv, std::istream& behaviors_tsv, std::string_view source_category,
                       std::string_view target_category);

// ---------------------------------------------------------------------------
// Examples and splits

struct TrainingExample {
  UserId user = 0;
  Domain domain = Domain::source;
  std::vector<ArticleId> history;
  ArticleId candidate = 0;
  int label = 0;
};

/// Sliding-window positives over a chronological sequence: for c = 2..n the
/// history is the latest min(c-1, L) articles before position c.
std::vector<TrainingExample> generate_positive_examples(UserId user, Domain domain,
                                                        std::span<const ArticleId> sequence,
                                                        std::size_t history_length);
std::vector<TrainingExample> generate_positive_examples(const ReadingHistory& history, std::size_t history_length);

/// Uniform draw from `pool` excluding `exclude`. Throws CorpusError when every
/// pool article is excluded.
ArticleId sample_negative(std::span<const ArticleId> pool, const std::unordered_set<ArticleId>& exclude, Rng& rng);

/// `count` distinct uniform draws from `pool` excluding `exclude`.
std::vector<ArticleId> sample_negatives_without_replacement(std::span<const ArticleId> pool,
                                                            const std::unordered_set<ArticleId>& exclude,
                                                            std::size_t count, Rng& rng);

struct UserSplit {
  std::vector<UserId> train;
  std::vector<UserId> test;
  /// Last target-domain read of each train user with at least two target reads.
  std::map<UserId, ArticleId> validation;
};

/// Deterministic shuffle-and-cut of `users`; train gets round(ratio * n)
/// users, clamped to [1, n-1]. Both lists come back sorted.
UserSplit partition_users(std::span<const UserId> users, double ratio, std::uint64_t seed);
/// partition_users over every corpus user, then reserves validation events.
UserSplit split_users(const Corpus& corpus, double ratio, std::uint64_t seed);

void write_split(std::ostream& out, const Corpus& corpus, const UserSplit& split);
UserSplit read_split(std::istream& in, const Corpus& corpus);

}  // namespace trnews
