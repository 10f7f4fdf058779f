#include "trnews/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace trnews {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CorpusError("invalid integer for " + what + ": '" + s + "'");
  }
}

}  // namespace

char domain_code(Domain d) { return d == Domain::source ? 'S' : 'T'; }

Domain parse_domain(std::string_view code) {
  if (code == "S") return Domain::source;
  if (code == "T") return Domain::target;
  throw CorpusError("unknown domain code '" + std::string(code) + "' (expected S or T)");
}

std::vector<std::string> normalize_text(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  if (words.empty()) throw CorpusError("text is empty after normalization");
  return words;
}

Vocabulary::Vocabulary(bool shared) : shared_(shared) {
  entries_.push_back({"<oov>", true, true});
  entries_.push_back({"<pad>", false, false});
}

std::string Vocabulary::key(std::string_view word, Domain d) const {
  std::string k(word);
  if (!shared_) {
    k.push_back('\x1f');
    k.push_back(domain_code(d));
  }
  return k;
}

std::size_t Vocabulary::count_in(Domain d) const {
  std::size_t n = 0;
  for (std::size_t i = 2; i < entries_.size(); ++i) {
    n += d == Domain::source ? entries_[i].in_source : entries_[i].in_target;
  }
  return n;
}

WordId Vocabulary::add(std::string_view word, Domain d) {
  auto [it, inserted] = index_.try_emplace(key(word, d), entries_.size());
  if (inserted) entries_.push_back({std::string(word), false, false});
  Entry& e = entries_[it->second];
  (d == Domain::source ? e.in_source : e.in_target) = true;
  return it->second;
}

std::optional<WordId> Vocabulary::find(std::string_view word, Domain d) const {
  auto it = index_.find(key(word, d));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t id = 0; id < entries_.size(); ++id) {
    const Entry& e = entries_[id];
    std::string flags;
    if (e.in_source) flags += 'S';
    if (e.in_target) flags += 'T';
    if (flags.empty()) flags = "-";
    out << e.word << '\t' << id << '\t' << flags << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in, bool shared) {
  Vocabulary v(shared);
  std::string line;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 3) throw CorpusError("vocabulary line needs 3 fields: '" + line + "'");
    const auto id = static_cast<std::size_t>(parse_int(f[1], "vocabulary id"));
    if (id != expected) throw CorpusError("vocabulary ids must be dense and sorted; got " + f[1]);
    ++expected;
    if (id < 2) continue;
    const bool s = f[2].find('S') != std::string::npos;
    const bool t = f[2].find('T') != std::string::npos;
    if (!s && !t) throw CorpusError("vocabulary word without domain flag: '" + f[0] + "'");
    WordId got = 0;
    if (s) got = v.add(f[0], Domain::source);
    if (t) got = v.add(f[0], Domain::target);
    if (got != id) throw CorpusError("vocabulary id mismatch for word '" + f[0] + "'");
  }
  return v;
}

std::vector<WordId> tokenize(std::string_view text, Vocabulary& vocab, Domain d, VocabMode mode) {
  std::vector<WordId> ids;
  for (const auto& w : normalize_text(text)) {
    ids.push_back(mode == VocabMode::build ? vocab.add(w, d) : vocab.lookup(w, d));
  }
  return ids;
}

std::vector<WordId> tokenize(std::string_view text, const Vocabulary& vocab, Domain d) {
  std::vector<WordId> ids;
  for (const auto& w : normalize_text(text)) ids.push_back(vocab.lookup(w, d));
  return ids;
}

Vocabulary build_vocabulary(std::span<const RawArticle> source, std::span<const RawArticle> target,
                            std::size_t min_count, bool shared) {
  if (source.empty() || target.empty()) throw CorpusError("build_vocabulary needs articles in both domains");
  struct Occurrence {
    std::string word;
    Domain domain;
  };
  // First appearance of each (word, domain) fixes id order; counts are per id key.
  std::vector<Occurrence> order;
  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, std::size_t> counts;
  auto scan = [&](std::span<const RawArticle> articles, Domain d) {
    for (const auto& a : articles) {
      std::vector<std::string> words;
      try {
        words = normalize_text(a.text);
      } catch (const CorpusError&) {
        continue;
      }
      for (auto& w : words) {
        const std::string scoped = w + '\x1f' + domain_code(d);
        ++counts[shared ? w : scoped];
        if (seen.insert(scoped).second) order.push_back({w, d});
      }
    }
  };
  scan(source, Domain::source);
  scan(target, Domain::target);

  Vocabulary vocab(shared);
  for (const auto& [word, d] : order) {
    const std::string k = shared ? word : word + '\x1f' + domain_code(d);
    if (counts[k] >= min_count) vocab.add(word, d);
  }
  return vocab;
}

std::vector<ArticleId> ReadingHistory::articles() const {
  std::vector<ArticleId> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.article);
  return out;
}

Corpus::Corpus(std::vector<RawArticle> raw, std::span<const EventRecord> events, std::size_t min_count,
               bool shared) {
  std::vector<RawArticle> by_domain[2];
  for (const auto& a : raw) by_domain[index_of(a.domain)].push_back(a);
  vocab_ = build_vocabulary(by_domain[0], by_domain[1], min_count, shared);

  std::unordered_set<std::string> rejected;
  for (auto& a : raw) {
    std::vector<WordId> tokens;
    try {
      tokens = tokenize(a.text, vocab_, a.domain);
    } catch (const CorpusError&) {
      rejected.insert(a.id);
      continue;
    }
    const ArticleId id = articles_.size();
    if (!article_index_.emplace(a.id, id).second) throw CorpusError("duplicate news id '" + a.id + "'");
    pools_[index_of(a.domain)].push_back(id);
    articles_.push_back({std::move(a.id), a.domain, std::move(tokens), std::move(a.text)});
  }

  for (const auto& e : events) {
    if (rejected.count(e.news)) continue;
    auto art = article_index_.find(e.news);
    if (art == article_index_.end()) throw CorpusError("event references unknown news id '" + e.news + "'");
    if (articles_[art->second].domain != e.domain) {
      throw CorpusError("event domain " + std::string(1, domain_code(e.domain)) + " does not match news '" +
                        e.news + "'");
    }
    auto [uit, inserted] = user_index_.try_emplace(e.user, user_ids_.size());
    if (inserted) {
      user_ids_.push_back(e.user);
      for (std::size_t d = 0; d < 2; ++d) {
        histories_[d].push_back({uit->second, static_cast<Domain>(d), {}});
      }
    }
    histories_[index_of(e.domain)][uit->second].events.push_back({art->second, e.timestamp});
  }

  for (auto& per_domain : histories_) {
    for (auto& h : per_domain) {
      auto& ev = h.events;
      std::stable_sort(ev.begin(), ev.end(),
                       [](const ReadingEvent& a, const ReadingEvent& b) { return a.timestamp < b.timestamp; });
      ev.erase(std::unique(ev.begin(), ev.end(),
                           [](const ReadingEvent& a, const ReadingEvent& b) {
                             return a.timestamp == b.timestamp && a.article == b.article;
                           }),
               ev.end());
      for (std::size_t i = 1; i < ev.size(); ++i) {
        if (ev[i].timestamp == ev[i - 1].timestamp) {
          throw CorpusError("user '" + user_ids_[h.user] + "' has two reads at timestamp " +
                            std::to_string(ev[i].timestamp));
        }
      }
    }
  }
}

std::optional<ArticleId> Corpus::find_article(std::string_view id) const {
  auto it = article_index_.find(std::string(id));
  if (it == article_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<UserId> Corpus::find_user(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<UserId> Corpus::users_in(Domain d) const {
  std::vector<UserId> out;
  for (const auto& h : histories_[index_of(d)]) {
    if (!h.empty()) out.push_back(h.user);
  }
  return out;
}

std::vector<UserId> Corpus::shared_users() const {
  std::vector<UserId> out;
  for (UserId u = 0; u < user_ids_.size(); ++u) {
    if (!histories_[0][u].empty() && !histories_[1][u].empty()) out.push_back(u);
  }
  return out;
}

std::vector<RawArticle> read_news(std::istream& in) {
  std::vector<RawArticle> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 3) {
      throw CorpusError("news line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    out.push_back({std::move(f[0]), parse_domain(f[1]), std::move(f[2])});
  }
  return out;
}

void write_news(std::ostream& out, std::span<const RawArticle> articles) {
  for (const auto& a : articles) out << a.id << '\t' << domain_code(a.domain) << '\t' << a.text << '\n';
}

std::vector<EventRecord> read_events(std::istream& in) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 4) {
      throw CorpusError("events line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
    }
    out.push_back({std::move(f[0]), std::move(f[1]), parse_domain(f[2]), parse_int(f[3], "timestamp")});
  }
  return out;
}

void write_events(std::ostream& out, std::span<const EventRecord> events) {
  for (const auto& e : events) {
    out << e.user << '\t' << e.news << '\t' << domain_code(e.domain) << '\t' << e.timestamp << '\n';
  }
}

Corpus load_corpus(const std::filesystem::path& news, const std::filesystem::path& events, std::size_t min_count,
                   bool shared) {
  std::ifstream news_in(news);
  if (!news_in) throw CorpusError("cannot open news file " + news.string());
  std::ifstream events_in(events);
  if (!events_in) throw CorpusError("cannot open events file " + events.string());
  auto raw = read_news(news_in);
  auto ev = read_events(events_in);
  return Corpus(std::move(raw), ev, min_count, shared);
}

MindImport import_mind(std::istream& news_tsv, std::istream& behaviors_tsv, std::string_view source_category,
                       std::string_view target_category) {
  MindImport out;
  std::unordered_map<std::string, Domain> domain_of;
  std::string line;
  while (std::getline(news_tsv, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() < 5) throw CorpusError("MIND news line needs at least 5 fields");
    Domain d;
    if (f[1] == source_category) {
      d = Domain::source;
    } else if (f[1] == target_category) {
      d = Domain::target;
    } else {
      continue;
    }
    std::string text = f[3];
    if (!f[4].empty()) text += " " + f[4];
    for (char& c : text) {
      if (c == '\t') c = ' ';
    }
    domain_of.emplace(f[0], d);
    out.articles.push_back({f[0], d, std::move(text)});
  }

  struct Seen {
    std::int64_t next = 0;
    std::unordered_set<std::string> clicked;
  };
  std::unordered_map<std::string, Seen> users;
  auto emit = [&](const std::string& user, const std::string& news) {
    auto d = domain_of.find(news);
    if (d == domain_of.end()) return;
    Seen& s = users[user];
    if (!s.clicked.insert(news).second) return;
    out.events.push_back({user, news, d->second, s.next++});
  };
  while (std::getline(behaviors_tsv, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() < 5) throw CorpusError("MIND behaviors line needs 5 fields");
    std::istringstream hist(f[3]);
    std::string item;
    while (hist >> item) emit(f[1], item);
    std::istringstream imp(f[4]);
    while (imp >> item) {
      const auto dash = item.rfind('-');
      if (dash != std::string::npos && item.substr(dash + 1) == "1") emit(f[1], item.substr(0, dash));
    }
  }
  return out;
}

std::vector<TrainingExample> generate_positive_examples(UserId user, Domain domain,
                                                        std::span<const ArticleId> sequence,
                                                        std::size_t history_length) {
  std::vector<TrainingExample> out;
  if (sequence.size() < 2 || history_length == 0) return out;
  out.reserve(sequence.size() - 1);
  for (std::size_t c = 1; c < sequence.size(); ++c) {
    const std::size_t begin = c > history_length ? c - history_length : 0;
    TrainingExample ex;
    ex.user = user;
    ex.domain = domain;
    ex.history.assign(sequence.begin() + static_cast<std::ptrdiff_t>(begin),
                      sequence.begin() + static_cast<std::ptrdiff_t>(c));
    ex.candidate = sequence[c];
    ex.label = 1;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TrainingExample> generate_positive_examples(const ReadingHistory& history, std::size_t history_length) {
  const auto seq = history.articles();
  return generate_positive_examples(history.user, history.domain, seq, history_length);
}

ArticleId sample_negative(std::span<const ArticleId> pool, const std::unordered_set<ArticleId>& exclude, Rng& rng) {
  if (pool.empty()) throw CorpusError("cannot sample a negative from an empty corpus");
  if (exclude.size() * 2 >= pool.size()) {
    std::vector<ArticleId> admissible;
    for (ArticleId a : pool) {
      if (!exclude.count(a)) admissible.push_back(a);
    }
    if (admissible.empty()) throw CorpusError("user has read the entire corpus; no negative can be sampled");
    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    return admissible[pick(rng)];
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  while (true) {
    const ArticleId a = pool[pick(rng)];
    if (!exclude.count(a)) return a;
  }
}

std::vector<ArticleId> sample_negatives_without_replacement(std::span<const ArticleId> pool,
                                                            const std::unordered_set<ArticleId>& exclude,
                                                            std::size_t count, Rng& rng) {
  std::vector<ArticleId> admissible;
  admissible.reserve(pool.size());
  for (ArticleId a : pool) {
    if (!exclude.count(a)) admissible.push_back(a);
  }
  if (admissible.size() < count) {
    throw CorpusError("only " + std::to_string(admissible.size()) + " unread articles available, need " +
                      std::to_string(count) + " negatives");
  }
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, admissible.size() - 1);
    std::swap(admissible[i], admissible[pick(rng)]);
  }
  admissible.resize(count);
  return admissible;
}

UserSplit partition_users(std::span<const UserId> users, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in (0, 1), got " + std::to_string(ratio));
  }
  if (users.size() < 2) throw std::invalid_argument("split needs at least 2 users");
  std::vector<UserId> order(users.begin(), users.end());
  std::sort(order.begin(), order.end());
  Rng rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(order.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);
  UserSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

void reserve_validation(UserSplit& split, const Corpus& corpus) {
  split.validation.clear();
  for (UserId u : split.train) {
    const auto& h = corpus.history(u, Domain::target);
    if (h.events.size() >= 2) split.validation.emplace(u, h.events.back().article);
  }
}

}  // namespace

UserSplit split_users(const Corpus& corpus, double ratio, std::uint64_t seed) {
  std::vector<UserId> all(corpus.user_count());
  for (UserId u = 0; u < all.size(); ++u) all[u] = u;
  UserSplit split = partition_users(all, ratio, seed);
  reserve_validation(split, corpus);
  return split;
}

void write_split(std::ostream& out, const Corpus& corpus, const UserSplit& split) {
  for (UserId u : split.train) out << corpus.user_id(u) << "\ttrain\n";
  for (UserId u : split.test) out << corpus.user_id(u) << "\ttest\n";
}

UserSplit read_split(std::istream& in, const Corpus& corpus) {
  UserSplit split;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 2) throw CorpusError("split line needs 2 fields: '" + line + "'");
    auto u = corpus.find_user(f[0]);
    if (!u) throw CorpusError("split references unknown user '" + f[0] + "'");
    if (f[1] == "train") {
      split.train.push_back(*u);
    } else if (f[1] == "test") {
      split.test.push_back(*u);
    } else {
      throw CorpusError("split role must be train or test, got '" + f[1] + "'");
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  reserve_validation(split, corpus);
  return split;
}

}  // namespace trnews
