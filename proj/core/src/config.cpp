#include "trnews/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace trnews {

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  synth.seed = s;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0.0;
  if (!(in >> out) || !in.eof() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key, "expected true|false, got '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(to_size(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of integers");
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

template <typename Parse>
auto guarded(const std::string& key, const std::string& v, Parse parse) {
  try {
    return parse(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define TRNEWS_SIZE_FIELD(KEY, MEMBER)                                                                    \
  Field {                                                                                                 \
    KEY, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_size(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }                               \
  }
#define TRNEWS_DOUBLE_FIELD(KEY, MEMBER)                                                                    \
  Field {                                                                                                   \
    KEY, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_double(k, v); }, \
        [](const ExperimentConfig& c) { return fmt_double(c.MEMBER); }                                     \
  }
#define TRNEWS_BOOL_FIELD(KEY, MEMBER)                                                                    \
  Field {                                                                                                 \
    KEY, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_bool(k, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }               \
  }

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.set_seed(to_u64(k, v));
              c.seed_from_file = true;
            },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      Field{"corpus.news", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.news_path = v; },
            [](const ExperimentConfig& c) { return c.news_path.string(); }},
      Field{"corpus.events", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.events_path = v; },
            [](const ExperimentConfig& c) { return c.events_path.string(); }},
      Field{"corpus.mind_news",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mind_news_path = v; },
            [](const ExperimentConfig& c) { return c.mind_news_path.string(); }},
      Field{"corpus.mind_behaviors",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mind_behaviors_path = v; },
            [](const ExperimentConfig& c) { return c.mind_behaviors_path.string(); }},
      Field{"corpus.mind_source_category",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mind_source_category = v; },
            [](const ExperimentConfig& c) { return c.mind_source_category; }},
      Field{"corpus.mind_target_category",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mind_target_category = v; },
            [](const ExperimentConfig& c) { return c.mind_target_category; }},
      TRNEWS_BOOL_FIELD("corpus.shared_vocab", shared_vocab),
      TRNEWS_SIZE_FIELD("corpus.min_count", min_count),
      TRNEWS_DOUBLE_FIELD("split.ratio", split_ratio),
      TRNEWS_SIZE_FIELD("eval.negatives", eval_negatives),
      TRNEWS_DOUBLE_FIELD("train.lr", train.adam.learning_rate),
      TRNEWS_DOUBLE_FIELD("train.beta1", train.adam.beta1),
      TRNEWS_DOUBLE_FIELD("train.beta2", train.adam.beta2),
      TRNEWS_DOUBLE_FIELD("train.epsilon", train.adam.epsilon),
      TRNEWS_SIZE_FIELD("train.batch_size", train.batch_size),
      TRNEWS_SIZE_FIELD("train.max_iterations", train.max_iterations),
      TRNEWS_SIZE_FIELD("train.patience", train.patience),
      TRNEWS_SIZE_FIELD("train.history_length", train.history_length),
      TRNEWS_SIZE_FIELD("train.negative_ratio", train.negatives_per_positive),
      TRNEWS_SIZE_FIELD("train.validation_negatives", train.validation_negatives),
      Field{"train.mode",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.train.mode = guarded(k, v, [](const std::string& s) { return parse_training_mode(s); });
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.train.mode)); }},
      TRNEWS_SIZE_FIELD("model.dim", train.model.dim),
      TRNEWS_SIZE_FIELD("model.attention_hidden", train.model.attention_hidden),
      Field{"model.cf_hidden",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.train.model.cf_hidden = to_sizes(k, v); },
            [](const ExperimentConfig& c) { return join_sizes(c.train.model.cf_hidden); }},
      Field{"transfer.strategy",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.train.model.strategy = guarded(k, v, [](const std::string& s) { return parse_strategy(s); });
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.train.model.strategy)); }},
      TRNEWS_SIZE_FIELD("transfer.hidden_layers", train.model.translator_hidden_layers),
      TRNEWS_SIZE_FIELD("transfer.hidden_dim", train.model.translator_hidden_dim),
      TRNEWS_DOUBLE_FIELD("transfer.orthogonal_lambda", train.model.orthogonal_lambda),
      TRNEWS_DOUBLE_FIELD("transfer.e2e_weight", train.end_to_end_weight),
      TRNEWS_DOUBLE_FIELD("transfer.shared_user_fraction", train.shared_user_fraction),
      TRNEWS_SIZE_FIELD("synth.users", synth.users),
      TRNEWS_SIZE_FIELD("synth.latent_dim", synth.latent_dim),
      TRNEWS_SIZE_FIELD("synth.source_vocab", synth.source_vocab),
      TRNEWS_SIZE_FIELD("synth.target_vocab", synth.target_vocab),
      TRNEWS_DOUBLE_FIELD("synth.overlap", synth.overlap),
      TRNEWS_SIZE_FIELD("synth.topics", synth.topics),
      TRNEWS_DOUBLE_FIELD("synth.topic_concentration", synth.topic_concentration),
      TRNEWS_BOOL_FIELD("synth.identical_topics", synth.identical_topics),
      TRNEWS_SIZE_FIELD("synth.articles_per_domain", synth.articles_per_domain),
      TRNEWS_SIZE_FIELD("synth.min_words", synth.min_words),
      TRNEWS_SIZE_FIELD("synth.max_words", synth.max_words),
      TRNEWS_DOUBLE_FIELD("synth.primary_topic_weight", synth.primary_topic_weight),
      Field{"synth.map",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.synth.map = guarded(k, v, [](const std::string& s) { return parse_interest_map(s); });
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.synth.map)); }},
      TRNEWS_DOUBLE_FIELD("synth.map_gain", synth.map_gain),
      TRNEWS_SIZE_FIELD("synth.events_per_user", synth.events_per_user),
      TRNEWS_DOUBLE_FIELD("synth.affinity_scale", synth.affinity_scale),
  };
  return table;
}

#undef TRNEWS_SIZE_FIELD
#undef TRNEWS_DOUBLE_FIELD
#undef TRNEWS_BOOL_FIELD

/// Maps a validate() message ("train.patience must be positive") back to the
/// first key it mentions.
std::string key_in_message(const std::string& message) {
  std::string best;
  std::size_t best_pos = std::string::npos;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const auto pos = message.find(key);
    if (pos == std::string::npos) continue;
    if (best_pos == std::string::npos || pos < best_pos || (pos == best_pos && key.size() > best.size())) {
      best = key;
      best_pos = pos;
    }
  }
  return best;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number), "expected key=value, got '" + body + "'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number), "empty key");
    if (!out.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }
  return out;
}

ExperimentConfig make_config(const std::map<std::string, std::string>& entries, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  for (const auto& [key, value] : entries) {
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw ConfigError(key, "unknown configuration key");
    if (value.empty()) throw ConfigError(key, "missing value");
    it->set(c, key, value);
  }
  if (!base_dir.empty()) {
    for (auto* path : {&c.news_path, &c.events_path, &c.mind_news_path, &c.mind_behaviors_path}) {
      if (!path->empty() && path->is_relative()) *path = base_dir / *path;
    }
  }
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) throw ConfigError("split.ratio", "must lie in (0, 1)");
  if (c.min_count == 0) throw ConfigError("corpus.min_count", "must be positive");
  if (c.eval_negatives == 0) throw ConfigError("eval.negatives", "must be positive");
  for (auto validate : {std::function<void()>([&] { c.train.validate(); }), std::function<void()>([&] { c.synth.validate(); })}) {
    try {
      validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key_in_message(e.what()), e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  return make_config(parse_key_values(in), path.parent_path());
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  for (const auto& f : fields()) {
    const std::string value = f.get(config);
    if (!value.empty()) out << f.key << " = " << value << '\n';
  }
}

}  // namespace trnews
