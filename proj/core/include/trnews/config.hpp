#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

namespace trnews {

/// Malformed or invalid configuration; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  TrainConfig train;
  SynthConfig synth;
  std::filesystem::path news_path;
  std::filesystem::path events_path;
  /// MIND news.tsv / behaviors.tsv, converted by `prepare` when set.
  std::filesystem::path mind_news_path;
  std::filesystem::path mind_behaviors_path;
  std::string mind_source_category = "sports";
  std::string mind_target_category = "news";
  bool shared_vocab = true;
  std::size_t min_count = 1;
  /// Fraction of users kept for training; the rest are unseen test users.
  double split_ratio = 0.9;
  std::size_t eval_negatives = 99;
  std::uint64_t seed = 42;
  bool seed_from_file = false;

  /// Propagates `seed` into the train and synth sections.
  void set_seed(std::uint64_t s);
};

/// Flat key=value lines; '#' starts a comment. Throws ConfigError naming
/// the line for syntax errors and duplicate keys.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Applies `entries` over the defaults. Unknown keys, unparsable values and
/// out-of-range settings throw ConfigError naming the key. Relative corpus
/// paths are resolved against `base_dir`.
ExperimentConfig make_config(const std::map<std::string, std::string>& entries,
                             const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes every key with its current value, in the format load_config reads.
void write_config(std::ostream& out, const ExperimentConfig& config);

}  // namespace trnews
