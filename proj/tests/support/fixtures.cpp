#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace trnews::testing {

SynthConfig small_synth_config(std::uint64_t seed) {
  SynthConfig c;
  c.users = 40;
  c.latent_dim = 4;
  c.source_vocab = 80;
  c.target_vocab = 80;
  c.topics = 6;
  c.articles_per_domain = 60;
  c.min_words = 4;
  c.max_words = 8;
  c.events_per_user = 10;
  c.seed = seed;
  return c;
}

Corpus small_corpus(std::uint64_t seed) {
  const SynthCorpus s = generate(small_synth_config(seed));
  return Corpus(s.articles, s.events, 1, true);
}

TrainConfig small_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.model.dim = 8;
  c.model.cf_hidden = {16, 8};
  c.history_length = 3;
  c.batch_size = 64;
  c.max_iterations = 4;
  c.patience = 2;
  c.validation_negatives = 20;
  c.seed = seed;
  return c;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("trnews-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace trnews::testing
