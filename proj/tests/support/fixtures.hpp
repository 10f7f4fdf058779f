#pragma once

#include <cstdint>
#include <filesystem>

#include "trnews/corpus.hpp"
#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

namespace trnews::testing {

/// 40 users, 60 articles and 10 reads per user in each domain.
SynthConfig small_synth_config(std::uint64_t seed = 1);
Corpus small_corpus(std::uint64_t seed = 1);
/// D = 8, L = 3, short iteration budget.
TrainConfig small_train_config(std::uint64_t seed = 1);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace trnews::testing
