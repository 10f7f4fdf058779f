#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using trnews::testing::read_file;
using trnews::testing::TempDir;

namespace {

constexpr const char* kSmallConfig =
    "seed = 5\n"
    "synth.users = 40\n"
    "synth.latent_dim = 4\n"
    "synth.source_vocab = 80\n"
    "synth.target_vocab = 80\n"
    "synth.topics = 6\n"
    "synth.articles_per_domain = 60\n"
    "synth.min_words = 4\n"
    "synth.max_words = 8\n"
    "synth.events_per_user = 10\n"
    "model.dim = 8\n"
    "model.cf_hidden = 16,8\n"
    "train.history_length = 3\n"
    "train.batch_size = 64\n"
    "train.max_iterations = 2\n"
    "train.patience = 1\n"
    "train.validation_negatives = 20\n"
    "eval.negatives = 20\n";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = trnews::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  TempDir dir{"cli"};
  fs::path cfg;
  fs::path out;

  void SetUp() override {
    cfg = dir.path() / "run.cfg";
    out = dir.path() / "out";
    std::ofstream(cfg) << kSmallConfig;
  }

  Outcome cmd(const std::string& name, std::vector<std::string> extra = {}, const fs::path& where = {}) {
    std::vector<std::string> args{name, "--config", cfg.string(), "--out", (where.empty() ? out : where).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }
};

}  // namespace

TEST(CliParse, UsageErrorsExitWithConfigCode) {
  EXPECT_EQ(run({}).code, trnews::cli::kExitConfigError);
  EXPECT_EQ(run({"bogus"}).code, trnews::cli::kExitConfigError);
  EXPECT_EQ(run({"train", "--unknown-flag"}).code, trnews::cli::kExitConfigError);
  EXPECT_EQ(run({"train", "--help"}).code, trnews::cli::kExitOk);
}

TEST_F(Cli, BadConfigNamesKey) {
  std::ofstream(cfg) << "model.dimension = 3\n";
  const Outcome r = cmd("synth");
  EXPECT_EQ(r.code, trnews::cli::kExitConfigError);
  EXPECT_NE(r.err.find("model.dimension"), std::string::npos) << r.err;
}

TEST_F(Cli, VariantOnlyForAblate) {
  EXPECT_EQ(cmd("train", {"--variant", "history=3"}).code, trnews::cli::kExitConfigError);
}

TEST_F(Cli, MissingInputsAreRuntimeErrors) {
  EXPECT_EQ(cmd("train").code, trnews::cli::kExitRuntimeError);
  ASSERT_EQ(cmd("synth").code, 0);
  const Outcome r = cmd("evaluate");
  EXPECT_EQ(r.code, trnews::cli::kExitRuntimeError);
  EXPECT_NE(r.err.find("missing checkpoint"), std::string::npos) << r.err;
}

TEST_F(Cli, PipelineWritesArtifacts) {
  ASSERT_EQ(cmd("synth").code, 0);
  ASSERT_EQ(cmd("prepare").code, 0);
  ASSERT_EQ(cmd("train").code, 0);
  const Outcome ev = cmd("evaluate");
  ASSERT_EQ(ev.code, 0) << ev.err;
  for (const char* f : {"news.tsv", "events.tsv", "vocab.tsv", "split.tsv", "model.ckpt", "train.log", "config.txt",
                        "report.tsv", "report.txt"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const std::string report = read_file(out / "report.tsv");
  EXPECT_EQ(report.rfind("name\tHR@5", 0), 0u);
  EXPECT_NE(report.find("TrNews-translator\t"), std::string::npos);
  EXPECT_NE(report.find("no-transfer\t"), std::string::npos);
  EXPECT_NE(read_file(out / "report.txt").find("auc="), std::string::npos);

  // Later commands fall back to the config saved in the output directory.
  EXPECT_EQ(run({"case-study", "--out", out.string()}).code, 0);
  EXPECT_TRUE(fs::exists(out / "case_study.txt"));
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path other = dir.path() / "other";
  for (const fs::path& where : {out, other}) {
    ASSERT_EQ(cmd("synth", {}, where).code, 0);
    ASSERT_EQ(cmd("prepare", {}, where).code, 0);
    ASSERT_EQ(cmd("train", {}, where).code, 0);
  }
  for (const char* f : {"news.tsv", "events.tsv", "vocab.tsv", "split.tsv", "model.ckpt"}) {
    EXPECT_EQ(read_file(out / f), read_file(other / f)) << f;
  }
  // Re-running in place reproduces the same checkpoint.
  const std::string before = read_file(out / "model.ckpt");
  ASSERT_EQ(cmd("train").code, 0);
  EXPECT_EQ(read_file(out / "model.ckpt"), before);
}

TEST_F(Cli, SeedFlagOverridesConfig) {
  const fs::path a = dir.path() / "a";
  const fs::path b = dir.path() / "b";
  ASSERT_EQ(cmd("synth", {"--seed", "9"}, a).code, 0);
  {
    std::string text = kSmallConfig;
    text.replace(text.find("seed = 5"), 8, "seed = 9");
    std::ofstream(cfg) << text;
  }
  ASSERT_EQ(cmd("synth", {}, b).code, 0);
  EXPECT_EQ(read_file(a / "events.tsv"), read_file(b / "events.tsv"));
  ASSERT_EQ(cmd("synth", {"--seed", "5"}, b).code, 0);
  EXPECT_NE(read_file(a / "events.tsv"), read_file(b / "events.tsv"));
}

TEST_F(Cli, AblateWritesPerVariantAndCombinedTables) {
  ASSERT_EQ(cmd("synth").code, 0);
  const Outcome bad = cmd("ablate", {"--variant", "history=7"});
  EXPECT_EQ(bad.code, trnews::cli::kExitConfigError);
  EXPECT_EQ(cmd("ablate", {"--variant", "nonsense"}).code, trnews::cli::kExitConfigError);

  const Outcome r = cmd("ablate", {"--variant", "training"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& v : trnews::cli::ablation_values("training")) {
    EXPECT_TRUE(fs::exists(out / "ablate" / "training" / v / "report.tsv")) << v;
    EXPECT_TRUE(fs::exists(out / "ablate" / "training" / v / "model.ckpt")) << v;
  }
  const std::string table = read_file(out / "ablate" / "training.tsv");
  EXPECT_NE(table.find("alternating\t"), std::string::npos);
  EXPECT_NE(table.find("separated\t"), std::string::npos);
  const std::string summary = read_file(out / "ablate" / "summary.tsv");
  EXPECT_NE(summary.find("training\tseparated\t"), std::string::npos);
}

TEST(CliGrids, EveryGridHasValues) {
  const auto grids = trnews::cli::ablation_grids();
  EXPECT_EQ(grids.size(), 7u);
  for (const auto& g : grids) EXPECT_FALSE(trnews::cli::ablation_values(g).empty()) << g;
  EXPECT_EQ(trnews::cli::ablation_values("history"), (std::vector<std::string>{"3", "5", "10", "15", "20"}));
  EXPECT_TRUE(trnews::cli::ablation_values("missing").empty());
}
