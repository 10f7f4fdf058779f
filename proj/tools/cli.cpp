#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "trnews/checkpoint.hpp"
#include "trnews/config.hpp"
#include "trnews/diagnostics.hpp"
#include "trnews/evaluation.hpp"
#include "trnews/synthetic.hpp"
#include "trnews/training.hpp"

namespace trnews::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kNewsFile = "news.tsv";
constexpr const char* kEventsFile = "events.tsv";
constexpr const char* kVocabFile = "vocab.tsv";
constexpr const char* kSplitFile = "split.tsv";
constexpr const char* kCheckpointFile = "model.ckpt";
constexpr const char* kLogFile = "train.log";
constexpr const char* kConfigFile = "config.txt";
constexpr const char* kReportFile = "report.tsv";
constexpr const char* kReportKvFile = "report.txt";
constexpr std::size_t kCaseStudyUsers = 3;

/// Runtime failure that maps to exit code 2.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = "trnews-out";
  std::optional<std::uint64_t> seed;
  std::string variant;
};

struct Context {
  Options opts;
  ExperimentConfig cfg;
  fs::path out;
  std::ostream& log;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RunError("cannot write " + path.string());
  return f;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RunError("cannot read " + path.string());
  return f;
}

fs::path news_path(const Context& c) { return c.cfg.news_path.empty() ? c.out / kNewsFile : c.cfg.news_path; }
fs::path events_path(const Context& c) { return c.cfg.events_path.empty() ? c.out / kEventsFile : c.cfg.events_path; }

Corpus load(const Context& c, bool shared) {
  const fs::path news = news_path(c);
  const fs::path events = events_path(c);
  for (const auto& p : {news, events}) {
    if (!fs::exists(p)) throw RunError("missing corpus file " + p.string() + " (run synth or prepare first)");
  }
  return load_corpus(news, events, c.cfg.min_count, shared);
}

UserSplit load_or_make_split(const Context& c, const Corpus& corpus) {
  const fs::path path = c.out / kSplitFile;
  if (fs::exists(path)) {
    auto in = open_in(path);
    return read_split(in, corpus);
  }
  return split_users(corpus, c.cfg.split_ratio, c.cfg.seed);
}

void write_file_config(const Context& c) {
  auto f = open_out(c.out / kConfigFile);
  write_config(f, c.cfg);
}

// ---------------------------------------------------------------------------

int cmd_synth(Context& c) {
  const SynthCorpus synth = generate(c.cfg.synth);
  {
    auto f = open_out(c.out / kNewsFile);
    write_news(f, synth.articles);
  }
  {
    auto f = open_out(c.out / kEventsFile);
    write_events(f, synth.events);
  }
  c.log << "wrote " << synth.articles.size() << " articles and " << synth.events.size() << " events for "
        << c.cfg.synth.users << " users to " << c.out.string() << '\n';
  return kExitOk;
}

int cmd_prepare(Context& c) {
  if (!c.cfg.mind_news_path.empty() || !c.cfg.mind_behaviors_path.empty()) {
    if (c.cfg.mind_news_path.empty() || c.cfg.mind_behaviors_path.empty()) {
      throw ConfigError("corpus.mind_news", "corpus.mind_news and corpus.mind_behaviors must be set together");
    }
    auto news_in = open_in(c.cfg.mind_news_path);
    auto behaviors_in = open_in(c.cfg.mind_behaviors_path);
    const MindImport mind =
        import_mind(news_in, behaviors_in, c.cfg.mind_source_category, c.cfg.mind_target_category);
    c.cfg.news_path = c.out / kNewsFile;
    c.cfg.events_path = c.out / kEventsFile;
    auto news_out = open_out(c.cfg.news_path);
    write_news(news_out, mind.articles);
    auto events_out = open_out(c.cfg.events_path);
    write_events(events_out, mind.events);
    c.log << "imported " << mind.articles.size() << " MIND articles and " << mind.events.size() << " events\n";
  }
  const Corpus corpus = load(c, c.cfg.shared_vocab);
  const UserSplit split = split_users(corpus, c.cfg.split_ratio, c.cfg.seed);
  {
    auto f = open_out(c.out / kVocabFile);
    corpus.vocabulary().write(f);
  }
  {
    auto f = open_out(c.out / kSplitFile);
    write_split(f, corpus, split);
  }
  write_file_config(c);
  c.log << "vocabulary " << corpus.vocabulary().size() << " entries; " << split.train.size() << " train users, "
        << split.test.size() << " test users, " << split.validation.size() << " validation reads\n";
  return kExitOk;
}

TrainResult train_into(const Context& c, const ExperimentConfig& cfg, const Corpus& corpus, const UserSplit& split,
                       const fs::path& dir) {
  fs::create_directories(dir);
  TrainResult result = train(cfg.train, corpus, split);
  save_checkpoint(dir / kCheckpointFile, result.model.params());
  auto log = open_out(dir / kLogFile);
  write_training_log(log, result.log);
  for (const auto& w : result.warnings) c.log << "warning: " << w << '\n';
  return result;
}

std::pair<MetricsReport, MetricsReport> evaluate_into(const ExperimentConfig& cfg, const TrNewsModel& model,
                                                      const Corpus& corpus, const UserSplit& split,
                                                      const fs::path& dir, const std::string& name) {
  auto cases = build_eval_cases(corpus, split.test, cfg.train.history_length, cfg.seed, cfg.eval_negatives);
  if (cases.empty()) throw RunError("no evaluation cases: test users need at least two target-domain reads");
  const MetricsReport translated = evaluate(model, corpus, cases, ScoringMode::translated, cfg.train.history_length);
  const MetricsReport baseline = evaluate(model, corpus, cases, ScoringMode::zero_vector, cfg.train.history_length);
  auto table = open_out(dir / kReportFile);
  write_report_row(table, name, translated, true);
  write_report_row(table, "no-transfer", baseline, false);
  auto kv = open_out(dir / kReportKvFile);
  write_report_kv(kv, translated);
  return {translated, baseline};
}

int cmd_train(Context& c) {
  const Corpus corpus = load(c, c.cfg.shared_vocab);
  const UserSplit split = load_or_make_split(c, corpus);
  const TrainResult r = train_into(c, c.cfg, corpus, split, c.out);
  write_file_config(c);
  c.log << "trained " << r.iterations_run << " iterations (" << to_string(c.cfg.train.mode) << ", "
        << to_string(c.cfg.train.model.strategy) << "); best validation AUC " << std::fixed << std::setprecision(4)
        << r.best_validation << " at iteration " << r.best_iteration << "; checkpoint hash " << std::hex
        << checkpoint_hash(r.model.params()) << std::dec << '\n';
  c.log.unsetf(std::ios::floatfield);
  return kExitOk;
}

TrNewsModel load_model(const Context& c) {
  const fs::path path = c.out / kCheckpointFile;
  if (!fs::exists(path)) throw RunError("missing checkpoint " + path.string() + " (run train first)");
  return TrNewsModel(c.cfg.train.model, load_checkpoint(path));
}

int cmd_evaluate(Context& c) {
  const Corpus corpus = load(c, c.cfg.shared_vocab);
  const TrNewsModel model = load_model(c);
  if (model.vocab_size() != corpus.vocabulary().size()) {
    throw RunError("checkpoint vocabulary (" + std::to_string(model.vocab_size()) + ") does not match corpus (" +
                   std::to_string(corpus.vocabulary().size()) + ")");
  }
  const UserSplit split = load_or_make_split(c, corpus);
  const std::string name = "TrNews-" + std::string(to_string(c.cfg.train.model.strategy));
  const auto [translated, baseline] = evaluate_into(c.cfg, model, corpus, split, c.out, name);
  write_report_row(c.log, name, translated, true);
  write_report_row(c.log, "no-transfer", baseline, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::vector<std::string>>>& grids() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> g = {
      {"strategy", {"identity", "linear", "orthogonal", "mlp", "translator"}},
      {"sharing", {"shared", "unshared"}},
      {"training", {"alternating", "separated"}},
      {"objective", {"two_stage", "end_to_end"}},
      {"history", {"3", "5", "10", "15", "20"}},
      {"dim", {"32", "64", "100", "128", "200"}},
      {"shared_users", {"90", "70", "50", "30"}},
  };
  return g;
}

void apply_variant(ExperimentConfig& cfg, const std::string& grid, const std::string& value) {
  if (grid == "strategy") {
    cfg.train.model.strategy = parse_strategy(value);
  } else if (grid == "sharing") {
    cfg.shared_vocab = value == "shared";
  } else if (grid == "training") {
    cfg.train.mode = parse_training_mode(value);
  } else if (grid == "objective") {
    cfg.train.mode = value == "end_to_end" ? TrainingMode::end_to_end : TrainingMode::alternating;
  } else if (grid == "history") {
    cfg.train.history_length = std::stoul(value);
  } else if (grid == "dim") {
    cfg.train.model.dim = std::stoul(value);
  } else if (grid == "shared_users") {
    cfg.train.shared_user_fraction = std::stod(value) / 100.0;
  }
}

int cmd_ablate(Context& c) {
  std::vector<std::pair<std::string, std::vector<std::string>>> selected;
  if (c.opts.variant.empty() || c.opts.variant == "all") {
    selected = grids();
  } else {
    const auto eq = c.opts.variant.find('=');
    const std::string grid = c.opts.variant.substr(0, eq);
    auto it = std::find_if(grids().begin(), grids().end(), [&](const auto& g) { return g.first == grid; });
    if (it == grids().end()) throw ConfigError("--variant", "unknown ablation grid '" + grid + "'");
    std::vector<std::string> values = it->second;
    if (eq != std::string::npos) {
      const std::string value = c.opts.variant.substr(eq + 1);
      if (std::find(values.begin(), values.end(), value) == values.end()) {
        throw ConfigError("--variant", "unknown value '" + value + "' for grid '" + grid + "'");
      }
      values = {value};
    }
    selected.emplace_back(grid, values);
  }

  std::optional<Corpus> corpora[2];
  auto corpus_for = [&](bool shared) -> const Corpus& {
    auto& slot = corpora[shared ? 1 : 0];
    if (!slot) slot.emplace(load(c, shared));
    return *slot;
  };

  const fs::path root = c.out / "ablate";
  fs::create_directories(root);
  auto summary = open_out(root / "summary.tsv");
  summary << "grid\tvariant\tHR@5\tHR@10\tNDCG@5\tNDCG@10\tMRR\tAUC\n";
  for (const auto& [grid, values] : selected) {
    auto table = open_out(root / (grid + ".tsv"));
    bool header = true;
    for (const auto& value : values) {
      ExperimentConfig cfg = c.cfg;
      apply_variant(cfg, grid, value);
      try {
        cfg.train.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--variant", e.what());
      }
      const Corpus& corpus = corpus_for(cfg.shared_vocab);
      const UserSplit split = split_users(corpus, cfg.split_ratio, cfg.seed);
      const fs::path dir = root / grid / value;
      c.log << "ablate " << grid << '=' << value << " ..." << std::flush;
      const TrainResult r = train_into(c, cfg, corpus, split, dir);
      const auto [translated, baseline] = evaluate_into(cfg, r.model, corpus, split, dir, grid + "=" + value);
      write_report_row(table, value, translated, header);
      header = false;
      std::ostringstream row;
      write_report_row(row, grid + '\t' + value, translated, false);
      summary << row.str() << std::flush;
      c.log << " AUC " << std::fixed << std::setprecision(2) << translated.auc << '\n';
      c.log.unsetf(std::ios::floatfield);
    }
  }
  c.log << "ablation tables written to " << root.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_grad_check(Context& c) {
  const auto checks = run_gradient_checks(c.cfg.seed);
  write_gradient_checks(c.log, checks);
  auto f = open_out(c.out / "grad_check.txt");
  write_gradient_checks(f, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const LossCheck& l) { return l.passed; });
  return ok ? kExitOk : kExitRuntimeError;
}

int cmd_case_study(Context& c) {
  const Corpus corpus = load(c, c.cfg.shared_vocab);
  const TrNewsModel model = load_model(c);
  const UserSplit split = load_or_make_split(c, corpus);
  const std::size_t L = c.cfg.train.history_length;
  std::vector<UserId> eligible;
  for (UserId u : split.test) {
    if (corpus.history(u, Domain::target).events.size() >= 2) eligible.push_back(u);
  }
  if (eligible.empty()) throw RunError("no test user has two or more target-domain reads");
  Rng rng = make_rng(c.cfg.seed, "case-study");
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(std::min(eligible.size(), kCaseStudyUsers));
  std::sort(eligible.begin(), eligible.end());

  auto f = open_out(c.out / "case_study.txt");
  for (UserId u : eligible) {
    const auto reads = corpus.history(u, Domain::target).articles();
    const ArticleId candidate = reads.back();
    const std::size_t begin = reads.size() - 1 > L ? reads.size() - 1 - L : 0;
    const std::vector<ArticleId> history(reads.begin() + static_cast<std::ptrdiff_t>(begin), reads.end() - 1);
    const auto rows = attention_report(model, corpus, Domain::target, history, candidate);
    for (std::ostream* o : {static_cast<std::ostream*>(&f), &c.log}) {
      *o << "user " << corpus.user_id(u) << " candidate " << corpus.article(candidate).id << '\n';
      write_attention_report(*o, rows);
      *o << '\n';
    }
  }
  return kExitOk;
}

int dispatch(Context& c) {
  const std::string& cmd = c.opts.command;
  if (!c.opts.variant.empty() && cmd != "ablate") {
    throw ConfigError("--variant", "only the ablate command takes a variant");
  }
  if (cmd == "synth") return cmd_synth(c);
  if (cmd == "prepare") return cmd_prepare(c);
  if (cmd == "train") return cmd_train(c);
  if (cmd == "evaluate") return cmd_evaluate(c);
  if (cmd == "ablate") return cmd_ablate(c);
  if (cmd == "grad-check") return cmd_grad_check(c);
  if (cmd == "case-study") return cmd_case_study(c);
  throw ConfigError("command", "unknown command '" + cmd + "'");
}

}  // namespace

std::vector<std::string> ablation_grids() {
  std::vector<std::string> out;
  for (const auto& g : grids()) out.push_back(g.first);
  return out;
}

std::vector<std::string> ablation_values(const std::string& grid) {
  for (const auto& g : grids()) {
    if (g.first == grid) return g.second;
  }
  return {};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TrNews cross-domain news recommendation workbench", "trnews"};
  app.require_subcommand(1);
  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Generate a synthetic two-domain corpus"},
      {"prepare", "Build the vocabulary and user split (imports MIND when configured)"},
      {"train", "Train networks and translator; writes a checkpoint and log"},
      {"evaluate", "Score unseen test users with the 99-negative protocol"},
      {"ablate", "Run ablation grids (--variant GRID or GRID=VALUE)"},
      {"grad-check", "Compare analytic and finite-difference gradients"},
      {"case-study", "Attention weights for sampled test users"},
  };
  std::uint64_t seed = 0;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "key=value configuration file");
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "root seed (overrides the config file)");
    sub->add_option("--variant", opts.variant, "ablation grid, or GRID=VALUE");
    sub->callback([&opts, sub] { opts.command = sub->get_name(); });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }

  try {
    ExperimentConfig cfg;
    fs::path out_dir = opts.out_dir;
    if (!opts.config_path.empty()) {
      cfg = load_config(opts.config_path);
    } else if (fs::exists(out_dir / kConfigFile) && opts.command != "synth") {
      cfg = load_config(out_dir / kConfigFile);
    }
    if (opts.seed) cfg.set_seed(*opts.seed);
    fs::create_directories(out_dir);
    Context ctx{opts, cfg, out_dir, out};
    return dispatch(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace trnews::cli
