#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trnews::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"train", "--config", "run.cfg", "--out", "runs/a"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Ablation grids in the order `ablate` runs them.
std::vector<std::string> ablation_grids();
/// Variant labels of one grid (e.g. "3", "5", ... for "history").
std::vector<std::string> ablation_values(const std::string& grid);

}  // namespace trnews::cli
