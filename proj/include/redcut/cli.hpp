#pragma once

#include <optional>
#include <string>
#include <vector>

#include "redcut/dataset.hpp"
#include "redcut/eval.hpp"

namespace redcut {

/// Everything a CLI run needs, validated before any computation starts.
struct RunConfig {
  std::string dataset_path;
  std::string format = "auto";  // csv | sparse | auto (by extension)
  LabelColumn label_column = -1;

  std::vector<std::string> methods;  // one for select/eval, two or more for bench
  std::optional<double> theta;
  int k = 15;
  int k_init = 15;
  double tau = 0.8;
  int levels = 3;
  double C = 1.0;
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-7;

  std::string splits = "holdout:0.6:100";  // or "loocv"
  std::string k_grid;                      // "A:B[:STEP]"; empty: 1..min(100, M)
  std::string cache_dir;                   // REDCUT_CACHE env overrides
  std::string out_path;                    // empty: stdout
  int threads = 0;

  bool select_once = false;      // selection on the full data, not per fold
  bool stats_on_train = false;   // discretization stats from the training fold
  bool normalized_similarity = false;
  bool freeze_theta = false;
};

SelectorSpec selector_spec_from(const RunConfig& cfg, const std::string& method_name);
SplitSpec parse_splits(const std::string& text, std::uint64_t seed);
std::vector<int> parse_k_grid(const std::string& text, int m);

int cmd_select(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);

/// Parses argv, dispatches, and maps errors to exit codes
/// (0 ok, 2 config, 3 data, 4 numerical).
int run_cli(int argc, const char* const* argv);

}  // namespace redcut
