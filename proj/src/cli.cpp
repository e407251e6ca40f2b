#include "redcut/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "redcut/cache.hpp"
#include "redcut/report.hpp"

namespace redcut {

namespace {

using nlohmann::json;

Dataset load_dataset(const RunConfig& cfg) {
  std::string format = cfg.format;
  if (format == "auto") {
    const auto ext = std::filesystem::path(cfg.dataset_path).extension().string();
    format = ext == ".csv" ? "csv" : (ext == ".libsvm" || ext == ".sparse" ? "sparse" : "csv");
  }
  if (format == "csv") return load_csv(cfg.dataset_path, cfg.label_column);
  if (format == "sparse") return load_sparse(cfg.dataset_path);
  throw ConfigError("unknown format '" + format + "' (expected csv or sparse)");
}

std::string effective_cache_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("REDCUT_CACHE"); env && *env) return env;
  return cfg.cache_dir;
}

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(cfg.out_path);
  if (!out) throw DataError("cannot write output file: " + cfg.out_path);
  out << text << '\n';
}

Method require_method(const std::string& name) {
  auto m = parse_method(name);
  if (!m) throw ConfigError("unknown method '" + name + "' (expected qpfs|tlkm|ikm|ikma)");
  return *m;
}

void validate_common(const RunConfig& cfg) {
  if (cfg.dataset_path.empty()) throw ConfigError("a dataset path is required");
  if (cfg.theta && !(*cfg.theta >= 0.0 && *cfg.theta <= 1.0))
    throw ConfigError("theta must lie in [0, 1]");
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (cfg.k < 1) throw ConfigError("k must be >= 1");
  if (cfg.k_init < 1) throw ConfigError("k-init must be >= 1");
  if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
  if (!(cfg.C > 0.0)) throw ConfigError("c must be positive");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
}

}  // namespace

SelectorSpec selector_spec_from(const RunConfig& cfg, const std::string& method_name) {
  SelectorSpec spec;
  spec.method = require_method(method_name);
  spec.theta = cfg.theta;
  spec.k = cfg.k;
  spec.k_init = cfg.k_init;
  spec.tau = cfg.tau;
  spec.levels = cfg.levels;
  spec.qp_tol = cfg.tol;
  spec.freeze_theta = cfg.freeze_theta;
  spec.normalized_q = cfg.normalized_similarity;
  return spec;
}

SplitSpec parse_splits(const std::string& text, std::uint64_t seed) {
  if (text == "loocv") return SplitSpec::loocv();
  if (text.rfind("holdout:", 0) == 0) {
    const std::string rest = text.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw ConfigError("splits: expected holdout:FRAC:REPS, got '" + text + "'");
    try {
      const double frac = std::stod(rest.substr(0, colon));
      const int reps = std::stoi(rest.substr(colon + 1));
      return SplitSpec::holdout(frac, reps, seed);
    } catch (const std::exception&) {
      throw ConfigError("splits: cannot parse '" + text + "'");
    }
  }
  throw ConfigError("splits: expected holdout:FRAC:REPS or loocv, got '" + text + "'");
}

std::vector<int> parse_k_grid(const std::string& text, int m) {
  int lo = 1, hi = std::min(100, m), step = 1;
  if (!text.empty()) {
    int fields[3] = {0, 0, 1};
    int count = 0;
    std::size_t pos = 0;
    try {
      while (count < 3) {
        std::size_t next = text.find(':', pos);
        const std::string tok =
            next == std::string::npos ? text.substr(pos) : text.substr(pos, next - pos);
        fields[count++] = std::stoi(tok);
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    } catch (const std::exception&) {
      throw ConfigError("k-grid: cannot parse '" + text + "' (expected A:B[:STEP])");
    }
    if (count < 2) throw ConfigError("k-grid: expected A:B[:STEP], got '" + text + "'");
    lo = fields[0];
    hi = fields[1];
    step = count == 3 ? fields[2] : 1;
  }
  if (lo < 1 || hi < lo || step < 1)
    throw ConfigError("k-grid: need 1 <= A <= B and STEP >= 1");
  std::vector<int> grid;
  for (int k = lo; k <= hi; k += step) grid.push_back(k);
  return grid;
}

namespace {

// Shared select pipeline: load, normalize, discretize, (cached) similarity.
struct Prepared {
  Dataset norm;
  DiscretizedDataset codes;
  std::unique_ptr<SelectionContext> ctx;
  double similarity_sec = 0.0;
  bool cache_hit = false;
};

Prepared prepare(const RunConfig& cfg) {
  Prepared prep;
  Dataset raw = load_dataset(cfg);
  prep.norm = normalize(raw);
  prep.codes = discretize(prep.norm);

  const auto t0 = std::chrono::steady_clock::now();
  const std::string cache_dir = effective_cache_dir(cfg);
  if (!cache_dir.empty()) {
    const std::uint64_t key =
        dataset_hash(prep.codes, prep.norm.labels, cfg.normalized_similarity);
    const std::string path = cache_path(cache_dir, key);
    if (auto cached = load_similarity(path)) {
      prep.ctx = std::make_unique<SelectionContext>(std::move(*cached), prep.codes);
      prep.cache_hit = true;
    } else {
      prep.ctx = std::make_unique<SelectionContext>(prep.codes, prep.norm.labels, cfg.threads,
                                                    cfg.normalized_similarity);
      save_similarity(path, prep.ctx->similarity());
    }
  } else {
    prep.ctx = std::make_unique<SelectionContext>(prep.codes, prep.norm.labels, cfg.threads,
                                                  cfg.normalized_similarity);
  }
  prep.similarity_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return prep;
}

}  // namespace

int cmd_select(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.methods.size() != 1) throw ConfigError("select needs exactly one --method");
  Prepared prep = prepare(cfg);
  SelectorSpec spec = selector_spec_from(cfg, cfg.methods[0]);
  SelectionResult result = run_selector(*prep.ctx, spec);
  result.params.seed = cfg.seed;

  json j = to_json(result);
  j["dataset"] = prep.norm.name;
  j["n_features"] = prep.norm.n_features();
  j["n_instances"] = prep.norm.n_instances();
  write_output(cfg, j.dump(2));
  std::cerr << "redcut select: method=" << method_name(spec.method)
            << " seed=" << cfg.seed << " similarity="
            << (prep.cache_hit ? "cached" : "computed") << " ("
            << prep.similarity_sec << "s), selector " << result.instr.wall_time_sec
            << "s\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.methods.size() != 1) throw ConfigError("eval needs exactly one --method");
  Dataset raw = load_dataset(cfg);
  const SplitSpec split_spec = parse_splits(cfg.splits, cfg.seed);
  const SplitPlan plan = make_splits(raw, split_spec);
  const std::vector<int> k_grid = parse_k_grid(cfg.k_grid, raw.n_features());
  SelectorSpec spec = selector_spec_from(cfg, cfg.methods[0]);

  EvalOptions opts;
  opts.C = cfg.C;
  opts.select_per_fold = !cfg.select_once;
  opts.stats_on_train = cfg.stats_on_train;
  opts.threads = cfg.threads;

  EvalReport report = topk_curve(raw, spec, k_grid, plan, opts);
  report.seed = cfg.seed;

  write_output(cfg, to_json(report).dump(2));
  if (!cfg.out_path.empty()) {
    std::filesystem::path csv_path(cfg.out_path);
    csv_path.replace_extension(".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write output file: " + csv_path.string());
    csv << to_csv(report);
  }
  std::cerr << "redcut eval: method=" << report.method << " seed=" << cfg.seed
            << " repeats=" << report.n_repeats << " timings: similarity "
            << report.timings.similarity_sec << "s, selection " << report.timings.selection_sec
            << "s, training " << report.timings.training_sec << "s, total "
            << report.timings.total_sec << "s\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.methods.size() < 2) throw ConfigError("bench needs at least two --method values");
  Dataset raw = load_dataset(cfg);
  const SplitSpec split_spec = parse_splits(cfg.splits, cfg.seed);
  const SplitPlan plan = make_splits(raw, split_spec);
  const std::vector<int> k_grid = parse_k_grid(cfg.k_grid, raw.n_features());

  EvalOptions opts;
  opts.C = cfg.C;
  opts.select_per_fold = !cfg.select_once;
  opts.stats_on_train = cfg.stats_on_train;
  opts.threads = cfg.threads;

  json rows = json::array();
  std::ostringstream table;
  table << "method          time_s  distance_count  qp_calls  lowest_error  features_at_lowest\n";
  for (const auto& name : cfg.methods) {
    SelectorSpec spec = selector_spec_from(cfg, name);
    EvalReport rep = topk_curve(raw, spec, k_grid, plan, opts);
    rep.seed = cfg.seed;
    double lowest = std::numeric_limits<double>::infinity();
    int at_k = 0;
    for (const auto& [k, st] : rep.per_k_error) {
      if (st.mean < lowest) {
        lowest = st.mean;
        at_k = k;
      }
    }
    rows.push_back(json{{"method", rep.method},
                        {"selection_time_sec", rep.timings.selection_sec},
                        {"similarity_time_sec", rep.timings.similarity_sec},
                        {"total_time_sec", rep.timings.total_sec},
                        {"distance_count", rep.counters.distance_count},
                        {"qp_calls", rep.counters.qp_calls},
                        {"lowest_error", lowest},
                        {"features_at_lowest_error", at_k},
                        {"baseline_error", rep.baseline_error.mean}});
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %7.2f %15llu %9d %13.2f %19d\n", rep.method.c_str(),
                  rep.timings.selection_sec,
                  static_cast<unsigned long long>(rep.counters.distance_count),
                  rep.counters.qp_calls, lowest, at_k);
    table << line;
  }
  json out{{"schema_version", kReportSchemaVersion},
           {"seed", cfg.seed},
           {"k_grid", k_grid},
           {"rows", std::move(rows)}};
  write_output(cfg, out.dump(2));
  std::cerr << table.str();
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"redcut: feature selection via simplex QP with k-means acceleration"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string label_column_text = "-1";

  auto add_common = [&](CLI::App* cmd, bool multi_method) {
    cmd->add_option("dataset", cfg.dataset_path, "dataset file")->required();
    if (multi_method)
      cmd->add_option("--method", cfg.methods, "methods to compare")->required();
    else
      cmd->add_option("--method", cfg.methods, "qpfs|tlkm|ikm|ikma")->required();
    cmd->add_option("--theta", cfg.theta, "redundancy/relevance trade-off in [0,1]");
    cmd->add_option("--k", cfg.k, "subclusters per split (ikm/ikma)");
    cmd->add_option("--k-init", cfg.k_init, "initial cluster count (tlkm)");
    cmd->add_option("--tau", cfg.tau, "cluster radius threshold in (0,1]");
    cmd->add_option("--levels", cfg.levels, "max refinement levels");
    cmd->add_option("--c", cfg.C, "SVM regularization C");
    cmd->add_option("--seed", cfg.seed, "RNG seed (default 13)");
    cmd->add_option("--tol", cfg.tol, "QP KKT tolerance");
    cmd->add_option("--splits", cfg.splits, "holdout:FRAC:REPS or loocv");
    cmd->add_option("--k-grid", cfg.k_grid, "top-k grid A:B[:STEP]");
    cmd->add_option("--format", cfg.format, "csv|sparse|auto");
    cmd->add_option("--label-column", label_column_text, "label column index or name (csv)");
    cmd->add_option("--cache", cfg.cache_dir, "similarity cache directory");
    cmd->add_option("--out", cfg.out_path, "output path (default stdout)");
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--select-once", cfg.select_once, "select on full data instead of per fold");
    cmd->add_flag("--stats-on-train", cfg.stats_on_train,
                  "discretization statistics from the training fold only");
    cmd->add_flag("--normalized-similarity", cfg.normalized_similarity,
                  "use normalized similarity instead of raw mutual information");
    cmd->add_flag("--freeze-theta", cfg.freeze_theta,
                  "reuse the top-level theta in nested QPs");
  };

  CLI::App* select_cmd = app.add_subcommand("select", "rank features, emit JSON");
  CLI::App* eval_cmd = app.add_subcommand("eval", "error-rate curve over top-k features");
  CLI::App* bench_cmd = app.add_subcommand("bench", "compare methods under identical splits");
  add_common(select_cmd, false);
  add_common(eval_cmd, false);
  add_common(bench_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    // Numeric text means an index; anything else is a header name.
    try {
      std::size_t used = 0;
      const int idx = std::stoi(label_column_text, &used);
      if (used == label_column_text.size())
        cfg.label_column = idx;
      else
        cfg.label_column = label_column_text;
    } catch (const std::exception&) {
      cfg.label_column = label_column_text;
    }

    if (select_cmd->parsed()) return cmd_select(cfg);
    if (eval_cmd->parsed()) return cmd_eval(cfg);
    if (bench_cmd->parsed()) return cmd_bench(cfg);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace redcut
