#include "redcut/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace redcut {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

class LabelEncoder {
 public:
  int encode(std::string_view raw) {
    std::string key(trim(raw));
    auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(ids_.size()));
    return it->second;
  }
  int n_classes() const { return static_cast<int>(ids_.size()); }

 private:
  std::unordered_map<std::string, int> ids_;
};

std::string dataset_name_from(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace

Dataset load_csv(const std::string& path, const LabelColumn& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError(path + ": no instances");

  std::vector<std::string> first = split_csv_line(lines[0]);
  const int n_cols = static_cast<int>(first.size());
  if (n_cols < 2) throw DataError(path + ": need at least one feature column and a label column");

  // Resolve the label column; a name requires a header row.
  int label_idx = -1;
  bool has_header = false;
  if (std::holds_alternative<std::string>(label_column)) {
    const std::string& want = std::get<std::string>(label_column);
    for (int c = 0; c < n_cols; ++c) {
      if (std::string(trim(first[c])) == want) label_idx = c;
    }
    if (label_idx < 0) throw DataError(path + ": no column named '" + want + "'");
    has_header = true;
  } else {
    int idx = std::get<int>(label_column);
    if (idx < 0) idx += n_cols;
    if (idx < 0 || idx >= n_cols)
      throw ConfigError("label column index out of range for " + std::to_string(n_cols) + " columns");
    label_idx = idx;
    // Header detection: any non-numeric cell outside the label column.
    double tmp;
    for (int c = 0; c < n_cols; ++c) {
      if (c == label_idx) continue;
      if (!parse_double(first[c], tmp)) has_header = true;
    }
  }

  std::vector<std::string> feature_names;
  if (has_header) {
    for (int c = 0; c < n_cols; ++c) {
      if (c != label_idx) feature_names.emplace_back(trim(first[c]));
    }
  }

  const int data_begin = has_header ? 1 : 0;
  const int n = static_cast<int>(lines.size()) - data_begin;
  if (n < 1) throw DataError(path + ": no instances");
  const int m = n_cols - 1;

  Dataset d;
  d.name = dataset_name_from(path);
  d.values.resize(m, n);
  d.labels.resize(n);
  LabelEncoder enc;

  for (int r = 0; r < n; ++r) {
    const std::string& raw = lines[data_begin + r];
    std::vector<std::string> cells = split_csv_line(raw);
    if (static_cast<int>(cells.size()) != n_cols)
      throw DataError(path + ": row " + std::to_string(data_begin + r + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(n_cols));
    int f = 0;
    for (int c = 0; c < n_cols; ++c) {
      if (c == label_idx) {
        if (trim(cells[c]).empty())
          throw DataError(path + ": empty label at row " + std::to_string(data_begin + r + 1));
        d.labels[r] = enc.encode(cells[c]);
        continue;
      }
      double v;
      if (!parse_double(cells[c], v))
        throw DataError(path + ": cannot parse value at row " + std::to_string(data_begin + r + 1) +
                        ", column " + std::to_string(c + 1) + ": '" + std::string(trim(cells[c])) + "'");
      d.values(f++, r) = v;
    }
  }
  d.n_classes = enc.n_classes();
  d.feature_names = std::move(feature_names);
  if (d.n_classes < 2) throw DataError(path + ": degenerate labels (single class)");
  return d;
}

Dataset load_sparse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  struct Row {
    int label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  LabelEncoder enc;
  int max_index = 0;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::istringstream ss{std::string(sv)};
    std::string tok;
    ss >> tok;
    Row row;
    row.label = enc.encode(tok);
    while (ss >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw DataError(path + ": malformed token '" + tok + "' at line " + std::to_string(lineno));
      int idx = 0;
      double val = 0;
      auto [p1, e1] = std::from_chars(tok.data(), tok.data() + colon, idx);
      bool idx_ok = e1 == std::errc{} && p1 == tok.data() + colon && idx >= 1;
      bool val_ok = parse_double(std::string_view(tok).substr(colon + 1), val);
      if (!idx_ok || !val_ok)
        throw DataError(path + ": malformed token '" + tok + "' at line " + std::to_string(lineno));
      row.entries.emplace_back(idx - 1, val);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no instances");

  Dataset d;
  d.name = dataset_name_from(path);
  const int n = static_cast<int>(rows.size());
  d.values = Eigen::MatrixXd::Zero(max_index, n);
  d.labels.resize(n);
  for (int r = 0; r < n; ++r) {
    d.labels[r] = rows[r].label;
    for (auto [idx, val] : rows[r].entries) d.values(idx, r) = val;
  }
  d.n_classes = enc.n_classes();
  if (d.n_classes < 2) throw DataError(path + ": degenerate labels (single class)");
  return d;
}

Dataset normalize(const Dataset& d) {
  Dataset out = d;
  const int m = d.n_features();
  const int n = d.n_instances();
  for (int f = 0; f < m; ++f) {
    double lo = d.values.row(f).minCoeff();
    double hi = d.values.row(f).maxCoeff();
    if (lo == hi) {
      out.values.row(f).setZero();
      continue;
    }
    if (lo == -1.0 && hi == 1.0) continue;  // the map is the identity
    const double range = hi - lo;
    for (int i = 0; i < n; ++i) {
      // (x-lo)/range lands exactly in [0,1], so the result stays in [-1,1].
      out.values(f, i) = 2.0 * ((d.values(f, i) - lo) / range) - 1.0;
    }
  }
  return out;
}

namespace {

DiscretizedDataset discretize_impl(const Dataset& d, std::span<const int> stat_instances) {
  const int m = d.n_features();
  const int n = d.n_instances();
  DiscretizedDataset out;
  out.codes.resize(m, n);
  out.bin_edges.resize(m);

  for (int f = 0; f < m; ++f) {
    double sum = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i : stat_instances) {
      double v = d.values(f, i);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mu = sum / static_cast<double>(stat_instances.size());
    double ss = 0;
    for (int i : stat_instances) {
      double dv = d.values(f, i) - mu;
      ss += dv * dv;
    }
    // Population std: the statistic is descriptive, not inferential.
    const double sigma = std::sqrt(ss / static_cast<double>(stat_instances.size()));
    out.bin_edges[f] = {mu - sigma, mu + sigma};
    if (lo == hi || sigma == 0.0) {
      out.codes.row(f).setConstant(1);
      continue;
    }
    for (int i = 0; i < n; ++i) {
      double v = d.values(f, i);
      // Boundary values land in the middle bin.
      out.codes(f, i) = v < mu - sigma ? 0 : (v > mu + sigma ? 2 : 1);
    }
  }
  return out;
}

}  // namespace

DiscretizedDataset discretize(const Dataset& d) {
  std::vector<int> all(d.n_instances());
  std::iota(all.begin(), all.end(), 0);
  return discretize_impl(d, all);
}

DiscretizedDataset discretize_with_stats(const Dataset& d, std::span<const int> stat_instances) {
  if (stat_instances.empty()) throw ConfigError("discretize_with_stats: empty instance set");
  for (int i : stat_instances)
    if (i < 0 || i >= d.n_instances()) throw ConfigError("discretize_with_stats: instance index out of range");
  return discretize_impl(d, stat_instances);
}

SplitPlan make_splits(const Dataset& d, const SplitSpec& spec) {
  const int n = d.n_instances();
  SplitPlan plan;
  plan.spec = spec;

  if (spec.kind == SplitKind::LeaveOneOut) {
    plan.folds.resize(n);
    for (int i = 0; i < n; ++i) {
      auto& fold = plan.folds[i];
      fold.test = {i};
      fold.train.reserve(n - 1);
      for (int j = 0; j < n; ++j)
        if (j != i) fold.train.push_back(j);
    }
    return plan;
  }

  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (spec.n_repeats < 1) throw ConfigError("n_repeats must be >= 1");

  std::vector<std::vector<int>> by_class(d.n_classes);
  for (int i = 0; i < n; ++i) by_class[d.labels[i]].push_back(i);
  for (int c = 0; c < d.n_classes; ++c)
    if (by_class[c].size() < 2)
      throw DataError("class " + std::to_string(c) + " has a single instance; holdout needs >= 2");

  // Per-class train counts by largest remainder, pinned so every class keeps
  // at least one training instance and the totals match round(f*N) exactly.
  const int want_train = std::clamp(
      static_cast<int>(std::llround(spec.train_fraction * n)), d.n_classes, n - 1);
  std::vector<int> take(d.n_classes);
  std::vector<double> frac(d.n_classes);
  int total = 0;
  for (int c = 0; c < d.n_classes; ++c) {
    double target = spec.train_fraction * static_cast<double>(by_class[c].size());
    take[c] = std::clamp(static_cast<int>(std::floor(target)), 1,
                         static_cast<int>(by_class[c].size()) - 1);
    frac[c] = target - std::floor(target);
    total += take[c];
  }
  auto adjustable_up = [&](int c) { return take[c] < static_cast<int>(by_class[c].size()) - 1; };
  while (total < want_train) {
    int best = -1;
    for (int c = 0; c < d.n_classes; ++c)
      if (adjustable_up(c) && (best < 0 || frac[c] > frac[best])) best = c;
    if (best < 0) break;
    ++take[best];
    frac[best] -= 1.0;
    ++total;
  }
  while (total > want_train) {
    int best = -1;
    for (int c = 0; c < d.n_classes; ++c)
      if (take[c] > 1 && (best < 0 || frac[c] < frac[best])) best = c;
    if (best < 0) break;
    --take[best];
    frac[best] += 1.0;
    --total;
  }

  std::mt19937_64 rng(spec.seed);
  plan.folds.resize(spec.n_repeats);
  for (int r = 0; r < spec.n_repeats; ++r) {
    auto& fold = plan.folds[r];
    for (int c = 0; c < d.n_classes; ++c) {
      std::vector<int> idx = by_class[c];
      std::shuffle(idx.begin(), idx.end(), rng);
      fold.train.insert(fold.train.end(), idx.begin(), idx.begin() + take[c]);
      fold.test.insert(fold.test.end(), idx.begin() + take[c], idx.end());
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

}  // namespace redcut
