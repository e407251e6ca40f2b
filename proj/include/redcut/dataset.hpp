#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "redcut/common.hpp"

namespace redcut {

/// A dense dataset: M features by N instances plus one class label per
/// instance. Labels are re-encoded to {0..Y-1} in order of first occurrence.
struct Dataset {
  std::string name;
  Eigen::MatrixXd values;  // M x N, feature-major
  std::vector<int> labels;  // N entries in {0..Y-1}
  int n_classes = 0;
  std::vector<std::string> feature_names;  // empty, or one per feature

  int n_features() const { return static_cast<int>(values.rows()); }
  int n_instances() const { return static_cast<int>(values.cols()); }
};

// Row-major so each feature's code sequence is contiguous.
using CodeMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Three-segment discretization of a dataset: per feature, values below
/// mean-std map to 0, values above mean+std map to 2, the rest to 1.
struct DiscretizedDataset {
  CodeMatrix codes;                                   // M x N, entries in {0,1,2}
  std::vector<std::pair<double, double>> bin_edges;   // per feature (mu-std, mu+std)

  int n_features() const { return static_cast<int>(codes.rows()); }
  int n_instances() const { return static_cast<int>(codes.cols()); }
};

/// Label column selector: integer position (negative counts from the end,
/// -1 = last column) or a header name.
using LabelColumn = std::variant<int, std::string>;

/// Loads a comma-separated file. A header row is assumed when the first row
/// contains a non-numeric cell outside the label column; feature names are
/// taken from it when present.
Dataset load_csv(const std::string& path, const LabelColumn& label_column = -1);

/// Loads "label idx:value ..." sparse text (1-based indices, one instance per
/// line). The feature count is the largest index seen; absent entries are 0.
Dataset load_sparse(const std::string& path);

/// Min-max maps every feature to [-1, 1] independently. Constant features map
/// to all zeros. Idempotent.
Dataset normalize(const Dataset& d);

DiscretizedDataset discretize(const Dataset& d);

/// Same as discretize() but with per-feature mean/std estimated from the given
/// instance subset only (e.g. a training fold).
DiscretizedDataset discretize_with_stats(const Dataset& d,
                                         std::span<const int> stat_instances);

enum class SplitKind { RandomHoldout, LeaveOneOut };

struct SplitSpec {
  SplitKind kind = SplitKind::RandomHoldout;
  double train_fraction = 0.6;
  int n_repeats = 100;
  std::uint64_t seed = kDefaultSeed;

  static SplitSpec holdout(double train_fraction, int n_repeats,
                           std::uint64_t seed = kDefaultSeed) {
    return SplitSpec{SplitKind::RandomHoldout, train_fraction, n_repeats, seed};
  }
  static SplitSpec loocv() {
    return SplitSpec{SplitKind::LeaveOneOut, 0.0, 0, 0};
  }
};

struct SplitPlan {
  SplitSpec spec;
  struct Fold {
    std::vector<int> train;
    std::vector<int> test;
  };
  std::vector<Fold> folds;
};

/// Builds train/test assignments. Holdout splits are stratified so every class
/// appears in each training fold; identical spec (incl. seed) gives identical
/// assignments. Leave-one-out produces N folds with singleton test sets.
SplitPlan make_splits(const Dataset& d, const SplitSpec& spec);

}  // namespace redcut
