#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redcut/dataset.hpp"
#include "redcut/selectors.hpp"

namespace redcut {

/// Linear classifier trained with L2-regularized squared hinge loss in the
/// primal. Binary problems keep a single weight vector; more classes train
/// one-vs-rest with the same loss.
struct LinearModel {
  std::vector<Eigen::VectorXd> weights;  // one per decision function
  std::vector<double> biases;
  int n_classes = 2;

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// X is instances x features; y holds class ids. Minimizes
/// 1/2 |w|^2 + C sum max(0, 1 - y_i (w'x_i + b))^2 to the given gradient-norm
/// tolerance. Throws DataError when the fold contains a single class.
LinearModel train_linear(const Eigen::MatrixXd& X, std::span<const int> y, double C,
                         double grad_tol = 1e-6);

/// Misclassification percentage in [0, 100].
double error_rate(const LinearModel& m, const Eigen::MatrixXd& X, std::span<const int> y);

// Objective/gradient of one binary subproblem, exposed for derivative checks.
// y_pm holds -1/+1 labels; the last gradient entry is the bias derivative.
double squared_hinge_objective(const Eigen::MatrixXd& X, std::span<const double> y_pm, double C,
                               const Eigen::VectorXd& w, double b);
Eigen::VectorXd squared_hinge_gradient(const Eigen::MatrixXd& X, std::span<const double> y_pm,
                                       double C, const Eigen::VectorXd& w, double b);

struct SelectorSpec {
  Method method = Method::Qpfs;
  std::optional<double> theta;
  int k = 15;        // subclusters per split (ikm/ikma)
  int k_init = 15;   // initial cluster count (tlkm)
  double tau = 0.8;
  int levels = 3;
  double qp_tol = 1e-7;
  bool freeze_theta = false;
  bool normalized_q = false;
};

SelectionResult run_selector(const SelectionContext& ctx, const SelectorSpec& spec);

struct EvalOptions {
  double C = 1.0;
  bool select_per_fold = true;     // rerun selection on each training fold
  bool stats_on_train = false;     // discretization stats from the fold only
  int threads = 0;
};

struct ErrorStat {
  double mean = 0.0;
  double stddev = 0.0;  // population std over repeats
};

struct EvalReport {
  std::string method;
  SelectorSpec spec;
  double C = 1.0;
  std::uint64_t seed = kDefaultSeed;
  int n_repeats = 0;
  std::vector<int> k_grid;
  std::map<int, ErrorStat> per_k_error;           // percent
  ErrorStat baseline_error;                        // all features
  std::optional<ErrorStat> kmeans_baseline_error;  // all terminal representatives
  struct Timings {
    double similarity_sec = 0.0;
    double selection_sec = 0.0;
    double training_sec = 0.0;
    double total_sec = 0.0;
  } timings;
  Instrumentation counters;  // summed over repeats
};

/// Runs the full protocol: per repeat, select on the training fold, then for
/// every k in the grid train on the top-k features and score the test fold.
/// Identical seed (in `splits`) gives an identical report.
EvalReport topk_curve(const Dataset& d, const SelectorSpec& spec, std::vector<int> k_grid,
                      const SplitPlan& splits, const EvalOptions& opts = {});

/// Parameter grids for cross-validation. Empty grids keep the base value.
struct ParamGrids {
  std::vector<double> thetas;
  std::vector<int> ks;
  std::vector<int> k_inits;
  std::vector<double> taus;
};

/// The stock grids: theta {0.0,0.1,0.3,0.5,0.7,0.9}, tau 0.70..0.99 step
/// 0.01, k 5..1000 step 5, k_init 3..150.
ParamGrids default_param_grids();

struct CvChoice {
  SelectorSpec spec;
  double error = 100.0;
};

/// Grid search minimizing mean CV error at `reference_k` (default: the best
/// error over the whole k grid). Ties prefer the smaller model: larger tau,
/// then smaller k, smaller k_init, smaller theta.
CvChoice cross_validate_params(const Dataset& d, const SelectorSpec& base, const ParamGrids& grids,
                               std::vector<int> k_grid, const SplitPlan& splits,
                               const EvalOptions& opts = {},
                               std::optional<int> reference_k = {});

}  // namespace redcut
