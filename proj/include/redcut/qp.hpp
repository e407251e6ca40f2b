#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "redcut/common.hpp"

namespace redcut {

/// Solution of min 1/2 a'Qa - s'a over the probability simplex.
struct SimplexSolution {
  Eigen::VectorXd alpha;       // feasible: alpha_i >= 0, sum = 1
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<int> support;    // indices with alpha_i > kZeroTol
  double diagonal_shift = 0.0; // regularization applied to an indefinite Q
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, SimplexSolution best)
      : NumericalError(what), best_(std::move(best)) {}
  const SimplexSolution& best() const { return best_; }

 private:
  SimplexSolution best_;
};

struct QpOptions {
  double tol = 1e-7;  // target KKT residual
  int max_iter = 0;   // 0: 50*M + 1000
  // Invoked once per iterate with (iteration, objective, residual).
  std::function<void(int, double, double)> on_iteration;
};

/// Euclidean projection onto {x : x_i >= 0, sum x = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Stationarity certificate: with g = Qa - s and lambda = min of g over the
/// support, the residual is max_i of |g_i - lambda| on the support and
/// max(0, lambda - g_i) off it.
double kkt_residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                    const Eigen::VectorXd& alpha, double zero_tol = kZeroTol);

/// Projected gradient with Barzilai-Borwein steps, backtracking on
/// non-descent. Deterministic: uniform start, fixed update rules. Throws
/// SolverError (carrying the best iterate) when max_iter runs out, and
/// ConfigError for invalid inputs. Q must be symmetric to 1e-8.
SimplexSolution solve_simplex_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                                 const QpOptions& opts = {});

/// Ranks features by weight descending; ties broken by relevance descending,
/// then index ascending. Weights at or below kZeroTol are treated as zero, so
/// unselected features appear after all selected ones, ordered by relevance.
std::vector<int> rank_by_alpha(const Eigen::VectorXd& alpha, const Eigen::VectorXd& s);

}  // namespace redcut
