#pragma once

// Test-only reference solver for the simplex QP: plain projected gradient
// with Armijo halving, restarted from many random points on the simplex.
// Kept deliberately independent of the production solver (no BB steps, its
// own projection and residual code) so it can serve as an oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

namespace qp_oracle {

inline Eigen::VectorXd project(Eigen::VectorXd v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end());
  double cum = 0.0, shift = 0.0;
  for (int j = 0; j < m; ++j) {
    const double uj = u[m - 1 - j];
    cum += uj;
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (uj - t > 0.0) shift = t;
  }
  for (int i = 0; i < m; ++i) v(i) = std::max(0.0, v(i) - shift);
  const double s = v.sum();
  if (s > 0.0) v /= s;
  return v;
}

inline double objective(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& a) {
  return 0.5 * a.dot(Q * a) - s.dot(a);
}

inline double residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& a, double zero_tol = 1e-8) {
  Eigen::VectorXd g = Q * a - s;
  double lambda = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.size(); ++i)
    if (a(i) > zero_tol) lambda = std::min(lambda, g(i));
  if (!std::isfinite(lambda)) lambda = g.minCoeff();
  double r = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) > zero_tol)
      r = std::max(r, std::abs(g(i) - lambda));
    else
      r = std::max(r, std::max(0.0, lambda - g(i)));
  }
  return r;
}

inline Eigen::VectorXd pg_from(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                               Eigen::VectorXd a, double target_res, int max_iter) {
  double f = objective(Q, s, a);
  double eta = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd g = Q * a - s;
    if (residual(Q, s, a) <= target_res) break;
    eta *= 2.0;  // let the step grow back after halvings
    bool moved = false;
    for (int bt = 0; bt < 70; ++bt) {
      Eigen::VectorXd cand = project(a - eta * g);
      const double fc = objective(Q, s, cand);
      if (fc < f || (cand - a).lpNorm<Eigen::Infinity>() == 0.0) {
        if ((cand - a).lpNorm<Eigen::Infinity>() == 0.0) break;
        a = std::move(cand);
        f = fc;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return a;
}

struct Result {
  Eigen::VectorXd alpha;
  double objective = 0.0;
};

inline Eigen::VectorXd random_simplex_point(int m, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = exp1(rng);
  return v / v.sum();
}

inline Result multi_start(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s, int n_starts,
                          std::mt19937_64& rng, double target_res = 1e-12,
                          int max_iter = 20000) {
  Result best;
  best.objective = std::numeric_limits<double>::infinity();
  const int m = static_cast<int>(s.size());
  for (int t = 0; t < n_starts; ++t) {
    Eigen::VectorXd start = t == 0 ? Eigen::VectorXd::Constant(m, 1.0 / m).eval()
                                   : random_simplex_point(m, rng);
    Eigen::VectorXd a = pg_from(Q, s, start, target_res, max_iter);
    const double f = objective(Q, s, a);
    if (f < best.objective) {
      best.objective = f;
      best.alpha = a;
    }
  }
  return best;
}

}  // namespace qp_oracle
