#include "redcut/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace redcut {

namespace {

constexpr double kEtaMin = 1e-20;
constexpr double kEtaMax = 1e12;
constexpr double kDescentSigma = 1e-4;

double kkt_residual_from_gradient(const Eigen::VectorXd& g, const Eigen::VectorXd& alpha,
                                  double zero_tol) {
  const int m = static_cast<int>(alpha.size());
  double lambda = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    if (alpha(i) > zero_tol) lambda = std::min(lambda, g(i));
  if (!std::isfinite(lambda)) lambda = g.minCoeff();
  double res = 0.0;
  for (int i = 0; i < m; ++i) {
    if (alpha(i) > zero_tol)
      res = std::max(res, std::abs(g(i) - lambda));
    else
      res = std::max(res, std::max(0.0, lambda - g(i)));
  }
  return res;
}

std::vector<int> support_of(const Eigen::VectorXd& alpha) {
  std::vector<int> out;
  for (int i = 0; i < alpha.size(); ++i)
    if (alpha(i) > kZeroTol) out.push_back(i);
  return out;
}

// Largest eigenvalue of B = c*I - Q by power iteration gives a lower estimate
// of Q's smallest eigenvalue as c - lambda_max(B).
double estimate_min_eigenvalue(const Eigen::MatrixXd& Q) {
  const int m = static_cast<int>(Q.rows());
  const double c = Q.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) v(i) += 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double lambda_b = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = c * v - Q * v;
    const double norm = w.norm();
    if (norm == 0.0) return c;  // Q = c*I
    lambda_b = v.dot(w);
    v = w / norm;
  }
  return c - lambda_b;
}

}  // namespace

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double threshold = 0.0;
  for (int j = 0; j < m; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) threshold = t;
  }
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) out(i) = std::max(0.0, v(i) - threshold);
  const double sum = out.sum();
  if (sum > 0.0 && std::abs(sum - 1.0) > 1e-15) out /= sum;
  return out;
}

double kkt_residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                    const Eigen::VectorXd& alpha, double zero_tol) {
  Eigen::VectorXd g = Q * alpha - s;
  return kkt_residual_from_gradient(g, alpha, zero_tol);
}

SimplexSolution solve_simplex_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& s,
                                 const QpOptions& opts) {
  const int m = static_cast<int>(s.size());
  if (m < 1) throw ConfigError("solve_simplex_qp: empty problem");
  if (Q.rows() != m || Q.cols() != m)
    throw ConfigError("solve_simplex_qp: Q must be M x M matching s");
  if (!(opts.tol > 0.0)) throw ConfigError("solve_simplex_qp: tol must be positive");
  {
    const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8)
      throw ConfigError("solve_simplex_qp: Q is not symmetric (max asymmetry " +
                        std::to_string(asym) + ")");
  }
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 50 * m + 1000;

  // Smoothness bound: steps at or below 1/L decrease f by the descent lemma
  // even when the decrease itself underflows, so they are always acceptable.
  const double lipschitz = Q.cwiseAbs().rowwise().sum().maxCoeff();
  const double eta_flat = 1.0 / std::max(lipschitz, 1e-300);

  double shift = 0.0;
  bool shift_tried = false;

  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd q = Q * alpha + shift * alpha;
  Eigen::VectorXd g = q - s;
  double f = 0.5 * alpha.dot(q) - s.dot(alpha);

  Eigen::VectorXd d_alpha, d_g;
  bool have_bb = false;

  SimplexSolution best;
  best.alpha = alpha;
  best.objective = f;
  best.kkt_residual = std::numeric_limits<double>::infinity();

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double residual = kkt_residual_from_gradient(g, alpha, kZeroTol);
    if (opts.on_iteration) opts.on_iteration(iter, f, residual);
    if (residual < best.kkt_residual) {
      best.alpha = alpha;
      best.objective = f;
      best.kkt_residual = residual;
    }
    if (residual <= opts.tol) {
      SimplexSolution sol;
      sol.alpha = alpha;
      sol.objective = f;
      sol.kkt_residual = residual;
      sol.iterations = iter;
      sol.support = support_of(alpha);
      sol.diagonal_shift = shift;
      return sol;
    }

    double eta = kEtaMax;
    if (have_bb) {
      const double denom = d_alpha.dot(d_g);
      if (denom > 0.0) eta = std::clamp(d_alpha.squaredNorm() / denom, kEtaMin, kEtaMax);
    } else {
      const double gnorm = g.lpNorm<Eigen::Infinity>();
      eta = gnorm > 0.0 ? 1.0 / gnorm : 1.0;
    }

    // Backtrack along the projection arc until sufficient decrease.
    bool accepted = false;
    for (int bt = 0; bt < 80 && !accepted; ++bt) {
      Eigen::VectorXd cand = project_to_simplex(alpha - eta * g);
      Eigen::VectorXd step = cand - alpha;
      const double step_norm2 = step.squaredNorm();
      if (step_norm2 == 0.0) break;  // projection fixpoint at this step size
      Eigen::VectorXd qc = Q * cand + shift * cand;
      const double fc = 0.5 * cand.dot(qc) - s.dot(cand);
      if (fc <= f - kDescentSigma * step_norm2 / eta || (eta <= eta_flat && fc <= f)) {
        d_alpha = step;
        d_g = (qc - s) - g;
        have_bb = true;
        alpha = std::move(cand);
        q = std::move(qc);
        g = q - s;
        f = fc;
        accepted = true;
      } else {
        eta *= 0.5;
      }
    }

    if (!accepted) {
      // Stalled. On an indefinite Q, regularize once with a diagonal shift
      // and restart; otherwise give up with the best certified iterate.
      if (!shift_tried) {
        shift_tried = true;
        const double lambda_min = estimate_min_eigenvalue(Q);
        if (lambda_min < 0.0) {
          shift = -lambda_min + 1e-10;
          alpha = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
          q = Q * alpha + shift * alpha;
          g = q - s;
          f = 0.5 * alpha.dot(q) - s.dot(alpha);
          have_bb = false;
          continue;
        }
      }
      best.iterations = iter;
      best.support = support_of(best.alpha);
      best.diagonal_shift = shift;
      std::ostringstream msg;
      msg << "solve_simplex_qp: stalled at residual " << best.kkt_residual << " (tol "
          << opts.tol << ")";
      throw SolverError(msg.str(), best);
    }
  }

  best.iterations = iter;
  best.support = support_of(best.alpha);
  best.diagonal_shift = shift;
  std::ostringstream msg;
  msg << "solve_simplex_qp: max_iter=" << max_iter << " reached at residual "
      << best.kkt_residual << " (tol " << opts.tol << ")";
  throw SolverError(msg.str(), best);
}

std::vector<int> rank_by_alpha(const Eigen::VectorXd& alpha, const Eigen::VectorXd& s) {
  if (alpha.size() != s.size()) throw ConfigError("rank_by_alpha: length mismatch");
  const int m = static_cast<int>(alpha.size());
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double wa = alpha(a) > kZeroTol ? alpha(a) : 0.0;
    const double wb = alpha(b) > kZeroTol ? alpha(b) : 0.0;
    if (wa != wb) return wa > wb;
    if (s(a) != s(b)) return s(a) > s(b);
    return a < b;
  });
  return idx;
}

}  // namespace redcut
