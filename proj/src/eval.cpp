#include "redcut/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace redcut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BinaryProblem {
  const Eigen::MatrixXd& X;
  std::span<const double> y;
  double C;
};

double objective(const BinaryProblem& p, const Eigen::VectorXd& w, double b) {
  double loss = 0.0;
  Eigen::VectorXd z = p.X * w;
  for (int i = 0; i < z.size(); ++i) {
    const double h = 1.0 - p.y[i] * (z(i) + b);
    if (h > 0.0) loss += h * h;
  }
  return 0.5 * w.squaredNorm() + p.C * loss;
}

// Gradient over (w, b); the last entry is d/db.
Eigen::VectorXd gradient(const BinaryProblem& p, const Eigen::VectorXd& w, double b) {
  const int d = static_cast<int>(w.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
  g.head(d) = w;
  Eigen::VectorXd z = p.X * w;
  for (int i = 0; i < z.size(); ++i) {
    const double h = 1.0 - p.y[i] * (z(i) + b);
    if (h > 0.0) {
      const double coef = -2.0 * p.C * h * p.y[i];
      g.head(d) += coef * p.X.row(i).transpose();
      g(d) += coef;
    }
  }
  return g;
}

// Generalized Hessian-vector product at the current active set.
Eigen::VectorXd hess_vec(const BinaryProblem& p, const std::vector<int>& active,
                         const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size()) - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d + 1);
  out.head(d) = v.head(d);
  for (int i : active) {
    const double xi_v = p.X.row(i).dot(v.head(d)) + v(d);
    const double coef = 2.0 * p.C * xi_v;
    out.head(d) += coef * p.X.row(i).transpose();
    out(d) += coef;
  }
  return out;
}

// Newton iterations with conjugate-gradient inner solves and a backtracking
// line search; runs until the gradient norm drops under tol.
void train_binary(const BinaryProblem& p, Eigen::VectorXd& w, double& b, double tol) {
  const int d = static_cast<int>(p.X.cols());
  w = Eigen::VectorXd::Zero(d);
  b = 0.0;
  double f = objective(p, w, b);

  for (int newton = 0; newton < 200; ++newton) {
    Eigen::VectorXd g = gradient(p, w, b);
    if (g.norm() <= tol) return;

    std::vector<int> active;
    {
      Eigen::VectorXd z = p.X * w;
      for (int i = 0; i < z.size(); ++i)
        if (1.0 - p.y[i] * (z(i) + b) > 0.0) active.push_back(i);
    }

    // CG on H dir = -g.
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd res = -g;
    Eigen::VectorXd cg_p = res;
    double rr = res.squaredNorm();
    const double rr0 = rr;
    for (int cg = 0; cg < 2 * (d + 1) + 10 && rr > 1e-20 * std::max(1.0, rr0); ++cg) {
      Eigen::VectorXd hp = hess_vec(p, active, cg_p);
      const double php = cg_p.dot(hp);
      if (php <= 0.0) break;
      const double step = rr / php;
      dir += step * cg_p;
      res -= step * hp;
      const double rr_new = res.squaredNorm();
      cg_p = res + (rr_new / rr) * cg_p;
      rr = rr_new;
    }
    if (dir.squaredNorm() == 0.0) dir = -g;

    const double slope = g.dot(dir);
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd w_new = w + t * dir.head(d);
      const double b_new = b + t * dir(d);
      const double f_new = objective(p, w_new, b_new);
      if (f_new <= f + 1e-4 * t * slope || f_new < f) {
        w = std::move(w_new);
        b = b_new;
        f = f_new;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return;  // step underflow: gradient is at numerical noise level
  }
}

}  // namespace

double squared_hinge_objective(const Eigen::MatrixXd& X, std::span<const double> y_pm, double C,
                               const Eigen::VectorXd& w, double b) {
  return objective(BinaryProblem{X, y_pm, C}, w, b);
}

Eigen::VectorXd squared_hinge_gradient(const Eigen::MatrixXd& X, std::span<const double> y_pm,
                                       double C, const Eigen::VectorXd& w, double b) {
  return gradient(BinaryProblem{X, y_pm, C}, w, b);
}

int LinearModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (n_classes == 2) {
    const double z = weights[0].dot(x) + biases[0];
    return z >= 0.0 ? 1 : 0;
  }
  int best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_classes; ++c) {
    const double z = weights[c].dot(x) + biases[c];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return best;
}

LinearModel train_linear(const Eigen::MatrixXd& X, std::span<const int> y, double C,
                         double grad_tol) {
  if (!(C > 0.0)) throw ConfigError("train_linear: C must be positive");
  if (X.rows() != static_cast<Eigen::Index>(y.size()))
    throw ConfigError("train_linear: X rows must match label count");
  int n_classes = 0;
  for (int c : y) n_classes = std::max(n_classes, c + 1);
  std::vector<int> present(n_classes, 0);
  for (int c : y) present[c] = 1;
  if (std::accumulate(present.begin(), present.end(), 0) < 2)
    throw DataError("train_linear: training fold contains a single class");

  LinearModel model;
  model.n_classes = n_classes;
  const int n_problems = n_classes == 2 ? 1 : n_classes;
  std::vector<double> y_pm(y.size());
  for (int prob = 0; prob < n_problems; ++prob) {
    const int positive = n_classes == 2 ? 1 : prob;
    for (std::size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == positive ? 1.0 : -1.0;
    Eigen::VectorXd w;
    double b;
    train_binary(BinaryProblem{X, y_pm, C}, w, b, grad_tol);
    model.weights.push_back(std::move(w));
    model.biases.push_back(b);
  }
  return model;
}

double error_rate(const LinearModel& m, const Eigen::MatrixXd& X, std::span<const int> y) {
  if (X.rows() != static_cast<Eigen::Index>(y.size()))
    throw ConfigError("error_rate: X rows must match label count");
  if (y.empty()) return 0.0;
  int wrong = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (m.predict(X.row(i).transpose()) != y[i]) ++wrong;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(y.size());
}

SelectionResult run_selector(const SelectionContext& ctx, const SelectorSpec& spec) {
  switch (spec.method) {
    case Method::Qpfs:
      return ctx.qpfs(spec.theta, spec.qp_tol);
    case Method::Tlkm:
      return ctx.tlkm_qpfs(spec.k_init, spec.tau, spec.theta, spec.qp_tol);
    case Method::Ikm:
    case Method::Ikma: {
      IrrParams p;
      p.k = spec.k;
      p.tau = spec.tau;
      p.levels = spec.levels;
      p.freeze_theta = spec.freeze_theta;
      return spec.method == Method::Ikm ? ctx.ikm_qpfs(p, spec.theta, spec.qp_tol)
                                        : ctx.ikma_qpfs(p, spec.theta, spec.qp_tol);
    }
  }
  throw ConfigError("unknown method");
}

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& values, std::span<const int> instances,
                       std::span<const int> features) {
  Eigen::MatrixXd X(instances.size(), features.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t f = 0; f < features.size(); ++f)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          values(features[f], instances[i]);
  return X;
}

ErrorStat stat_of(const std::vector<double>& xs) {
  ErrorStat st;
  if (xs.empty()) return st;
  st.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return st;
}

void accumulate_counters(Instrumentation& into, const Instrumentation& from) {
  into.distance_count += from.distance_count;
  into.clustering_distance_count += from.clustering_distance_count;
  into.radius_distance_count += from.radius_distance_count;
  into.qp_calls += from.qp_calls;
  into.qp_sizes.insert(into.qp_sizes.end(), from.qp_sizes.begin(), from.qp_sizes.end());
  into.levels_used = std::max(into.levels_used, from.levels_used);
  into.discarded_cluster_count += from.discarded_cluster_count;
  into.discard_levels.insert(into.discard_levels.end(), from.discard_levels.begin(),
                             from.discard_levels.end());
  into.wall_time_sec += from.wall_time_sec;
}

struct FoldOutcome {
  std::map<int, double> error_at_k;
  double baseline = 0.0;
  std::optional<double> kmeans_baseline;
  Instrumentation counters;
  double similarity_sec = 0.0;
  double selection_sec = 0.0;
  double training_sec = 0.0;
};

}  // namespace

EvalReport topk_curve(const Dataset& d, const SelectorSpec& spec, std::vector<int> k_grid,
                      const SplitPlan& splits, const EvalOptions& opts) {
  if (k_grid.empty()) throw ConfigError("topk_curve: empty k grid");
  for (int k : k_grid)
    if (k < 1) throw ConfigError("topk_curve: k grid entries must be >= 1");
  if (splits.folds.empty()) throw ConfigError("topk_curve: empty split plan");

  const auto t_total = Clock::now();
  const Dataset norm = normalize(d);
  const DiscretizedDataset full_codes = discretize(norm);
  const int m = norm.n_features();

  // Selection once on the full data (the leaky protocol) when asked for.
  std::optional<SelectionResult> shared_selection;
  double shared_similarity_sec = 0.0;
  if (!opts.select_per_fold) {
    const auto t0 = Clock::now();
    SelectionContext ctx(full_codes, norm.labels, opts.threads, spec.normalized_q);
    shared_similarity_sec = seconds_since(t0);
    shared_selection = run_selector(ctx, spec);
  }

  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);

  const int n_folds = static_cast<int>(splits.folds.size());
  const int workers = std::min(effective_threads(opts.threads), n_folds);
  const int inner_threads = workers > 1 ? 1 : opts.threads;

  auto run_fold = [&](int fold_idx) -> FoldOutcome {
    const auto& fold = splits.folds[fold_idx];
    FoldOutcome out;

    SelectionResult selection;
    if (shared_selection) {
      selection = *shared_selection;
      out.similarity_sec = fold_idx == 0 ? shared_similarity_sec : 0.0;
    } else {
      DiscretizedDataset fold_codes;
      const DiscretizedDataset* dd = nullptr;
      CodeMatrix sub(m, fold.train.size());
      const auto t0 = Clock::now();
      if (opts.stats_on_train) {
        fold_codes = discretize_with_stats(norm, fold.train);
        for (std::size_t i = 0; i < fold.train.size(); ++i)
          sub.col(static_cast<Eigen::Index>(i)) = fold_codes.codes.col(fold.train[i]);
        fold_codes.codes = std::move(sub);
        dd = &fold_codes;
      } else {
        for (std::size_t i = 0; i < fold.train.size(); ++i)
          sub.col(static_cast<Eigen::Index>(i)) = full_codes.codes.col(fold.train[i]);
        fold_codes.codes = std::move(sub);
        fold_codes.bin_edges = full_codes.bin_edges;
        dd = &fold_codes;
      }
      std::vector<int> fold_labels;
      fold_labels.reserve(fold.train.size());
      for (int i : fold.train) fold_labels.push_back(d.labels[i]);
      SelectionContext ctx(*dd, fold_labels, inner_threads, spec.normalized_q);
      out.similarity_sec = seconds_since(t0);
      const auto t1 = Clock::now();
      selection = run_selector(ctx, spec);
      out.selection_sec = seconds_since(t1);
    }
    out.counters = selection.instr;

    std::vector<int> train_labels, test_labels;
    for (int i : fold.train) train_labels.push_back(d.labels[i]);
    for (int i : fold.test) test_labels.push_back(d.labels[i]);

    const auto t2 = Clock::now();
    auto evaluate = [&](std::span<const int> features) {
      Eigen::MatrixXd Xtr = gather(norm.values, fold.train, features);
      Eigen::MatrixXd Xte = gather(norm.values, fold.test, features);
      LinearModel model = train_linear(Xtr, train_labels, opts.C);
      return error_rate(model, Xte, test_labels);
    };
    for (int k : k_grid) {
      std::vector<int> feats = top_k(selection, k);
      if (feats.empty()) continue;
      out.error_at_k[k] = evaluate(feats);
    }
    out.baseline = evaluate(all);
    if (!selection.representatives.empty() && selection.method != Method::Qpfs)
      out.kmeans_baseline = evaluate(selection.representatives);
    out.training_sec = seconds_since(t2);
    return out;
  };

  std::vector<FoldOutcome> outcomes(n_folds);
  if (workers <= 1) {
    for (int i = 0; i < n_folds; ++i) outcomes[i] = run_fold(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= n_folds) return;
          outcomes[i] = run_fold(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  EvalReport report;
  report.method = method_name(spec.method);
  report.spec = spec;
  report.C = opts.C;
  report.seed = splits.spec.seed;
  report.n_repeats = n_folds;
  report.k_grid = k_grid;

  for (int k : k_grid) {
    std::vector<double> errs;
    for (const auto& o : outcomes) {
      auto it = o.error_at_k.find(k);
      if (it != o.error_at_k.end()) errs.push_back(it->second);
    }
    if (!errs.empty()) report.per_k_error[k] = stat_of(errs);
  }
  {
    std::vector<double> errs;
    for (const auto& o : outcomes) errs.push_back(o.baseline);
    report.baseline_error = stat_of(errs);
  }
  {
    std::vector<double> errs;
    for (const auto& o : outcomes)
      if (o.kmeans_baseline) errs.push_back(*o.kmeans_baseline);
    if (!errs.empty()) report.kmeans_baseline_error = stat_of(errs);
  }
  for (const auto& o : outcomes) {
    accumulate_counters(report.counters, o.counters);
    report.timings.similarity_sec += o.similarity_sec;
    report.timings.selection_sec += o.selection_sec;
    report.timings.training_sec += o.training_sec;
  }
  report.timings.total_sec = seconds_since(t_total);
  return report;
}

ParamGrids default_param_grids() {
  ParamGrids g;
  g.thetas = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
  for (int tau_c = 70; tau_c <= 99; ++tau_c) g.taus.push_back(tau_c / 100.0);
  for (int k = 5; k <= 1000; k += 5) g.ks.push_back(k);
  for (int ki = 3; ki <= 150; ++ki) g.k_inits.push_back(ki);
  return g;
}

CvChoice cross_validate_params(const Dataset& d, const SelectorSpec& base, const ParamGrids& grids,
                               std::vector<int> k_grid, const SplitPlan& splits,
                               const EvalOptions& opts, std::optional<int> reference_k) {
  auto or_base = [](auto grid, auto base_value) {
    if (grid.empty()) grid.push_back(base_value);
    return grid;
  };
  const std::vector<double>& thetas = grids.thetas;  // empty: keep base theta
  // Dimensions a method does not consume collapse to the base value.
  const bool uses_k = base.method == Method::Ikm || base.method == Method::Ikma;
  const bool uses_k_init = base.method == Method::Tlkm;
  const bool uses_tau = base.method != Method::Qpfs;
  std::vector<int> ks = uses_k ? or_base(grids.ks, base.k) : std::vector<int>{base.k};
  std::vector<int> k_inits =
      uses_k_init ? or_base(grids.k_inits, base.k_init) : std::vector<int>{base.k_init};
  std::vector<double> taus = uses_tau ? or_base(grids.taus, base.tau) : std::vector<double>{base.tau};

  CvChoice best;
  bool first = true;

  auto score_spec = [&](const SelectorSpec& spec) -> double {
    EvalReport rep = topk_curve(d, spec, k_grid, splits, opts);
    if (reference_k) {
      auto it = rep.per_k_error.find(*reference_k);
      if (it == rep.per_k_error.end())
        throw ConfigError("cross_validate_params: reference k not in the k grid");
      return it->second.mean;
    }
    double err = 100.0;
    for (const auto& [k, st] : rep.per_k_error) err = std::min(err, st.mean);
    return err;
  };

  auto better = [&](const SelectorSpec& a, double ea, const SelectorSpec& b, double eb) {
    if (ea != eb) return ea < eb;
    if (a.tau != b.tau) return a.tau > b.tau;  // larger tau: coarser model
    if (a.k != b.k) return a.k < b.k;
    if (a.k_init != b.k_init) return a.k_init < b.k_init;
    return a.theta.value_or(-1.0) < b.theta.value_or(-1.0);
  };

  std::vector<std::optional<double>> theta_values;
  if (thetas.empty()) {
    theta_values.push_back(base.theta);
  } else {
    for (double t : thetas) theta_values.emplace_back(t);
  }

  for (const auto& theta : theta_values) {
    for (int k : ks) {
      for (int ki : k_inits) {
        for (double tau : taus) {
          SelectorSpec spec = base;
          spec.theta = theta;
          spec.k = k;
          spec.k_init = ki;
          spec.tau = tau;
          const double err = score_spec(spec);
          if (first || better(spec, err, best.spec, best.error)) {
            best.spec = spec;
            best.error = err;
            first = false;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace redcut
