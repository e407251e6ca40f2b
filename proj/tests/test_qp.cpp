#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "redcut/infotheory.hpp"
#include "redcut/qp.hpp"
#include "support/fixtures.hpp"
#include "support/qp_oracle.hpp"

using namespace redcut;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

void check_feasible(const Eigen::VectorXd& a, double tol = 1e-10) {
  CHECK(a.minCoeff() >= 0.0);
  CHECK(std::abs(a.sum() - 1.0) <= tol);
}

}  // namespace

TEST_CASE("project_to_simplex") {
  CHECK((project_to_simplex(vec({2.0, 0.0})) - vec({1.0, 0.0})).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((project_to_simplex(vec({0.3, 0.3})) - vec({0.5, 0.5})).lpNorm<Eigen::Infinity>() <= 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd v(7);
    for (int i = 0; i < 7; ++i) v(i) = gauss(rng);
    Eigen::VectorXd p = project_to_simplex(v);
    check_feasible(p, 1e-12);
    // projecting a feasible point is a no-op
    CHECK((project_to_simplex(p) - p).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
}

TEST_CASE("solver on hand cases") {
  SUBCASE("pure linear objective selects the argmax") {
    SimplexSolution sol = solve_simplex_qp(Eigen::MatrixXd::Zero(3, 3), vec({0.1, 0.7, 0.2}));
    CHECK(sol.alpha(1) == 1.0);
    CHECK(sol.alpha(0) == 0.0);
    CHECK(sol.alpha(2) == 0.0);
    CHECK(sol.objective == doctest::Approx(-0.7));
  }
  SUBCASE("identity quadratic splits evenly") {
    SimplexSolution sol = solve_simplex_qp(Eigen::MatrixXd::Identity(2, 2), vec({0.0, 0.0}));
    CHECK(sol.alpha(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.alpha(1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.objective == doctest::Approx(0.25).epsilon(1e-9));
  }
  SUBCASE("one-dimensional simplex") {
    SimplexSolution sol = solve_simplex_qp(Eigen::MatrixXd::Identity(1, 1), vec({0.3}));
    CHECK(sol.alpha(0) == 1.0);
  }
}

TEST_CASE("solver matches the multi-start oracle on random PSD instances") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 25; ++t) {
    const int m = 2 + static_cast<int>(rng() % 7);
    auto [Q, s] = fixtures::random_psd_qp(m, rng);
    QpOptions opts;
    opts.tol = 1e-10;
    SimplexSolution sol = solve_simplex_qp(Q, s, opts);
    check_feasible(sol.alpha);
    auto best = qp_oracle::multi_start(Q, s, 30, rng);
    CHECK(std::abs(sol.objective - best.objective) <= 1e-8);
  }
}

TEST_CASE("solver alpha matches the oracle on strictly convex instances") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 10; ++t) {
    const int m = 3 + static_cast<int>(rng() % 5);
    auto [Q, s] = fixtures::random_psd_qp(m, rng, /*ridge=*/0.5);
    QpOptions opts;
    opts.tol = 1e-12;
    SimplexSolution sol = solve_simplex_qp(Q, s, opts);
    auto best = qp_oracle::multi_start(Q, s, 20, rng, 1e-13);
    CHECK((sol.alpha - best.alpha).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("kkt residual is certified and reproducible") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + static_cast<int>(rng() % 49);
    auto [Q, s] = fixtures::random_psd_qp(m, rng);
    SimplexSolution sol = solve_simplex_qp(Q, s);
    CHECK(sol.kkt_residual <= 1e-7);
    // independent recomputation (oracle-side code path)
    const double recomputed = qp_oracle::residual(Q, s, sol.alpha);
    CHECK(std::abs(recomputed - sol.kkt_residual) <= 1e-12);
    // library helper agrees as well
    CHECK(std::abs(kkt_residual(Q, s, sol.alpha) - sol.kkt_residual) <= 1e-12);
    for (int i : sol.support) CHECK(sol.alpha(i) > kZeroTol);
  }
}

TEST_CASE("objective sequence is non-increasing") {
  std::mt19937_64 rng(24);
  auto [Q, s] = fixtures::random_psd_qp(12, rng);
  QpOptions opts;
  double last = std::numeric_limits<double>::infinity();
  bool monotone = true;
  opts.on_iteration = [&](int, double f, double) {
    if (f > last + 1e-15) monotone = false;
    last = f;
  };
  solve_simplex_qp(Q, s, opts);
  CHECK(monotone);
}

TEST_CASE("argmax invariance under positive scaling of s") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int m = 2 + static_cast<int>(rng() % 10);
    Eigen::VectorXd s(m);
    for (int i = 0; i < m; ++i) s(i) = unif(rng);
    int argmax = 0;
    s.maxCoeff(&argmax);
    for (double scale : {0.001, 1.0, 1000.0}) {
      SimplexSolution sol = solve_simplex_qp(Eigen::MatrixXd::Zero(m, m), scale * s);
      auto ranked = rank_by_alpha(sol.alpha, s);
      CHECK(ranked[0] == argmax);
    }
  }
}

TEST_CASE("theta scaling equivalence between the two formulations") {
  std::mt19937_64 rng(26);
  for (int t = 0; t < 20; ++t) {
    auto dd = fixtures::random_codes(10, 50, rng);
    auto y = fixtures::random_binary_labels(50, rng);
    SimilarityModel sm = build_similarity(dd, y);
    std::uniform_real_distribution<double> th(0.05, 0.95);
    const double theta = th(rng);

    auto [qa, sa] = scale_for_theta(sm, theta);
    // the trade-off applied directly to the inputs, scaled by hand
    Eigen::MatrixXd qb = (1.0 - theta) * sm.Q;
    Eigen::VectorXd sb = theta * sm.s;

    SimplexSolution a = solve_simplex_qp(qa, sa);
    SimplexSolution b = solve_simplex_qp(qb, sb);
    CHECK((a.alpha - b.alpha).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("failure still yields a feasible best iterate") {
  std::mt19937_64 rng(27);
  auto [Q, s] = fixtures::random_psd_qp(30, rng);
  QpOptions opts;
  opts.tol = 1e-13;
  opts.max_iter = 3;  // force exhaustion
  try {
    solve_simplex_qp(Q, s, opts);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    check_feasible(e.best().alpha);
    CHECK(e.best().kkt_residual > 0.0);
  }
}

TEST_CASE("input validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.1, 1.0;  // asymmetric beyond 1e-8
  CHECK_THROWS_AS(solve_simplex_qp(bad, vec({0.0, 0.0})), ConfigError);
  QpOptions opts;
  opts.tol = 0.0;
  CHECK_THROWS_AS(solve_simplex_qp(Eigen::MatrixXd::Identity(2, 2), vec({0.0, 0.0}), opts),
                  ConfigError);
}

TEST_CASE("indefinite Q still reaches a certified stationary point") {
  Eigen::MatrixXd Q(2, 2);
  Q << 0.0, 1.0, 1.0, 0.0;  // eigenvalues +1, -1
  SUBCASE("symmetric instance: the uniform start is already stationary") {
    SimplexSolution sol = solve_simplex_qp(Q, vec({0.0, 0.0}));
    CHECK(sol.kkt_residual <= 1e-7);
    check_feasible(sol.alpha);
  }
  SUBCASE("tilted instance: the concave objective drives to a vertex") {
    SimplexSolution sol = solve_simplex_qp(Q, vec({0.01, 0.02}));
    CHECK(sol.kkt_residual <= 1e-7);
    check_feasible(sol.alpha);
    CHECK(sol.alpha.maxCoeff() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.alpha(1) > sol.alpha(0));
  }
}

TEST_CASE("rank_by_alpha ordering and ties") {
  CHECK(rank_by_alpha(vec({0.2, 0.5, 0.3}), vec({0, 0, 0})) == std::vector<int>{1, 2, 0});
  CHECK(rank_by_alpha(vec({0.5, 0.5}), vec({0.1, 0.9})) == std::vector<int>{1, 0});
  CHECK(rank_by_alpha(vec({0.0, 1.0, 0.0}), vec({0.9, 0.1, 0.2})) ==
        std::vector<int>{1, 0, 2});
  // zero-weight features rank after all positive ones, by relevance
  CHECK(rank_by_alpha(vec({1e-12, 0.4, 0.6, 0.0}), vec({0.9, 0.1, 0.1, 0.5})) ==
        std::vector<int>{2, 1, 0, 3});
  // full tie falls back to index order
  CHECK(rank_by_alpha(vec({0.5, 0.5}), vec({0.3, 0.3})) == std::vector<int>{0, 1});
}
