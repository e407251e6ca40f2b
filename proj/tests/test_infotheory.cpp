#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "redcut/infotheory.hpp"
#include "support/fixtures.hpp"

using namespace redcut;

namespace {

std::vector<int> row_of(const DiscretizedDataset& dd, int f) {
  std::vector<int> out(dd.n_instances());
  for (int i = 0; i < dd.n_instances(); ++i) out[i] = dd.codes(f, i);
  return out;
}

std::vector<int> random_codes_seq(int n, std::mt19937_64& rng) {
  std::discrete_distribution<int> tri({0.3, 0.4, 0.3});
  std::vector<int> x(n);
  for (int i = 0; i < n; ++i) x[i] = tri(rng);
  return x;
}

}  // namespace

TEST_CASE("entropy of simple sequences") {
  CHECK(entropy(std::vector<int>{0, 0, 0, 0}) == 0.0);
  CHECK(entropy(std::vector<int>{0, 1, 0, 1}) == 1.0);
  CHECK(entropy(std::vector<int>{0, 1, 2, 1}) == 1.5);
  CHECK_THROWS_AS(entropy(std::vector<int>{}), DataError);
}

TEST_CASE("joint entropy") {
  std::vector<int> a{0, 1, 0, 1};
  CHECK(joint_entropy(a, a) == entropy(a));
  CHECK(joint_entropy(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}) == 2.0);
  CHECK_THROWS_AS(joint_entropy(a, std::vector<int>{0, 1}), DataError);

  SUBCASE("independent uniform bits over a large sample") {
    std::mt19937_64 rng(5);
    const int n = 40000;
    std::vector<int> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<int>(rng() & 1u);
      y[i] = static_cast<int>(rng() & 1u);
    }
    CHECK(joint_entropy(x, y) == doctest::Approx(2.0).epsilon(0.025));
    CHECK(std::abs(joint_entropy(x, y) - 2.0) < 0.05);
  }
}

TEST_CASE("mutual information") {
  std::mt19937_64 rng(6);
  SUBCASE("self-information") {
    for (int t = 0; t < 20; ++t) {
      auto a = random_codes_seq(50, rng);
      CHECK(mutual_information(a, a) == entropy(a));
    }
  }
  SUBCASE("exactly independent four-sample pair") {
    std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
    CHECK(mutual_information(a, b) == 0.0);  // 1 + 1 - 2
  }
  SUBCASE("bijective recoding preserves information") {
    for (int t = 0; t < 20; ++t) {
      auto a = random_codes_seq(60, rng);
      std::vector<int> b(a.size());
      const int perm[3] = {2, 0, 1};
      for (std::size_t i = 0; i < a.size(); ++i) b[i] = perm[a[i]];
      CHECK(mutual_information(a, b) == entropy(a));
      CHECK(entropy(b) == entropy(a));
    }
  }
}

TEST_CASE("mi_distance values") {
  std::vector<int> a{0, 0, 1, 1};
  CHECK(mi_distance(a, a) == 0.0);
  CHECK(mi_distance(a, std::vector<int>{0, 1, 0, 1}) == 1.0);  // independent
  // hand-computed: H(a)=1, H(b)=0.8112781..., H(ab)=1.5
  std::vector<int> b{0, 1, 1, 1};
  CHECK(mi_distance(a, b) == doctest::Approx(0.6887218755408671).epsilon(1e-12));
  // two constants are informationally identical
  CHECK(mi_distance(std::vector<int>{1, 1, 1}, std::vector<int>{2, 2, 2}) == 0.0);
  // constant against anything informative is maximally distant
  CHECK(mi_distance(std::vector<int>{1, 1, 1, 1}, a) == 1.0);
}

TEST_CASE("mi_distance is an exact-symmetry bounded metric on random triples") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int t = 0; t < 10000; ++t) {
    const int n = 24;
    auto a = random_codes_seq(n, rng);
    auto b = random_codes_seq(n, rng);
    auto c = random_codes_seq(n, rng);
    // correlate some triples so the test is not independence-only
    if (t % 3 == 0)
      for (int i = 0; i < n; i += 2) b[i] = a[i];
    if (t % 5 == 0)
      for (int i = 0; i < n; i += 3) c[i] = a[i];

    const double dab = mi_distance(a, b);
    const double dba = mi_distance(b, a);
    CHECK(dab == dba);  // bit-exact symmetry

    const double dbc = mi_distance(b, c);
    const double dac = mi_distance(a, c);
    REQUIRE(dab >= 0.0);
    REQUIRE(dab <= 1.0);
    CHECK(dac <= dab + dbc + 1e-12);
    CHECK(dab <= dac + dbc + 1e-12);
    CHECK(dbc <= dab + dac + 1e-12);

    const double mi = mutual_information(a, b);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(entropy(a), entropy(b)) + 1e-12);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("build_similarity base cases") {
  SUBCASE("single feature") {
    DiscretizedDataset dd;
    dd.codes.resize(1, 4);
    dd.codes << 0, 1, 2, 1;
    dd.bin_edges = {{-1, 1}};
    std::vector<int> y{0, 1, 0, 1};
    SimilarityModel sm = build_similarity(dd, y);
    CHECK(sm.size() == 1);
    CHECK(sm.Q(0, 0) == 1.5);  // H(f)
    CHECK(sm.s(0) == mutual_information(row_of(dd, 0), y));
  }
  SUBCASE("two identical features share diagonal and off-diagonal") {
    DiscretizedDataset dd;
    dd.codes.resize(2, 6);
    dd.codes << 0, 1, 2, 1, 0, 2, 0, 1, 2, 1, 0, 2;
    dd.bin_edges = {{-1, 1}, {-1, 1}};
    std::vector<int> y{0, 1, 0, 1, 0, 1};
    SimilarityModel sm = build_similarity(dd, y);
    CHECK(sm.Q(0, 1) == sm.Q(0, 0));
    CHECK(sm.Q(0, 1) == sm.Q(1, 1));
    CHECK(sm.distance(0, 1) == 0.0);
  }
  SUBCASE("label-equal feature vs independent noise") {
    std::mt19937_64 rng(11);
    const int n = 4000;
    DiscretizedDataset dd;
    dd.codes.resize(2, n);
    dd.bin_edges = {{-1, 1}, {-1, 1}};
    std::vector<int> y(n);
    std::discrete_distribution<int> tri({0.25, 0.5, 0.25});
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() & 1u);
      dd.codes(0, i) = static_cast<std::uint8_t>(y[i]);
      dd.codes(1, i) = static_cast<std::uint8_t>(tri(rng));
    }
    SimilarityModel sm = build_similarity(dd, y);
    const double hy = entropy(y);
    CHECK(sm.s(0) == doctest::Approx(hy).epsilon(1e-9));  // f0 carries the label exactly
    CHECK(std::abs(sm.s(1)) < 0.05);                      // noise is nearly irrelevant
  }
}

TEST_CASE("build_similarity matrix properties and theta") {
  std::mt19937_64 rng(12);
  auto dd = fixtures::random_codes(25, 80, rng);
  auto y = fixtures::random_binary_labels(80, rng);
  SimilarityModel sm = build_similarity(dd, y);

  CHECK((sm.Q - sm.Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sm.Q.minCoeff() >= 0.0);
  CHECK(sm.s.minCoeff() >= 0.0);
  for (int i = 0; i < sm.size(); ++i)
    CHECK(sm.Q(i, i) == doctest::Approx(entropy(row_of(dd, i))).epsilon(1e-12));
  CHECK(sm.q_bar == doctest::Approx(sm.Q.mean()));
  CHECK(sm.m_bar == doctest::Approx(sm.s.mean()));
  CHECK(sm.theta == doctest::Approx(sm.q_bar / (sm.q_bar + sm.m_bar)));
  CHECK(sm.theta >= 0.0);
  CHECK(sm.theta <= 1.0);

  SUBCASE("theta falls back to 0.5 on all-constant data") {
    DiscretizedDataset flat;
    flat.codes.resize(2, 4);
    flat.codes.setConstant(1);
    flat.bin_edges = {{0, 0}, {0, 0}};
    std::vector<int> labels{0, 1, 0, 1};
    SimilarityModel zero = build_similarity(flat, labels);
    CHECK(zero.theta == 0.5);
  }

  SUBCASE("threaded build is bit-identical to serial") {
    SimilarityModel sm4 = build_similarity(dd, y, 4);
    CHECK((sm.Q - sm4.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sm.s - sm4.s).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sm.theta == sm4.theta);
  }

  SUBCASE("restriction to all features reproduces the model bitwise") {
    std::vector<int> all(sm.size());
    for (int i = 0; i < sm.size(); ++i) all[i] = i;
    SimilarityModel r = sm.restricted_to(all);
    CHECK((r.Q - sm.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.theta == sm.theta);
  }

  SUBCASE("normalized similarity mode") {
    SimilarityModel nm = build_similarity(dd, y, 0, /*normalized_q=*/true);
    CHECK(nm.Q.maxCoeff() <= 1.0);
    CHECK(nm.Q.minCoeff() >= 0.0);
    for (int i = 0; i < nm.size(); ++i) CHECK(nm.Q(i, i) == 1.0);
  }
}

TEST_CASE("scale_for_theta") {
  std::mt19937_64 rng(13);
  auto dd = fixtures::random_codes(6, 40, rng);
  auto y = fixtures::random_binary_labels(40, rng);
  SimilarityModel sm = build_similarity(dd, y);

  SUBCASE("theta = 1 keeps only relevance") {
    auto [q, s] = scale_for_theta(sm, 1.0);
    CHECK(q.cwiseAbs().maxCoeff() == 0.0);
    CHECK((s - sm.s).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("theta = 0 keeps only redundancy") {
    auto [q, s] = scale_for_theta(sm, 0.0);
    CHECK((q - sm.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("theta = 0.5 halves both") {
    auto [q, s] = scale_for_theta(sm, 0.5);
    CHECK((q - 0.5 * sm.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s - 0.5 * sm.s).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("default uses the model theta") {
    auto [q, s] = scale_for_theta(sm);
    CHECK(q(0, 0) == (1.0 - sm.theta) * sm.Q(0, 0));
  }
  SUBCASE("invalid theta") {
    CHECK_THROWS_AS(scale_for_theta(sm, 1.5), ConfigError);
    CHECK_THROWS_AS(scale_for_theta(sm, -0.1), ConfigError);
  }
}
