#pragma once

// Shared synthetic fixtures: random QP instances, random discretized datasets,
// grouped/planted feature sets with known structure.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "redcut/dataset.hpp"

namespace fixtures {

// Random symmetric PSD matrix A*A' scaled to unit-ish diagonal plus optional
// ridge, and a nonnegative relevance vector.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> random_psd_qp(int m, std::mt19937_64& rng,
                                                                 double ridge = 0.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = gauss(rng);
  Eigen::MatrixXd Q = (A * A.transpose()) / static_cast<double>(m);
  Q += ridge * Eigen::MatrixXd::Identity(m, m);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd s(m);
  for (int i = 0; i < m; ++i) s(i) = unif(rng);
  return {Q, s};
}

// Random codes in {0,1,2} with mildly nonuniform cell probabilities.
inline redcut::DiscretizedDataset random_codes(int m, int n, std::mt19937_64& rng) {
  redcut::DiscretizedDataset dd;
  dd.codes.resize(m, n);
  dd.bin_edges.assign(m, {-1.0, 1.0});
  std::discrete_distribution<int> tri({0.25, 0.5, 0.25});
  for (int f = 0; f < m; ++f)
    for (int i = 0; i < n; ++i) dd.codes(f, i) = static_cast<std::uint8_t>(tri(rng));
  return dd;
}

inline std::vector<int> random_binary_labels(int n, std::mt19937_64& rng) {
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[i] = static_cast<int>(rng() & 1u);
  return y;
}

// Copies `base` and re-randomizes each symbol with probability `flip`.
inline void noisy_copy(redcut::CodeMatrix& codes, int dst, int src, double flip,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> sym(0, 2);
  for (int i = 0; i < codes.cols(); ++i) {
    codes(dst, i) = codes(src, i);
    if (unif(rng) < flip) codes(dst, i) = static_cast<std::uint8_t>(sym(rng));
  }
}

// `n_groups` tight feature groups (near-duplicates within, independent
// across), the first `informative_groups` of them derived from the labels.
struct GroupedFixture {
  redcut::DiscretizedDataset dd;
  std::vector<int> labels;
  std::vector<int> group_of;  // group id per feature
};

inline GroupedFixture grouped_features(int n_groups, int group_size, int n,
                                       int informative_groups, double flip,
                                       std::mt19937_64& rng) {
  GroupedFixture fx;
  const int m = n_groups * group_size;
  fx.dd.codes.resize(m, n);
  fx.dd.bin_edges.assign(m, {-1.0, 1.0});
  fx.labels = random_binary_labels(n, rng);
  fx.group_of.resize(m);

  std::uniform_int_distribution<int> sym(0, 2);
  for (int g = 0; g < n_groups; ++g) {
    const int base = g * group_size;
    if (g < informative_groups) {
      // Base pattern follows the labels, so the whole group is relevant.
      for (int i = 0; i < n; ++i)
        fx.dd.codes(base, i) = static_cast<std::uint8_t>(fx.labels[i] == 1 ? 2 : 0);
    } else {
      for (int i = 0; i < n; ++i) fx.dd.codes(base, i) = static_cast<std::uint8_t>(sym(rng));
    }
    fx.group_of[base] = g;
    for (int j = 1; j < group_size; ++j) {
      noisy_copy(fx.dd.codes, base + j, base, flip, rng);
      fx.group_of[base + j] = g;
    }
  }
  return fx;
}

// Dense dataset with `n_good` strongly label-correlated features,
// `n_copies` noisy duplicates of them (weaker), and independent noise.
inline redcut::Dataset planted_dataset(int m, int n, int n_good, int n_copies,
                                       std::mt19937_64& rng, double good_noise = 0.25,
                                       double copy_noise = 0.45) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  redcut::Dataset d;
  d.name = "planted";
  d.values.resize(m, n);
  d.labels.resize(n);
  d.n_classes = 2;
  for (int i = 0; i < n; ++i) d.labels[i] = i % 2;

  for (int f = 0; f < m; ++f) {
    if (f < n_good) {
      for (int i = 0; i < n; ++i)
        d.values(f, i) = (d.labels[i] == 1 ? 1.0 : -1.0) + good_noise * gauss(rng);
    } else if (f < n_good + n_copies) {
      const int parent = f % n_good;
      for (int i = 0; i < n; ++i)
        d.values(f, i) = d.values(parent, i) + copy_noise * gauss(rng);
    } else {
      for (int i = 0; i < n; ++i) d.values(f, i) = gauss(rng);
    }
  }
  return d;
}

}  // namespace fixtures
