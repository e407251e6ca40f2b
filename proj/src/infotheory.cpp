#include "redcut/infotheory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>
#include <vector>

namespace redcut {

namespace {

// H = log2(n) - (sum c*log2(c)) / n over occurrence counts. Counts are summed
// in sorted order so the result is independent of alphabet iteration order;
// this keeps joint_entropy(a,b) == joint_entropy(b,a) bit-exact.
double entropy_from_counts(std::vector<std::int64_t>& counts, std::int64_t n) {
  if (n <= 0) return 0.0;
  std::sort(counts.begin(), counts.end());
  double acc = 0.0;
  for (std::int64_t c : counts) {
    if (c > 1) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
  }
  return std::log2(static_cast<double>(n)) - acc / static_cast<double>(n);
}

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

}  // namespace

double entropy(std::span<const int> x) {
  if (x.empty()) throw DataError("entropy: empty sequence");
  std::unordered_map<int, std::int64_t> freq;
  for (int v : x) ++freq[v];
  std::vector<std::int64_t> counts;
  counts.reserve(freq.size());
  for (auto& [v, c] : freq) counts.push_back(c);
  return entropy_from_counts(counts, static_cast<std::int64_t>(x.size()));
}

double joint_entropy(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("joint_entropy: length mismatch");
  if (a.empty()) throw DataError("joint_entropy: empty sequences");
  std::unordered_map<std::uint64_t, std::int64_t> freq;
  for (std::size_t i = 0; i < a.size(); ++i) ++freq[pair_key(a[i], b[i])];
  std::vector<std::int64_t> counts;
  counts.reserve(freq.size());
  for (auto& [v, c] : freq) counts.push_back(c);
  return entropy_from_counts(counts, static_cast<std::int64_t>(a.size()));
}

double mutual_information(std::span<const int> a, std::span<const int> b) {
  double mi = entropy(a) + entropy(b) - joint_entropy(a, b);
  return std::max(0.0, mi);
}

double mi_distance(std::span<const int> a, std::span<const int> b) {
  const double ha = entropy(a);
  const double hb = entropy(b);
  const double denom = std::max(ha, hb);
  if (denom <= 0.0) return 0.0;  // both constant: informationally identical
  const double mi = std::max(0.0, ha + hb - joint_entropy(a, b));
  return std::clamp(1.0 - mi / denom, 0.0, 1.0);
}

double SimilarityModel::distance(int i, int j) const {
  const double denom = std::max(Q(i, i), Q(j, j));
  if (denom <= 0.0) return 0.0;
  return std::clamp(1.0 - Q(i, j) / denom, 0.0, 1.0);
}

SimilarityModel SimilarityModel::restricted_to(std::span<const int> features) const {
  SimilarityModel out;
  const int k = static_cast<int>(features.size());
  out.Q.resize(k, k);
  out.s.resize(k);
  for (int a = 0; a < k; ++a) {
    out.s(a) = s(features[a]);
    for (int b = 0; b < k; ++b) out.Q(a, b) = Q(features[a], features[b]);
  }
  out.q_bar = out.Q.mean();
  out.m_bar = k > 0 ? out.s.mean() : 0.0;
  out.theta = (out.q_bar + out.m_bar) > 0.0 ? out.q_bar / (out.q_bar + out.m_bar) : 0.5;
  return out;
}

namespace {

// Entropy of one code row (alphabet {0,1,2}).
double code_entropy(const std::uint8_t* x, int n) {
  std::vector<std::int64_t> counts(3, 0);
  for (int t = 0; t < n; ++t) ++counts[x[t]];
  counts.erase(std::remove(counts.begin(), counts.end(), 0), counts.end());
  return entropy_from_counts(counts, n);
}

double code_pair_entropy(const std::uint8_t* a, const std::uint8_t* b, int n) {
  std::int64_t cells[9] = {0};
  for (int t = 0; t < n; ++t) ++cells[a[t] * 3 + b[t]];
  std::vector<std::int64_t> counts;
  counts.reserve(9);
  for (std::int64_t c : cells)
    if (c > 0) counts.push_back(c);
  return entropy_from_counts(counts, n);
}

double code_label_mi(const std::uint8_t* a, std::span<const int> labels, int n_classes,
                     double h_feature) {
  const int n = static_cast<int>(labels.size());
  std::vector<std::int64_t> cells(static_cast<std::size_t>(3 * n_classes), 0);
  std::vector<std::int64_t> label_counts(n_classes, 0);
  for (int t = 0; t < n; ++t) {
    ++cells[static_cast<std::size_t>(a[t]) * n_classes + labels[t]];
    ++label_counts[labels[t]];
  }
  std::vector<std::int64_t> joint;
  for (std::int64_t c : cells)
    if (c > 0) joint.push_back(c);
  std::vector<std::int64_t> marg;
  for (std::int64_t c : label_counts)
    if (c > 0) marg.push_back(c);
  const double h_labels = entropy_from_counts(marg, n);
  const double h_joint = entropy_from_counts(joint, n);
  return std::max(0.0, h_feature + h_labels - h_joint);
}

}  // namespace

SimilarityModel build_similarity(const DiscretizedDataset& dd, std::span<const int> labels,
                                 int threads, bool normalized_q) {
  const int m = dd.n_features();
  const int n = dd.n_instances();
  if (m < 1) throw DataError("build_similarity: no features");
  if (static_cast<int>(labels.size()) != n)
    throw DataError("build_similarity: label count does not match instance count");
  int n_classes = 0;
  for (int y : labels) {
    if (y < 0) throw DataError("build_similarity: negative class id");
    n_classes = std::max(n_classes, y + 1);
  }

  SimilarityModel sm;
  sm.Q.resize(m, m);
  sm.s.resize(m);

  std::vector<double> h(m);
  for (int i = 0; i < m; ++i) h[i] = code_entropy(dd.codes.row(i).data(), n);

  const int n_workers = std::min(effective_threads(threads), m);
  std::atomic<int> next_row{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next_row.fetch_add(1);
      if (i >= m) return;
      const std::uint8_t* ri = dd.codes.row(i).data();
      sm.s(i) = code_label_mi(ri, labels, n_classes, h[i]);
      sm.Q(i, i) = h[i];
      for (int j = i + 1; j < m; ++j) {
        const double hij = code_pair_entropy(ri, dd.codes.row(j).data(), n);
        const double mi = std::max(0.0, h[i] + h[j] - hij);
        sm.Q(i, j) = mi;
        sm.Q(j, i) = mi;
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (normalized_q) {
    Eigen::MatrixXd sim(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double denom = std::max(sm.Q(i, i), sm.Q(j, j));
        sim(i, j) = denom > 0.0 ? std::clamp(sm.Q(i, j) / denom, 0.0, 1.0) : 1.0;
      }
    }
    sm.Q = std::move(sim);
  }

  sm.q_bar = sm.Q.mean();
  sm.m_bar = sm.s.mean();
  sm.theta = (sm.q_bar + sm.m_bar) > 0.0 ? sm.q_bar / (sm.q_bar + sm.m_bar) : 0.5;
  return sm;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> scale_for_theta(
    const SimilarityModel& sm, std::optional<double> theta_override) {
  const double theta = theta_override.value_or(sm.theta);
  if (!(theta >= 0.0 && theta <= 1.0))
    throw ConfigError("theta must lie in [0, 1], got " + std::to_string(theta));
  return {(1.0 - theta) * sm.Q, theta * sm.s};
}

}  // namespace redcut
