#include "redcut/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace redcut {

FeatureSpace::FeatureSpace(Eigen::MatrixXd points, Metric metric)
    : points_(std::move(points)), metric_(std::move(metric)) {
  if (!metric_) throw ConfigError("FeatureSpace: metric is required");
}

FeatureSpace FeatureSpace::from_similarity(const DiscretizedDataset& dd,
                                           const SimilarityModel& sm) {
  if (dd.n_features() != sm.size())
    throw ConfigError("FeatureSpace: codes and similarity model disagree on feature count");
  Eigen::MatrixXd pts = dd.codes.cast<double>();
  const SimilarityModel* model = &sm;
  return FeatureSpace(std::move(pts), [model](int i, int j) { return model->distance(i, j); });
}

namespace {

double sq_dist_to_mean(const FeatureSpace& space, int feature, const Eigen::RowVectorXd& mean,
                       DistanceCounter& counter) {
  counter.add();
  return (space.point(feature) - mean).squaredNorm();
}

struct Working {
  std::vector<std::vector<int>> members;
  std::vector<Eigen::RowVectorXd> means;
  std::vector<int> reps;
};

// One sweep picking each cluster's representative as the member nearest the
// running mean. Costs exactly one mean-distance evaluation per feature.
void select_representatives(Working& w, const FeatureSpace& space, DistanceCounter& counter) {
  for (std::size_t c = 0; c < w.members.size(); ++c) {
    double best = std::numeric_limits<double>::infinity();
    int rep = -1;
    for (int f : w.members[c]) {
      const double d = sq_dist_to_mean(space, f, w.means[c], counter);
      if (d < best) {
        best = d;
        rep = f;
      }
    }
    w.reps[c] = rep;
  }
}

}  // namespace

ClusteringResult variant_macqueen(std::span<const int> features, int k,
                                  const FeatureSpace& space, DistanceCounter& counter) {
  const int m = static_cast<int>(features.size());
  if (m == 0) throw ConfigError("variant_macqueen: empty feature set");
  if (k < 1 || k > m)
    throw ConfigError("variant_macqueen: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(m) + "]");

  const std::uint64_t start = counter.count();
  Working w;
  w.members.resize(k);
  w.means.reserve(k);
  w.reps.resize(k);

  // Pass 1: first k features seed the clusters; the rest are assigned to the
  // nearest representative, updating the running means.
  for (int c = 0; c < k; ++c) {
    w.members[c] = {features[c]};
    w.means.push_back(space.point(features[c]));
    w.reps[c] = features[c];
  }
  for (int j = k; j < m; ++j) {
    const int f = features[j];
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < k; ++c) {
      const double d = space.distance(f, w.reps[c], counter);
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    w.members[best_c].push_back(f);
    const double sz = static_cast<double>(w.members[best_c].size());
    w.means[best_c] += (space.point(f) - w.means[best_c]) / sz;
  }
  select_representatives(w, space, counter);

  // Pass 2: reassign every non-representative feature against the pass-1
  // representatives, rebuilding clusters and means; then reselect.
  std::vector<int> pass1_reps = w.reps;
  std::vector<bool> is_rep(space.size(), false);
  for (int r : pass1_reps) is_rep[r] = true;
  for (int c = 0; c < k; ++c) {
    w.members[c] = {pass1_reps[c]};
    w.means[c] = space.point(pass1_reps[c]);
  }
  for (int j = 0; j < m; ++j) {
    const int f = features[j];
    if (is_rep[f]) continue;
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < k; ++c) {
      const double d = space.distance(f, pass1_reps[c], counter);
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    w.members[best_c].push_back(f);
    const double sz = static_cast<double>(w.members[best_c].size());
    w.means[best_c] += (space.point(f) - w.means[best_c]) / sz;
  }
  select_representatives(w, space, counter);

  ClusteringResult out;
  out.clusters.resize(k);
  for (int c = 0; c < k; ++c) {
    out.clusters[c].members = std::move(w.members[c]);
    std::sort(out.clusters[c].members.begin(), out.clusters[c].members.end());
    out.clusters[c].representative = w.reps[c];
  }
  out.distance_count = counter.count() - start;
  out.level_counts = {out.distance_count};
  return out;
}

double cluster_radius(FeatureCluster& c, const FeatureSpace& space, DistanceCounter& counter) {
  if (c.members.empty()) throw ConfigError("cluster_radius: empty cluster");
  double r = 0.0;
  for (int f : c.members) r = std::max(r, space.distance(f, c.representative, counter));
  c.radius = r;
  return r;
}

int subcluster_count(double radius, double tau, int n, int cluster_size) {
  if (cluster_size <= 1) return 1;
  // (radius/tau)^n in log space; overflows to the saturation value otherwise.
  const double log_count = static_cast<double>(n) * std::log(radius / tau);
  if (log_count >= std::log(static_cast<double>(cluster_size))) return cluster_size;
  return std::min(cluster_size, static_cast<int>(std::ceil(std::exp(log_count))));
}

ClusteringResult tlkm(std::span<const int> features, int k_init, double tau,
                      const FeatureSpace& space, DistanceCounter& counter) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tlkm: tau must lie in (0, 1]");
  const int n = space.dim();

  ClusteringResult level1 = variant_macqueen(features, k_init, space, counter);
  const std::uint64_t radius_start = counter.count();
  for (auto& c : level1.clusters) cluster_radius(c, space, counter);
  const std::uint64_t radius_tally = counter.count() - radius_start;

  ClusteringResult out;
  out.level_counts = {level1.level_counts[0]};
  out.radius_check_count = radius_tally;
  std::uint64_t level2_tally = 0;
  for (auto& c : level1.clusters) {
    if (c.radius > tau && static_cast<int>(c.members.size()) > 1) {
      const int sub_k = subcluster_count(c.radius, tau, n, static_cast<int>(c.members.size()));
      ClusteringResult sub = variant_macqueen(c.members, sub_k, space, counter);
      level2_tally += sub.distance_count;
      for (auto& sc : sub.clusters) out.clusters.push_back(std::move(sc));
    } else {
      out.clusters.push_back(std::move(c));
    }
  }
  if (level2_tally > 0) out.level_counts.push_back(level2_tally);
  out.distance_count = out.level_counts[0] + level2_tally + radius_tally;
  return out;
}

TauBounds tau_bounds(double enclosing_r, int k, int m, int n) {
  if (!(enclosing_r > 0.0)) throw ConfigError("tau_bounds: R must be positive");
  if (k <= 0 || k >= m) throw ConfigError("tau_bounds: need 0 < k < M");
  if (n < 1) throw ConfigError("tau_bounds: N must be >= 1");
  const double inv_n = 1.0 / static_cast<double>(n);
  const double by_k = enclosing_r / std::pow(static_cast<double>(k), inv_n);
  const double by_rest = enclosing_r / std::pow(static_cast<double>(m - k), inv_n);
  return TauBounds{std::max(by_k, by_rest), enclosing_r};
}

double enclosing_radius(std::span<const int> features, const FeatureSpace& space,
                        DistanceCounter& counter) {
  if (features.empty()) throw ConfigError("enclosing_radius: empty feature set");
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(space.dim());
  for (int f : features) mean += space.point(f);
  mean /= static_cast<double>(features.size());

  double best = std::numeric_limits<double>::infinity();
  int center = features[0];
  for (int f : features) {
    const double d = sq_dist_to_mean(space, f, mean, counter);
    if (d < best) {
      best = d;
      center = f;
    }
  }
  double r = 0.0;
  for (int f : features) r = std::max(r, space.distance(f, center, counter));
  return r;
}

}  // namespace redcut
