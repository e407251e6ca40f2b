#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "redcut/common.hpp"
#include "redcut/infotheory.hpp"

namespace redcut {

/// Exact tally of distance evaluations. Additions are atomic so assignment
/// passes may run concurrently; the counter never resets mid-run.
class DistanceCounter {
 public:
  void add(std::uint64_t n = 1) { n_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t count() const { return n_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> n_{0};
};

using Metric = std::function<double(int, int)>;

/// The space features are clustered in: `points` holds one embedding row per
/// feature (used only to track cluster means and pick representatives);
/// `metric` is the distance actually minimized, indexed by feature id.
class FeatureSpace {
 public:
  FeatureSpace(Eigen::MatrixXd points, Metric metric);

  /// Production space: embedding = discretized codes as reals, metric = the
  /// normalized information distance derived from the similarity model. The
  /// model must outlive the space.
  static FeatureSpace from_similarity(const DiscretizedDataset& dd, const SimilarityModel& sm);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  double distance(int i, int j, DistanceCounter& counter) const {
    counter.add();
    return metric_(i, j);
  }
  Eigen::Ref<const Eigen::RowVectorXd> point(int i) const { return points_.row(i); }

 private:
  Eigen::MatrixXd points_;
  Metric metric_;
};

struct FeatureCluster {
  std::vector<int> members;  // sorted feature ids; nonempty
  int representative = -1;   // always one of members, never a synthetic mean
  double radius = -1.0;      // max distance member->representative; <0: not computed
};

struct ClusteringResult {
  std::vector<FeatureCluster> clusters;          // partition of the input features
  std::uint64_t distance_count = 0;              // total evaluations, all sources
  std::vector<std::uint64_t> level_counts;       // per-level clustering-pass tallies
  std::uint64_t radius_check_count = 0;          // evaluations spent measuring radii
};

/// Radius thresholds that make a two-level split worthwhile:
/// max(R/k^(1/N), R/(M-k)^(1/N)) <= tau <= R.
struct TauBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Two-pass k-means over features seeded with the first k of them. Assignment
/// minimizes the metric against the current representatives; after each pass
/// the member nearest its cluster's running mean (squared Euclidean in the
/// embedding) becomes the representative. Representatives stay in their own
/// clusters during reassignment, so each pass costs k(M-k) metric evaluations
/// plus M mean-distance evaluations: 2Mk - 2k^2 + 2M in total.
ClusteringResult variant_macqueen(std::span<const int> features, int k,
                                  const FeatureSpace& space, DistanceCounter& counter);

/// Computes (and caches on the cluster) the max distance from the
/// representative to the members; adds |members| to the counter.
double cluster_radius(FeatureCluster& c, const FeatureSpace& space, DistanceCounter& counter);

/// Coarse pass with k_init clusters, then every cluster whose radius exceeds
/// tau is split with subcluster count (r/tau)^N, evaluated in log space and
/// saturated at the cluster size.
ClusteringResult tlkm(std::span<const int> features, int k_init, double tau,
                      const FeatureSpace& space, DistanceCounter& counter);

/// Subcluster count for a split: min(cluster_size, ceil((radius/tau)^n)).
int subcluster_count(double radius, double tau, int n, int cluster_size);

TauBounds tau_bounds(double enclosing_r, int k, int m, int n);

/// Approximate enclosing radius: the max distance from the feature nearest
/// the global mean to any feature. Costs 2M evaluations.
double enclosing_radius(std::span<const int> features, const FeatureSpace& space,
                        DistanceCounter& counter);

}  // namespace redcut
