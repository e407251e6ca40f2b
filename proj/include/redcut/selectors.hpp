#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "redcut/clustering.hpp"
#include "redcut/infotheory.hpp"
#include "redcut/qp.hpp"

namespace redcut {

enum class Method { Qpfs, Tlkm, Ikm, Ikma };

std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Parameters of the interleaved refinement: each oversized cluster is split
/// into k subclusters, recursion stops at `levels` or when a radius drops
/// under tau. `aggressive` discards a whole cluster as soon as its
/// representative gets zero weight, before looking at the radius.
struct IrrParams {
  int k = 15;
  double tau = 0.8;
  int levels = 3;
  double zero_tol = kZeroTol;
  bool aggressive = false;
  bool freeze_theta = false;  // reuse the top-level theta in nested QPs
  int final_qp_cap = 5000;    // refuse final QPs larger than this
};

struct Instrumentation {
  std::uint64_t distance_count = 0;             // every metric/mean evaluation
  std::uint64_t clustering_distance_count = 0;  // k-means passes only
  std::uint64_t radius_distance_count = 0;      // radius checks only
  int qp_calls = 0;
  std::vector<int> qp_sizes;
  int levels_used = 0;
  int discarded_cluster_count = 0;
  std::vector<int> discard_levels;
  double wall_time_sec = 0.0;
};

struct SelectionParams {
  std::optional<double> theta_override;
  double theta_top = 0.0;  // effective top-level theta
  std::optional<int> k;
  std::optional<int> k_init;
  std::optional<double> tau;
  std::optional<int> levels;
  double qp_tol = 1e-7;
  double zero_tol = kZeroTol;
  std::uint64_t seed = kDefaultSeed;
  bool aggressive = false;
  bool freeze_theta = false;
};

struct SelectionResult {
  Method method = Method::Qpfs;
  std::vector<int> ranked;          // distinct feature ids, best first
  std::vector<double> scores;       // weight per ranked feature, non-increasing
  std::vector<int> representatives; // terminal representative set; empty for qpfs
  SelectionParams params;
  Instrumentation instr;
};

/// Owns the similarity model and the clustering space for one dataset and
/// runs the four selection pipelines on it. The heavy O(M^2 N) similarity
/// pass happens once, at construction (or is supplied from a cache); the
/// selectors themselves only read it.
class SelectionContext {
 public:
  SelectionContext(const DiscretizedDataset& dd, std::span<const int> labels, int threads = 0,
                   bool normalized_q = false);
  SelectionContext(SimilarityModel sim, const DiscretizedDataset& dd);

  SelectionContext(const SelectionContext&) = delete;
  SelectionContext& operator=(const SelectionContext&) = delete;

  const SimilarityModel& similarity() const { return sim_; }
  const FeatureSpace& space() const { return space_; }
  int n_features() const { return sim_.size(); }

  /// Full-rank selection: scale by theta, solve one QP over all features.
  SelectionResult qpfs(std::optional<double> theta = {}, double qp_tol = 1e-7) const;

  /// Two-level clustering, then one QP over the representatives.
  SelectionResult tlkm_qpfs(int k_init, double tau, std::optional<double> theta = {},
                            double qp_tol = 1e-7) const;

  /// Interleaved refinement: cluster, weigh representatives, recursively
  /// split or discard, then rank the survivors with a final QP.
  SelectionResult ikm_qpfs(IrrParams p, std::optional<double> theta = {},
                           double qp_tol = 1e-7) const;

  /// ikm_qpfs with the aggressive zero-weight discard enabled.
  SelectionResult ikma_qpfs(IrrParams p, std::optional<double> theta = {},
                            double qp_tol = 1e-7) const;

  /// The identify-relevant-and-refine recursion, exposed on its own:
  /// alpha(i) weighs clusters[i].representative. Returns the surviving
  /// feature set, sorted ascending.
  std::vector<int> irr(const std::vector<FeatureCluster>& clusters, const Eigen::VectorXd& alpha,
                       const IrrParams& p, int level, Instrumentation& instr,
                       DistanceCounter& counter, std::optional<double> theta_override = {},
                       double qp_tol = 1e-7) const;

 private:
  SimplexSolution solve_model(const SimilarityModel& model, std::optional<double> theta_override,
                              bool freeze_theta, double qp_tol, Instrumentation& instr,
                              double* theta_used = nullptr) const;
  SelectionResult ikm_common(IrrParams p, std::optional<double> theta, double qp_tol) const;

  SimilarityModel sim_;
  FeatureSpace space_;
};

/// First min(k, |ranked|) entries of the ranking.
std::vector<int> top_k(const SelectionResult& r, int k);

}  // namespace redcut
