#include "redcut/selectors.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace redcut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> all_features(int m) {
  std::vector<int> v(m);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void validate_irr_params(const IrrParams& p) {
  if (p.k < 2) throw ConfigError("k (subclusters per split) must be >= 2");
  if (!(p.tau > 0.0 && p.tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (p.levels < 1) throw ConfigError("levels must be >= 1");
}

// Maps a ranking of a restricted model back to global ids and snapped scores.
void fill_ranking(SelectionResult& r, const SimplexSolution& sol, const SimilarityModel& model,
                  const std::vector<int>& global_ids) {
  const std::vector<int> local = rank_by_alpha(sol.alpha, model.s);
  r.ranked.reserve(local.size());
  r.scores.reserve(local.size());
  for (int li : local) {
    r.ranked.push_back(global_ids[li]);
    r.scores.push_back(sol.alpha(li) > kZeroTol ? sol.alpha(li) : 0.0);
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Qpfs: return "qpfs";
    case Method::Tlkm: return "tlkm-qpfs";
    case Method::Ikm: return "ikm-qpfs";
    case Method::Ikma: return "ikma-qpfs";
  }
  return "qpfs";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "qpfs") return Method::Qpfs;
  if (name == "tlkm" || name == "tlkm-qpfs") return Method::Tlkm;
  if (name == "ikm" || name == "ikm-qpfs") return Method::Ikm;
  if (name == "ikma" || name == "ikma-qpfs") return Method::Ikma;
  return {};
}

SelectionContext::SelectionContext(const DiscretizedDataset& dd, std::span<const int> labels,
                                   int threads, bool normalized_q)
    : sim_(build_similarity(dd, labels, threads, normalized_q)),
      space_(FeatureSpace::from_similarity(dd, sim_)) {}

SelectionContext::SelectionContext(SimilarityModel sim, const DiscretizedDataset& dd)
    : sim_(std::move(sim)), space_(FeatureSpace::from_similarity(dd, sim_)) {}

SimplexSolution SelectionContext::solve_model(const SimilarityModel& model,
                                              std::optional<double> theta_override,
                                              bool freeze_theta, double qp_tol,
                                              Instrumentation& instr, double* theta_used) const {
  const double theta =
      theta_override ? *theta_override : (freeze_theta ? sim_.theta : model.theta);
  if (theta_used) *theta_used = theta;
  auto [q_scaled, s_scaled] = scale_for_theta(model, theta);
  QpOptions opts;
  opts.tol = qp_tol;
  SimplexSolution sol = solve_simplex_qp(q_scaled, s_scaled, opts);
  ++instr.qp_calls;
  instr.qp_sizes.push_back(model.size());
  return sol;
}

SelectionResult SelectionContext::qpfs(std::optional<double> theta, double qp_tol) const {
  const auto t0 = Clock::now();
  SelectionResult r;
  r.method = Method::Qpfs;
  double theta_used = 0.0;
  SimplexSolution sol = solve_model(sim_, theta, false, qp_tol, r.instr, &theta_used);
  fill_ranking(r, sol, sim_, all_features(sim_.size()));
  r.params.theta_override = theta;
  r.params.theta_top = theta_used;
  r.params.qp_tol = qp_tol;
  r.instr.wall_time_sec = seconds_since(t0);
  return r;
}

SelectionResult SelectionContext::tlkm_qpfs(int k_init, double tau, std::optional<double> theta,
                                            double qp_tol) const {
  const auto t0 = Clock::now();
  if (k_init < 1 || k_init > sim_.size())
    throw ConfigError("k-init must lie in [1, " + std::to_string(sim_.size()) + "]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");

  SelectionResult r;
  r.method = Method::Tlkm;
  DistanceCounter counter;
  const std::vector<int> features = all_features(sim_.size());
  ClusteringResult clustering = tlkm(features, k_init, tau, space_, counter);

  std::vector<int> reps;
  reps.reserve(clustering.clusters.size());
  for (const auto& c : clustering.clusters) reps.push_back(c.representative);

  const SimilarityModel sub = sim_.restricted_to(reps);
  double theta_used = 0.0;
  SimplexSolution sol = solve_model(sub, theta, false, qp_tol, r.instr, &theta_used);
  fill_ranking(r, sol, sub, reps);

  r.representatives = reps;
  r.instr.distance_count = counter.count();
  r.instr.clustering_distance_count =
      std::accumulate(clustering.level_counts.begin(), clustering.level_counts.end(),
                      std::uint64_t{0});
  r.instr.radius_distance_count = clustering.radius_check_count;
  r.instr.levels_used = static_cast<int>(clustering.level_counts.size());
  r.params.theta_override = theta;
  r.params.theta_top = theta_used;
  r.params.k_init = k_init;
  r.params.tau = tau;
  r.params.qp_tol = qp_tol;
  r.instr.wall_time_sec = seconds_since(t0);
  return r;
}

std::vector<int> SelectionContext::irr(const std::vector<FeatureCluster>& clusters,
                                       const Eigen::VectorXd& alpha, const IrrParams& p, int level,
                                       Instrumentation& instr, DistanceCounter& counter,
                                       std::optional<double> theta_override, double qp_tol) const {
  if (static_cast<int>(clusters.size()) != alpha.size())
    throw ConfigError("irr: alpha is not aligned with the cluster list");
  instr.levels_used = std::max(instr.levels_used, level);

  std::vector<int> survivors;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    // Aggressive mode drops an irrelevant cluster before even measuring it.
    if (p.aggressive && alpha(static_cast<int>(i)) <= p.zero_tol) {
      ++instr.discarded_cluster_count;
      instr.discard_levels.push_back(level);
      continue;
    }
    FeatureCluster c = clusters[i];
    const double radius = cluster_radius(c, space_, counter);
    instr.radius_distance_count += c.members.size();

    if (radius < p.tau || level == p.levels) {
      if (alpha(static_cast<int>(i)) > p.zero_tol) {
        survivors.push_back(c.representative);
      } else {
        ++instr.discarded_cluster_count;
        instr.discard_levels.push_back(level);
      }
      continue;
    }

    // Oversized cluster: split and refine regardless of its weight.
    const int sub_k = std::min(p.k, static_cast<int>(c.members.size()));
    ClusteringResult sub = variant_macqueen(c.members, sub_k, space_, counter);
    instr.clustering_distance_count += sub.distance_count;

    std::vector<int> sub_reps;
    sub_reps.reserve(sub.clusters.size());
    for (const auto& sc : sub.clusters) sub_reps.push_back(sc.representative);
    const SimilarityModel sub_model = sim_.restricted_to(sub_reps);
    SimplexSolution sol = solve_model(sub_model, theta_override, p.freeze_theta, qp_tol, instr);

    std::vector<int> from_sub =
        irr(sub.clusters, sol.alpha, p, level + 1, instr, counter, theta_override, qp_tol);
    survivors.insert(survivors.end(), from_sub.begin(), from_sub.end());
  }
  std::sort(survivors.begin(), survivors.end());
  return survivors;
}

SelectionResult SelectionContext::ikm_common(IrrParams p, std::optional<double> theta,
                                             double qp_tol) const {
  validate_irr_params(p);
  const auto t0 = Clock::now();
  SelectionResult r;
  r.method = p.aggressive ? Method::Ikma : Method::Ikm;
  DistanceCounter counter;

  const int m = sim_.size();
  const std::vector<int> features = all_features(m);
  const int k0 = std::min(p.k, m);
  ClusteringResult init = variant_macqueen(features, k0, space_, counter);
  r.instr.clustering_distance_count += init.distance_count;
  r.instr.levels_used = 1;

  std::vector<int> reps;
  reps.reserve(init.clusters.size());
  for (const auto& c : init.clusters) reps.push_back(c.representative);
  const SimilarityModel rep_model = sim_.restricted_to(reps);
  double theta_used = 0.0;
  SimplexSolution rep_sol =
      solve_model(rep_model, theta, p.freeze_theta, qp_tol, r.instr, &theta_used);

  std::vector<int> survivors =
      irr(init.clusters, rep_sol.alpha, p, 1, r.instr, counter, theta, qp_tol);

  if (static_cast<int>(survivors.size()) > p.final_qp_cap)
    throw ConfigError("final selection QP would have " + std::to_string(survivors.size()) +
                      " variables (cap " + std::to_string(p.final_qp_cap) +
                      "); raise the cap or tighten tau/levels");

  if (!survivors.empty()) {
    const SimilarityModel final_model = sim_.restricted_to(survivors);
    SimplexSolution final_sol = solve_model(final_model, theta, p.freeze_theta, qp_tol, r.instr);
    fill_ranking(r, final_sol, final_model, survivors);
  }

  r.representatives = survivors;
  r.instr.distance_count = counter.count();
  r.params.theta_override = theta;
  r.params.theta_top = theta_used;
  r.params.k = p.k;
  r.params.tau = p.tau;
  r.params.levels = p.levels;
  r.params.qp_tol = qp_tol;
  r.params.zero_tol = p.zero_tol;
  r.params.aggressive = p.aggressive;
  r.params.freeze_theta = p.freeze_theta;
  r.instr.wall_time_sec = seconds_since(t0);
  return r;
}

SelectionResult SelectionContext::ikm_qpfs(IrrParams p, std::optional<double> theta,
                                           double qp_tol) const {
  p.aggressive = false;
  return ikm_common(p, theta, qp_tol);
}

SelectionResult SelectionContext::ikma_qpfs(IrrParams p, std::optional<double> theta,
                                            double qp_tol) const {
  p.aggressive = true;
  return ikm_common(p, theta, qp_tol);
}

std::vector<int> top_k(const SelectionResult& r, int k) {
  if (k < 1) throw ConfigError("top_k: k must be >= 1");
  const std::size_t take = std::min<std::size_t>(k, r.ranked.size());
  return std::vector<int>(r.ranked.begin(), r.ranked.begin() + take);
}

}  // namespace redcut
