#include "redcut/report.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace redcut {

using nlohmann::json;

json to_json(const Instrumentation& instr, bool include_wall_time) {
  json j{
      {"distance_count", instr.distance_count},
      {"clustering_distance_count", instr.clustering_distance_count},
      {"radius_distance_count", instr.radius_distance_count},
      {"qp_calls", instr.qp_calls},
      {"qp_sizes", instr.qp_sizes},
      {"levels_used", instr.levels_used},
      {"discarded_cluster_count", instr.discarded_cluster_count},
      {"discard_levels", instr.discard_levels},
  };
  if (include_wall_time) j["wall_time_sec"] = instr.wall_time_sec;
  return j;
}

json to_json(const SelectionParams& p) {
  json j{
      {"theta", p.theta_top},
      {"qp_tol", p.qp_tol},
      {"zero_tol", p.zero_tol},
      {"seed", p.seed},
  };
  j["theta_override"] = p.theta_override ? json(*p.theta_override) : json(nullptr);
  if (p.k) j["k"] = *p.k;
  if (p.k_init) j["k_init"] = *p.k_init;
  if (p.tau) j["tau"] = *p.tau;
  if (p.levels) j["levels"] = *p.levels;
  if (p.aggressive) j["aggressive"] = true;
  if (p.freeze_theta) j["freeze_theta"] = true;
  return j;
}

json to_json(const SelectionResult& r) {
  return json{
      {"schema_version", kReportSchemaVersion},
      {"method", method_name(r.method)},
      {"params", to_json(r.params)},
      {"ranked", r.ranked},
      {"scores", r.scores},
      {"representatives", r.representatives},
      {"instrumentation", to_json(r.instr)},
  };
}

json to_json(const ClusteringResult& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) {
    json jc{{"members", c.members}, {"representative", c.representative}};
    if (c.radius >= 0.0) jc["radius"] = c.radius;
    clusters.push_back(std::move(jc));
  }
  return json{
      {"clusters", std::move(clusters)},
      {"distance_count", r.distance_count},
      {"level_counts", r.level_counts},
      {"radius_check_count", r.radius_check_count},
  };
}

json to_json(const EvalReport& rep) {
  json per_k = json::array();
  for (const auto& [k, st] : rep.per_k_error)
    per_k.push_back(json{{"k", k}, {"mean_error", st.mean}, {"std_error", st.stddev}});
  json j{
      {"schema_version", kReportSchemaVersion},
      {"method", rep.method},
      {"C", rep.C},
      {"seed", rep.seed},
      {"n_repeats", rep.n_repeats},
      {"k_grid", rep.k_grid},
      {"per_k", std::move(per_k)},
      {"baseline",
       json{{"mean_error", rep.baseline_error.mean}, {"std_error", rep.baseline_error.stddev}}},
      {"counters", to_json(rep.counters, /*include_wall_time=*/false)},
  };
  if (rep.kmeans_baseline_error)
    j["kmeans_baseline"] = json{{"mean_error", rep.kmeans_baseline_error->mean},
                                {"std_error", rep.kmeans_baseline_error->stddev}};
  return j;
}

std::string to_csv(const EvalReport& rep) {
  std::ostringstream out;
  out << "method,k,mean_error,std_error\n";
  out.precision(17);
  for (const auto& [k, st] : rep.per_k_error)
    out << rep.method << ',' << k << ',' << st.mean << ',' << st.stddev << '\n';
  return out.str();
}

}  // namespace redcut
