#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "redcut/clustering.hpp"
#include "redcut/eval.hpp"
#include "redcut/selectors.hpp"

// Stable JSON shapes consumed by the CLI and external tooling. Field names are
// part of the interface; bump schema_version on breaking changes.
namespace redcut {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Instrumentation& instr, bool include_wall_time = true);
nlohmann::json to_json(const SelectionParams& params);
nlohmann::json to_json(const SelectionResult& result);
nlohmann::json to_json(const ClusteringResult& result);

/// Eval reports are seed-deterministic: wall-clock timings are intentionally
/// not part of this JSON (the CLI prints them to stderr instead).
nlohmann::json to_json(const EvalReport& report);

/// Flat rows "method,k,mean_error,std_error".
std::string to_csv(const EvalReport& report);

}  // namespace redcut
