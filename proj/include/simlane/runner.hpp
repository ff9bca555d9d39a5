#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simlane/bus.hpp"
#include "simlane/evaluation.hpp"
#include "simlane/scenario.hpp"

namespace simlane {

enum class EndReason { stop_condition, timeout, error };
std::string to_string(EndReason reason);

struct RunOptions {
  double dt = 0.05;
  std::uint64_t seed = 0;
  std::optional<double> duration_s;  // replaces stop.timeout_s when set
  bool collision_check = true;
};

/// One applied (or failed) action.
struct ActionLogEntry {
  std::int64_t tick = 0;
  std::string event;
  std::string action;
  std::string error;  // non-empty when the action was skipped

  friend bool operator==(const ActionLogEntry&, const ActionLogEntry&) = default;
};

struct RunResult {
  std::string scenario_name;
  EndReason end_reason = EndReason::timeout;
  std::int64_t ticks = 0;
  double end_time = 0.0;
  std::vector<std::pair<std::string, double>> metrics;  // criterion order
  std::vector<Verdict> verdicts;
  bool has_criteria = false;
  bool passed = true;  // all verdicts pass
  std::string artifact_dir;
  std::string diagnostic;
  std::vector<ActionLogEntry> action_log;
  std::vector<std::string> delivery_failures;
};

nlohmann::ordered_json to_json(const RunResult& result);

/// Number of ticks after which the run times out.
std::int64_t timeout_ticks(double timeout_s, double dt);

/// Drives one run on `bus`: per tick, step the world, publish clock,
/// snapshot, collisions and sensors (declaration order), fire pending
/// events in document order, then check stop conditions. Criteria are
/// evaluated on the finished trace. Never throws: internal failures end the
/// run with EndReason::error.
RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& options, Bus& bus,
                       Trace* trace_out = nullptr);

inline constexpr const char* kExecuteService = "scenario.execute";

/// Registers `scenario.execute`. Request: `{"scenario": <path>}` or
/// `{"document": {...}}`, optional `dt`, `seed`, `duration_s`. Each call
/// runs synchronously on a private bus and answers with the RunResult.
void provide_scenario_service(Bus& bus, RunOptions defaults = {});

}  // namespace simlane
