#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "simlane/detector.hpp"
#include "simlane/evaluation.hpp"
#include "simlane/sim_core.hpp"

namespace simlane {

struct Condition;

struct SimTimeCondition {
  double ge = 0.0;
  friend bool operator==(const SimTimeCondition&, const SimTimeCondition&) = default;
};

struct ReachStationCondition {
  std::string entity;
  double ge = 0.0;
  friend bool operator==(const ReachStationCondition&, const ReachStationCondition&) = default;
};

/// Center-to-center distance.
struct RelativeDistanceCondition {
  std::string a;
  std::string b;
  double le = 0.0;
  friend bool operator==(const RelativeDistanceCondition&, const RelativeDistanceCondition&) = default;
};

struct SpeedCondition {
  std::string entity;
  CompareOp op = CompareOp::ge;  // ge or le
  double value = 0.0;
  friend bool operator==(const SpeedCondition&, const SpeedCondition&) = default;
};

struct AllOfCondition {
  std::vector<Condition> conditions;
};

struct AnyOfCondition {
  std::vector<Condition> conditions;
};

struct Condition {
  std::variant<SimTimeCondition, ReachStationCondition, RelativeDistanceCondition, SpeedCondition,
               AllOfCondition, AnyOfCondition>
      node;
};

bool operator==(const AllOfCondition& l, const AllOfCondition& r);
bool operator==(const AnyOfCondition& l, const AnyOfCondition& r);
bool operator==(const Condition& l, const Condition& r);

struct SetTargetSpeedAction {
  std::string entity;
  double value = 0.0;
  friend bool operator==(const SetTargetSpeedAction&, const SetTargetSpeedAction&) = default;
};

/// Re-seats an entity on a path; speed is kept.
struct TeleportAction {
  std::string entity;
  std::string path;
  double station = 0.0;
  friend bool operator==(const TeleportAction&, const TeleportAction&) = default;
};

struct SpawnAction {
  EntityDecl entity;
  friend bool operator==(const SpawnAction&, const SpawnAction&) = default;
};

struct DespawnAction {
  std::string entity;
  friend bool operator==(const DespawnAction&, const DespawnAction&) = default;
};

using Action = std::variant<SetTargetSpeedAction, TeleportAction, SpawnAction, DespawnAction>;

/// Edge-triggered: fires at most once per run.
struct Event {
  std::string name;
  Condition trigger;
  std::vector<Action> actions;
  friend bool operator==(const Event&, const Event&) = default;
};

struct StopSpec {
  std::vector<Condition> any_of;
  double timeout_s = 0.0;
  friend bool operator==(const StopSpec&, const StopSpec&) = default;
};

struct ScenarioSensor {
  SensorConfig config;
  std::optional<DetectorConfig> detector;  // range_scan only
  friend bool operator==(const ScenarioSensor&, const ScenarioSensor&) = default;
};

struct ScenarioSpec {
  std::string name;
  std::vector<PathModel> paths;
  std::vector<EntityDecl> entities;
  std::vector<ScenarioSensor> sensors;
  std::vector<Event> events;
  StopSpec stop;
  std::vector<CriterionSpec> criteria;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Parses and validates a JSON scenario document. Throws ParseError for
/// malformed text and ValidationError (with a document path such as
/// `entities[1].id`) for everything else. Unknown keys are rejected.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec parse_scenario_json(const nlohmann::json& doc);

/// Canonical document with every default spelled out; parse of the result
/// yields an equal spec.
nlohmann::json serialize_scenario(const ScenarioSpec& spec);

/// Parses document text into JSON only, mapping syntax errors to ParseError.
nlohmann::json parse_json_text(const std::string& text);

WorldState init_world(const ScenarioSpec& spec, std::uint64_t seed);

/// Inclusive comparisons; any reference to a dead or unknown entity makes
/// the leaf false.
bool eval_condition(const Condition& cond, const WorldState& world);

/// Throws ActionError when the action cannot apply (spawn of an alive id,
/// despawn/retarget of a missing entity, station off the path).
WorldState apply_action(const Action& action, const WorldState& world);

std::string action_type(const Action& action);

}  // namespace simlane
