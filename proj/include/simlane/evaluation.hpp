#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "simlane/messages.hpp"

namespace simlane {

/// Value of min_ttc when no tick has a positive closing speed.
inline constexpr double kNoTtc = 1e18;

enum class MetricKind {
  collision_count,
  min_center_distance,
  min_ttc,
  goal_reached,
  max_speed,
  detection_precision,
  detection_recall,
  detection_position_rmse,
};

std::string to_string(MetricKind kind);
/// Throws ValidationError (empty path) on an unknown name.
MetricKind metric_kind_from_string(const std::string& name);

struct MetricSpec {
  MetricKind kind = MetricKind::collision_count;
  std::string entity;     // goal_reached, max_speed, detection_*
  std::string a;          // min_center_distance, min_ttc
  std::string b;
  double station = 0.0;   // goal_reached
  double by_time_s = 0.0; // goal_reached
  double radius_m = 0.0;  // detection_*

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

/// e.g. `max_speed{entity=ego}`.
std::string metric_label(const MetricSpec& metric);

enum class CompareOp { eq, ne, lt, le, gt, ge };

std::string to_string(CompareOp op);
/// Throws ValidationError (empty path) on an unknown operator.
CompareOp compare_op_from_string(const std::string& op);
bool compare(double observed, CompareOp op, double value);

struct CriterionSpec {
  MetricSpec metric;
  CompareOp op = CompareOp::eq;
  double value = 0.0;

  friend bool operator==(const CriterionSpec&, const CriterionSpec&) = default;
};

/// e.g. `max_speed{entity=ego} <= 10`.
std::string criterion_label(const CriterionSpec& criterion);

struct Verdict {
  std::string criterion;
  std::string metric;
  CompareOp op = CompareOp::eq;
  double value = 0.0;
  double observed = 0.0;
  bool passed = false;
  std::string error;  // non-empty when the metric could not be computed
};

struct CriteriaOutcome {
  std::vector<Verdict> verdicts;
  bool passed = true;
};

struct TraceTick {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::map<std::string, EntityState> entities;
  std::vector<CollisionEvent> collisions;
  std::map<std::string, DetectedObjects> detections;  // keyed by mount entity
};

/// Materialized run: ticks contiguous from 0 (the initial state).
struct Trace {
  std::string scenario;
  double dt = 0.0;
  std::vector<SensorConfig> sensors;
  std::vector<TraceTick> ticks;
};

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double sum_sq_position_error = 0.0;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Greedy matching over candidate pairs in ascending center distance; a
/// pair matches iff its distance <= radius.
MatchResult match_detections(const DetectedObjects& detections, const ObjectList& truth, double radius);

/// Throws EvaluationError when a referenced entity is absent from every tick.
double compute_metric(const MetricSpec& metric, const Trace& trace);

/// One verdict per criterion in order; overall pass iff all pass.
CriteriaOutcome evaluate_criteria(const std::vector<CriterionSpec>& criteria, const Trace& trace);

}  // namespace simlane
