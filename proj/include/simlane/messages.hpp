#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "simlane/sim_core.hpp"

namespace simlane {

struct Clock {
  std::int64_t tick = 0;
  double sim_time = 0.0;

  friend bool operator==(const Clock&, const Clock&) = default;
};

/// Alive entities after a step; published on `/sim/objects`.
struct WorldSnapshot {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::vector<EntityState> entities;

  friend bool operator==(const WorldSnapshot&, const WorldSnapshot&) = default;
};

struct CollisionList {
  double sim_time = 0.0;
  std::vector<CollisionEvent> events;

  friend bool operator==(const CollisionList&, const CollisionList&) = default;
};

struct DetectedObject {
  Vec2 center;          // global frame
  double extent = 0.0;  // max pairwise hit-point distance
  int support = 0;      // beams in the cluster

  friend bool operator==(const DetectedObject&, const DetectedObject&) = default;
};

struct DetectedObjects {
  double sim_time = 0.0;
  std::vector<DetectedObject> objects;

  friend bool operator==(const DetectedObjects&, const DetectedObjects&) = default;
};

/// Scenario progress on `/scenario/status`: `kind` is "event" (with the
/// fired event name in `detail`) or "end" (with the end reason).
struct ScenarioStatus {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::string kind;
  std::string detail;

  friend bool operator==(const ScenarioStatus&, const ScenarioStatus&) = default;
};

using Payload = std::variant<Clock, WorldSnapshot, ObjectList, RangeScan, CollisionList,
                             DetectedObjects, ScenarioStatus>;

/// Stable kind tag used in recordings, e.g. "range_scan".
std::string payload_kind(const Payload& payload);

struct Message {
  double sim_time = 0.0;
  std::uint64_t seq = 0;
  std::string topic;
  Payload payload;

  friend bool operator==(const Message&, const Message&) = default;
};

}  // namespace simlane
