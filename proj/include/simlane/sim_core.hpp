#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "simlane/world.hpp"

namespace simlane {

/// Declared initial state of one entity.
struct EntityDecl {
  std::string id;
  std::string path;
  double station = 0.0;
  double speed = 0.0;
  double target_speed = 0.0;
  double max_accel = 3.0;
  double max_decel = 6.0;
  double length = 4.5;
  double width = 2.0;

  friend bool operator==(const EntityDecl&, const EntityDecl&) = default;
};

struct StepConfig {
  double dt = 0.05;
  bool collision_check = true;
};

enum class SensorKind { object_list, range_scan };

struct SensorConfig {
  SensorKind kind = SensorKind::object_list;
  std::string mount_entity;
  double range = 50.0;
  double fov = 2.0 * 3.14159265358979323846;
  int beam_count = 1;           // range_scan only
  double noise_stddev = 0.0;    // range_scan only
  std::string topic;

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

struct RangeScan {
  double sim_time = 0.0;
  Pose2D origin;
  std::vector<double> angles;  // sensor frame, ascending
  std::vector<double> ranges;  // max_range encodes "no return"
  double max_range = 0.0;

  friend bool operator==(const RangeScan&, const RangeScan&) = default;
};

struct ObjectInfo {
  std::string id;
  Pose2D pose;
  double speed = 0.0;
  double length = 0.0;
  double width = 0.0;

  friend bool operator==(const ObjectInfo&, const ObjectInfo&) = default;
};

struct ObjectList {
  double sim_time = 0.0;
  std::vector<ObjectInfo> objects;

  friend bool operator==(const ObjectList&, const ObjectList&) = default;
};

struct CollisionEvent {
  double sim_time = 0.0;
  std::string entity_a;  // entity_a < entity_b
  std::string entity_b;

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

/// Places every declared entity on its path. Throws ValidationError on an
/// unknown path or a station beyond the path end.
WorldState init_world(const std::vector<PathModel>& paths, const std::vector<EntityDecl>& entities,
                      std::uint64_t seed);

/// Builds the runtime state of a declared entity on `path`.
EntityState make_entity(const EntityDecl& decl, const PathModel& path);

/// Advances every alive entity by one fixed timestep (speed first, then
/// station). sim_time is recomputed as tick * dt.
std::pair<WorldState, std::vector<CollisionEvent>> step(const WorldState& world,
                                                        const StepConfig& cfg);

/// Separating-axis test; touching rectangles intersect.
bool rectangles_intersect(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b);

/// All intersecting alive pairs, sorted by (entity_a, entity_b).
std::vector<CollisionEvent> detect_collisions(const WorldState& world);

/// Ground-truth objects within range and fov of the mount; no occlusion.
ObjectList sample_object_sensor(const WorldState& world, const SensorConfig& cfg);

/// Ray-casts against the footprints of all other alive entities. Noise draws
/// consume `world.rng` in beam order, hit beams only.
RangeScan sample_range_scan(WorldState& world, const SensorConfig& cfg);

/// Beam angle in the sensor frame.
double beam_angle(const SensorConfig& cfg, int beam);

/// Distance along the ray to the nearest edge of the rectangle, if any.
std::optional<double> ray_rectangle_distance(Vec2 origin, Vec2 direction,
                                             const std::array<Vec2, 4>& corners);

/// Standard normal draw; Box-Muller over the 64-bit engine so the sequence
/// is identical on every standard library.
double standard_normal(std::mt19937_64& rng);

}  // namespace simlane
