#include "simlane/sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "simlane/error.hpp"

namespace simlane {

EntityState make_entity(const EntityDecl& decl, const PathModel& path) {
  EntityState e;
  e.id = decl.id;
  e.path_id = decl.path;
  e.station = decl.station;
  e.speed = decl.speed;
  e.target_speed = decl.target_speed;
  e.max_accel = decl.max_accel;
  e.max_decel = decl.max_decel;
  e.length = decl.length;
  e.width = decl.width;
  e.pose = station_to_pose(path, decl.station);
  e.alive = true;
  return e;
}

WorldState init_world(const std::vector<PathModel>& paths, const std::vector<EntityDecl>& entities,
                      std::uint64_t seed) {
  WorldState world;
  world.rng.seed(seed);
  for (const auto& p : paths) world.map.emplace(p.id(), p);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& decl = entities[i];
    const std::string at = "entities[" + std::to_string(i) + "]";
    auto path = world.map.find(decl.path);
    if (path == world.map.end()) {
      throw ValidationError(at + ".path", "unknown path '" + decl.path + "'");
    }
    if (decl.station < 0.0 || decl.station > path->second.length()) {
      throw ValidationError(at + ".station", "station outside path '" + decl.path + "'");
    }
    if (!world.entities.emplace(decl.id, make_entity(decl, path->second)).second) {
      throw ValidationError(at + ".id", "duplicate entity id '" + decl.id + "'");
    }
  }
  return world;
}

std::pair<WorldState, std::vector<CollisionEvent>> step(const WorldState& world,
                                                        const StepConfig& cfg) {
  WorldState next = world;
  const double dt = cfg.dt;
  for (auto& [id, e] : next.entities) {
    if (!e.alive) continue;
    const PathModel& path = next.path(e.path_id);
    const double dv = std::clamp(e.target_speed - e.speed, -e.max_decel * dt, e.max_accel * dt);
    e.speed = e.speed + dv;
    e.station = std::min(e.station + e.speed * dt, path.length());
    if (e.station >= path.length()) {
      e.station = path.length();
      e.speed = 0.0;
    }
    e.pose = station_to_pose(path, e.station);
  }
  next.tick = world.tick + 1;
  next.sim_time = static_cast<double>(next.tick) * dt;

  std::vector<CollisionEvent> collisions;
  if (cfg.collision_check) collisions = detect_collisions(next);
  return {std::move(next), std::move(collisions)};
}

namespace {

// Projection interval of a rectangle onto an axis.
std::pair<double, double> project(const std::array<Vec2, 4>& r, Vec2 axis) {
  double lo = dot(r[0], axis);
  double hi = lo;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double p = dot(r[i], axis);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return {lo, hi};
}

}  // namespace

bool rectangles_intersect(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  for (const auto* rect : {&a, &b}) {
    for (std::size_t i = 0; i < 2; ++i) {
      const Vec2 edge = (*rect)[i + 1] - (*rect)[i];
      const Vec2 axis{-edge.y, edge.x};
      const auto [alo, ahi] = project(a, axis);
      const auto [blo, bhi] = project(b, axis);
      if (ahi < blo || bhi < alo) return false;
    }
  }
  return true;
}

std::vector<CollisionEvent> detect_collisions(const WorldState& world) {
  std::vector<const EntityState*> alive;
  for (const auto& [id, e] : world.entities) {
    if (e.alive) alive.push_back(&e);
  }
  std::vector<CollisionEvent> events;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    const auto ca = footprint_corners(*alive[i]);
    for (std::size_t j = i + 1; j < alive.size(); ++j) {
      if (rectangles_intersect(ca, footprint_corners(*alive[j]))) {
        events.push_back({world.sim_time, alive[i]->id, alive[j]->id});
      }
    }
  }
  return events;
}

namespace {

const EntityState& require_mount(const WorldState& world, const SensorConfig& cfg) {
  const EntityState* mount = world.find_alive(cfg.mount_entity);
  if (mount == nullptr) {
    throw SensorError("sensor mount entity '" + cfg.mount_entity + "' is missing or despawned");
  }
  return *mount;
}

}  // namespace

ObjectList sample_object_sensor(const WorldState& world, const SensorConfig& cfg) {
  const EntityState& mount = require_mount(world, cfg);
  ObjectList out;
  out.sim_time = world.sim_time;
  const Vec2 origin = mount.pose.position();
  for (const auto& [id, e] : world.entities) {
    if (!e.alive || id == mount.id) continue;
    const Vec2 rel = e.pose.position() - origin;
    if (norm(rel) > cfg.range) continue;
    const double bearing = normalize_angle(std::atan2(rel.y, rel.x) - mount.pose.heading);
    if (std::abs(bearing) > 0.5 * cfg.fov) continue;
    out.objects.push_back({e.id, e.pose, e.speed, e.length, e.width});
  }
  return out;
}

double beam_angle(const SensorConfig& cfg, int beam) {
  if (cfg.beam_count <= 1) return 0.0;
  return -0.5 * cfg.fov + beam * (cfg.fov / (cfg.beam_count - 1));
}

std::optional<double> ray_rectangle_distance(Vec2 origin, Vec2 direction,
                                             const std::array<Vec2, 4>& corners) {
  std::optional<double> best;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec2 p = corners[i];
    const Vec2 edge = corners[(i + 1) % corners.size()] - p;
    const double denom = cross(direction, edge);
    if (denom == 0.0) continue;  // parallel
    const Vec2 op = p - origin;
    const double t = cross(op, edge) / denom;
    const double u = cross(op, direction) / denom;
    if (t > 0.0 && u >= 0.0 && u <= 1.0 && (!best || t < *best)) best = t;
  }
  return best;
}

double standard_normal(std::mt19937_64& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = 1.0 - static_cast<double>(rng() >> 11) * kScale;
  const double u2 = static_cast<double>(rng() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RangeScan sample_range_scan(WorldState& world, const SensorConfig& cfg) {
  const EntityState& mount = require_mount(world, cfg);
  RangeScan scan;
  scan.sim_time = world.sim_time;
  scan.origin = mount.pose;
  scan.max_range = cfg.range;
  const int beams = std::max(cfg.beam_count, 1);
  scan.angles.reserve(beams);
  scan.ranges.reserve(beams);

  std::vector<std::array<Vec2, 4>> targets;
  for (const auto& [id, e] : world.entities) {
    if (e.alive && id != mount.id) targets.push_back(footprint_corners(e));
  }

  const Vec2 origin = mount.pose.position();
  for (int i = 0; i < beams; ++i) {
    const double angle = beam_angle(cfg, i);
    const double global = mount.pose.heading + angle;
    const Vec2 dir{std::cos(global), std::sin(global)};
    double range = cfg.range;
    bool hit = false;
    for (const auto& rect : targets) {
      if (auto t = ray_rectangle_distance(origin, dir, rect); t && *t <= range) {
        range = *t;
        hit = true;
      }
    }
    if (hit && cfg.noise_stddev > 0.0) {
      range += cfg.noise_stddev * standard_normal(world.rng);
      range = std::clamp(range, std::numeric_limits<double>::min(), cfg.range);
    }
    scan.angles.push_back(angle);
    scan.ranges.push_back(range);
  }
  return scan;
}

}  // namespace simlane
