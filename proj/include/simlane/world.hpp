#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace simlane {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

Pose2D make_pose(double x, double y, double heading);

/// Polyline centerline addressed by arc length ("station").
class PathModel {
 public:
  PathModel() = default;

  /// Throws ValidationError if fewer than two points or a zero-length segment.
  PathModel(std::string id, std::vector<Vec2> points);

  const std::string& id() const { return id_; }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& cumulative_station() const { return stations_; }
  double length() const { return stations_.empty() ? 0.0 : stations_.back(); }

  friend bool operator==(const PathModel&, const PathModel&) = default;

 private:
  std::string id_;
  std::vector<Vec2> points_;
  std::vector<double> stations_;
};

double path_length(const PathModel& path);

/// Point at arc length `station` with the heading of the containing segment.
/// Interior vertices take the outgoing segment's heading. No clamping:
/// throws RangeError outside [0, length].
Pose2D station_to_pose(const PathModel& path, double station);

struct EntityState {
  std::string id;
  std::string path_id;
  double station = 0.0;
  double speed = 0.0;
  double target_speed = 0.0;
  double max_accel = 3.0;
  double max_decel = 6.0;
  double length = 4.5;
  double width = 2.0;
  Pose2D pose;
  bool alive = true;

  friend bool operator==(const EntityState&, const EntityState&) = default;
};

/// Rectangle corners counter-clockwise starting front-left.
std::array<Vec2, 4> footprint_corners(const Pose2D& pose, double length, double width);
std::array<Vec2, 4> footprint_corners(const EntityState& state);

struct WorldState {
  double sim_time = 0.0;
  std::int64_t tick = 0;
  std::map<std::string, EntityState> entities;
  std::map<std::string, PathModel> map;
  std::mt19937_64 rng;

  const PathModel& path(const std::string& id) const;
  /// Alive entity or nullptr.
  const EntityState* find_alive(const std::string& id) const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

}  // namespace simlane
