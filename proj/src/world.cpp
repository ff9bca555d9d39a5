#include "simlane/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "simlane/error.hpp"

namespace simlane {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(b - a); }

double normalize_angle(double radians) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Pose2D make_pose(double x, double y, double heading) {
  return {x, y, normalize_angle(heading)};
}

PathModel::PathModel(std::string id, std::vector<Vec2> points)
    : id_(std::move(id)), points_(std::move(points)) {
  if (points_.size() < 2) {
    throw ValidationError("", "path '" + id_ + "' needs at least two points");
  }
  stations_.reserve(points_.size());
  stations_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = distance(points_[i - 1], points_[i]);
    if (!(seg > 0.0)) {
      throw ValidationError("", "path '" + id_ + "' has a zero-length segment at point " +
                                    std::to_string(i));
    }
    stations_.push_back(stations_.back() + seg);
  }
}

double path_length(const PathModel& path) { return path.length(); }

Pose2D station_to_pose(const PathModel& path, double station) {
  const auto& pts = path.points();
  const auto& cum = path.cumulative_station();
  if (!(station >= 0.0 && station <= path.length())) {
    std::ostringstream msg;
    msg << "station " << station << " outside [0, " << path.length() << "] on path '"
        << path.id() << "'";
    throw RangeError(msg.str());
  }
  // Segment i spans [cum[i], cum[i+1]); the final endpoint belongs to the last segment.
  auto it = std::upper_bound(cum.begin(), cum.end(), station);
  std::size_t seg = static_cast<std::size_t>(std::distance(cum.begin(), it));
  seg = std::clamp<std::size_t>(seg, 1, pts.size() - 1) - 1;

  const Vec2 a = pts[seg];
  const Vec2 b = pts[seg + 1];
  const double seg_len = cum[seg + 1] - cum[seg];
  const double frac = (station - cum[seg]) / seg_len;
  const Vec2 p = a + frac * (b - a);
  return make_pose(p.x, p.y, std::atan2(b.y - a.y, b.x - a.x));
}

std::array<Vec2, 4> footprint_corners(const Pose2D& pose, double length, double width) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  auto local = [&](double lx, double ly) -> Vec2 {
    return {pose.x + c * lx - s * ly, pose.y + s * lx + c * ly};
  };
  return {local(hl, hw), local(-hl, hw), local(-hl, -hw), local(hl, -hw)};
}

std::array<Vec2, 4> footprint_corners(const EntityState& state) {
  return footprint_corners(state.pose, state.length, state.width);
}

const PathModel& WorldState::path(const std::string& id) const {
  auto it = map.find(id);
  if (it == map.end()) throw RangeError("unknown path '" + id + "'");
  return it->second;
}

const EntityState* WorldState::find_alive(const std::string& id) const {
  auto it = entities.find(id);
  if (it == entities.end() || !it->second.alive) return nullptr;
  return &it->second;
}

}  // namespace simlane
