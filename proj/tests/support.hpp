#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.
// The oracles do not call the library's geometry helpers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace testsupport {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr double kPi = 3.14159265358979323846;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("simlane_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::size_t count_lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Relative path -> bytes for every regular file under `root`, optionally
/// skipping files by name.
inline std::map<std::string, std::string> tree_bytes(const fs::path& root,
                                                     const std::vector<std::string>& skip_names = {}) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (std::find(skip_names.begin(), skip_names.end(), name) != skip_names.end()) continue;
    out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

/// Manifest JSON with wall-clock and run-identity fields removed.
inline json manifest_without_volatile(const fs::path& manifest) {
  json j = json::parse(slurp(manifest));
  j.erase("created");
  j.erase("run_id");
  return j;
}

// ---------------------------------------------------------------- scenarios

inline json straight_path(const std::string& id, double length) {
  return {{"id", id}, {"points", json::array({json::array({0.0, 0.0}), json::array({length, 0.0})})}};
}

inline json entity(const std::string& id, const std::string& path, double station, double speed,
                   double target_speed) {
  return {{"id", id}, {"path", path}, {"station", station}, {"speed", speed}, {"target_speed", target_speed}};
}

/// One straight 200 m lane, one ego, 10 s timeout.
inline json minimal_scenario(const std::string& name = "minimal") {
  return {{"name", name},
          {"map", {{"paths", json::array({straight_path("lane", 200.0)})}}},
          {"entities", json::array({entity("ego", "lane", 0.0, 8.0, 8.0)})},
          {"stop", {{"timeout_s", 10.0}}}};
}

/// Ego follows a slower lead on one lane with a noisy scanner and an
/// object sensor; ends on timeout.
inline json busy_scenario(double timeout_s = 30.0, double noise = 0.05) {
  json doc = minimal_scenario("busy");
  doc["map"]["paths"] = json::array({straight_path("lane", 1000.0)});
  doc["entities"] = json::array({entity("ego", "lane", 0.0, 8.0, 12.0), entity("lead", "lane", 40.0, 9.0, 9.0)});
  doc["sensors"] = json::array(
      {{{"kind", "range_scan"}, {"mount_entity", "ego"}, {"range", 60.0}, {"fov", kPi / 2}, {"beam_count", 61},
        {"noise_stddev", noise}, {"detector", {{"gap_threshold", 1.0}, {"min_cluster_size", 2}}}},
       {{"kind", "object_list"}, {"mount_entity", "ego"}, {"range", 60.0}, {"fov", kPi / 2}}});
  doc["stop"] = {{"timeout_s", timeout_s}};
  return doc;
}

// ------------------------------------------------------------------ oracles

struct P {
  double x = 0.0;
  double y = 0.0;
};

/// Walks the polyline segment by segment, consuming `s` as it goes.
inline std::array<double, 3> arc_length_walker(const std::vector<P>& pts, double s) {
  double remaining = s;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dx = pts[i + 1].x - pts[i].x;
    const double dy = pts[i + 1].y - pts[i].y;
    const double len = std::hypot(dx, dy);
    const bool last = i + 2 == pts.size();
    if (remaining < len || last) {
      const double f = remaining / len;
      return {pts[i].x + f * dx, pts[i].y + f * dy, std::atan2(dy, dx)};
    }
    remaining -= len;
  }
  return {pts.back().x, pts.back().y, 0.0};
}

inline double point_segment_distance(P p, P a, P b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline double distance_to_polyline(const std::vector<P>& pts, P p) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
  return best;
}

/// Arc length along the polyline of the projection of a point known to lie on it.
inline double arc_length_of_point(const std::vector<P>& pts, P p, double tol = 1e-9) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = std::hypot(pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y);
    if (point_segment_distance(p, pts[i], pts[i + 1]) <= tol) {
      return acc + std::hypot(p.x - pts[i].x, p.y - pts[i].y);
    }
    acc += len;
  }
  return NAN;
}

/// R(theta) * v
inline P rotate(P v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Corners via the rotation matrix applied to the canonical rectangle.
inline std::array<P, 4> rect_oracle(double cx, double cy, double heading, double length, double width) {
  const std::array<P, 4> local = {P{length / 2, width / 2}, P{-length / 2, width / 2}, P{-length / 2, -width / 2},
                                  P{length / 2, -width / 2}};
  std::array<P, 4> out;
  for (int i = 0; i < 4; ++i) {
    const P r = rotate(local[i], heading);
    out[i] = {cx + r.x, cy + r.y};
  }
  return out;
}

inline double shoelace(const std::array<P, 4>& c) {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) a += c[i].x * c[(i + 1) % 4].y - c[(i + 1) % 4].x * c[i].y;
  return a / 2.0;
}

/// Closed containment in a CCW convex quad.
inline bool contains(const std::array<P, 4>& q, P p) {
  for (int i = 0; i < 4; ++i) {
    const P a = q[i];
    const P b = q[(i + 1) % 4];
    if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0.0) return false;
  }
  return true;
}

/// Samples a 100 x 100 grid (boundary included) over each rectangle and
/// reports whether any sample lies in the other one.
inline bool sampled_overlap(const std::array<P, 4>& a, const std::array<P, 4>& b, int n = 100) {
  auto probe = [n](const std::array<P, 4>& src, const std::array<P, 4>& dst) {
    // src corners: 0 front-left, 1 rear-left, 2 rear-right, 3 front-right
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double v = static_cast<double>(j) / (n - 1);
        const P p{src[2].x + u * (src[3].x - src[2].x) + v * (src[1].x - src[2].x),
                  src[2].y + u * (src[3].y - src[2].y) + v * (src[1].y - src[2].y)};
        if (contains(dst, p)) return true;
      }
    }
    return false;
  };
  return probe(a, b) || probe(b, a);
}

inline double segment_segment_distance(P a0, P a1, P b0, P b1) {
  auto orient = [](P p, P q, P r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
  const double d1 = orient(a0, a1, b0);
  const double d2 = orient(a0, a1, b1);
  const double d3 = orient(b0, b1, a0);
  const double d4 = orient(b0, b1, a1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

/// Magnitude of the gap (separated) or penetration depth (overlapping)
/// between two rectangles; used to exclude the sampling resolution band.
inline double contact_margin(const std::array<P, 4>& a, const std::array<P, 4>& b) {
  double penetration = INFINITY;
  bool separated = false;
  for (const auto* poly : {&a, &b}) {
    for (int i = 0; i < 2; ++i) {
      const P e{(*poly)[i + 1].x - (*poly)[i].x, (*poly)[i + 1].y - (*poly)[i].y};
      const double len = std::hypot(e.x, e.y);
      const P axis{-e.y / len, e.x / len};
      double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
      for (int k = 0; k < 4; ++k) {
        const double pa = a[k].x * axis.x + a[k].y * axis.y;
        const double pb = b[k].x * axis.x + b[k].y * axis.y;
        amin = std::min(amin, pa);
        amax = std::max(amax, pa);
        bmin = std::min(bmin, pb);
        bmax = std::max(bmax, pb);
      }
      const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
      if (overlap < 0) separated = true;
      penetration = std::min(penetration, overlap);
    }
  }
  if (!separated) return penetration;
  double gap = INFINITY;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      gap = std::min(gap, segment_segment_distance(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4]));
    }
  }
  return gap;
}

/// Nearest hit of a ray against the four edges, by solving
/// origin + t*dir = a + u*(b - a) per edge.
inline double ray_edges_oracle(P origin, double angle, const std::array<P, 4>& rect, double max_range) {
  const P d{std::cos(angle), std::sin(angle)};
  double best = max_range;
  for (int i = 0; i < 4; ++i) {
    const P a = rect[i];
    const P b = rect[(i + 1) % 4];
    const P e{b.x - a.x, b.y - a.y};
    const double den = d.x * (-e.y) - d.y * (-e.x);
    if (std::abs(den) < 1e-15) continue;
    const P w{a.x - origin.x, a.y - origin.y};
    const double t = (w.x * (-e.y) - w.y * (-e.x)) / den;
    const double u = (d.x * w.y - d.y * w.x) / den;
    if (t > 0 && u >= 0 && u <= 1) best = std::min(best, t);
  }
  return best;
}

/// Bearing of `target` seen from a pose, wrapped into [-pi, pi).
inline double bearing_oracle(double mx, double my, double mheading, double tx, double ty) {
  double b = std::atan2(ty - my, tx - mx) - mheading;
  while (b >= kPi) b -= 2 * kPi;
  while (b < -kPi) b += 2 * kPi;
  return b;
}

/// Hand-unrolled semi-implicit recurrence: v0 0, a_max 2, dt 0.1, target 10,
/// ten steps; returns {speed, station}.
inline std::pair<double, double> unrolled_acceleration() {
  double v = 0.0;
  double s = 0.0;
  v = v + 0.2; s = s + v * 0.1;  // 1
  v = v + 0.2; s = s + v * 0.1;  // 2
  v = v + 0.2; s = s + v * 0.1;  // 3
  v = v + 0.2; s = s + v * 0.1;  // 4
  v = v + 0.2; s = s + v * 0.1;  // 5
  v = v + 0.2; s = s + v * 0.1;  // 6
  v = v + 0.2; s = s + v * 0.1;  // 7
  v = v + 0.2; s = s + v * 0.1;  // 8
  v = v + 0.2; s = s + v * 0.1;  // 9
  v = v + 0.2; s = s + v * 0.1;  // 10
  return {v, s};
}

/// Number of overrides a space expands to, counted by brute iteration of
/// a mixed-radix odometer rather than by multiplying sizes.
inline std::size_t counting_oracle(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) return 1;
  std::vector<std::size_t> digit(sizes.size(), 0);
  std::size_t n = 0;
  while (true) {
    ++n;
    std::size_t k = sizes.size();
    while (k > 0) {
      --k;
      if (++digit[k] < sizes[k]) break;
      digit[k] = 0;
      if (k == 0) return n;
    }
  }
}

/// Index -> per-dimension digit, rightmost fastest.
inline std::vector<std::size_t> mixed_radix(std::size_t index, const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> out(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    out[k] = index % sizes[k];
    index /= sizes[k];
  }
  return out;
}

/// Best assignment by exhaustive search: most pairs within radius, ties by
/// smaller summed squared distance. Returns {pairs, sum_sq}.
inline std::pair<int, double> exhaustive_assignment(const std::vector<P>& dets, const std::vector<P>& truths,
                                                    double radius) {
  std::pair<int, double> best{0, 0.0};
  std::vector<int> used(truths.size(), 0);
  std::function<void(std::size_t, int, double)> rec = [&](std::size_t i, int pairs, double sq) {
    if (i == dets.size()) {
      if (pairs > best.first || (pairs == best.first && sq < best.second)) best = {pairs, sq};
      return;
    }
    rec(i + 1, pairs, sq);  // leave detection i unmatched
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (used[t]) continue;
      const double d = std::hypot(dets[i].x - truths[t].x, dets[i].y - truths[t].y);
      if (d > radius) continue;
      used[t] = 1;
      rec(i + 1, pairs + 1, sq + d * d);
      used[t] = 0;
    }
  };
  rec(0, 0, 0.0);
  return best;
}

}  // namespace testsupport
