#include "simlane/detector.hpp"

#include <algorithm>
#include <cmath>

namespace simlane {

Vec2 beam_hit_point(const RangeScan& scan, std::size_t i) {
  const double a = scan.origin.heading + scan.angles[i];
  return {scan.origin.x + scan.ranges[i] * std::cos(a), scan.origin.y + scan.ranges[i] * std::sin(a)};
}

std::vector<BeamCluster> cluster_scan(const RangeScan& scan, double gap_threshold,
                                      int min_cluster_size) {
  std::vector<BeamCluster> clusters;
  BeamCluster current;
  Vec2 prev{};
  auto flush = [&] {
    if (!current.empty() && static_cast<int>(current.size()) >= min_cluster_size) {
      clusters.push_back(current);
    }
    current.clear();
  };
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    if (!(scan.ranges[i] < scan.max_range)) {
      flush();
      continue;
    }
    const Vec2 p = beam_hit_point(scan, i);
    if (!current.empty() && distance(prev, p) > gap_threshold) flush();
    current.push_back(i);
    prev = p;
  }
  flush();
  return clusters;
}

DetectedObjects clusters_to_objects(const RangeScan& scan, const std::vector<BeamCluster>& clusters) {
  DetectedObjects out;
  out.sim_time = scan.sim_time;
  for (const auto& cluster : clusters) {
    std::vector<Vec2> pts;
    pts.reserve(cluster.size());
    for (std::size_t i : cluster) pts.push_back(beam_hit_point(scan, i));

    Vec2 sum{};
    for (const auto& p : pts) sum = sum + p;
    const double n = static_cast<double>(pts.size());

    double extent = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = a + 1; b < pts.size(); ++b) extent = std::max(extent, distance(pts[a], pts[b]));
    }
    out.objects.push_back({{sum.x / n, sum.y / n}, extent, static_cast<int>(cluster.size())});
  }
  return out;
}

SubscriptionId attach_detector(Bus& bus, const std::string& scan_topic, const std::string& entity,
                               DetectorConfig cfg) {
  const std::string out_topic = detections_topic(entity);
  return bus.subscribe(scan_topic, [&bus, out_topic, cfg](const Message& msg) {
    const auto* scan = std::get_if<RangeScan>(&msg.payload);
    if (scan == nullptr) return;
    const auto clusters = cluster_scan(*scan, cfg.gap_threshold, cfg.min_cluster_size);
    bus.publish(out_topic, msg.sim_time, clusters_to_objects(*scan, clusters));
  });
}

}  // namespace simlane
