#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "simlane/bus.hpp"
#include "simlane/messages.hpp"

namespace simlane {

struct DetectorConfig {
  double gap_threshold = 1.0;
  int min_cluster_size = 2;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

using BeamCluster = std::vector<std::size_t>;

/// Hit point of beam `i` in the global frame.
Vec2 beam_hit_point(const RangeScan& scan, std::size_t i);

/// Groups consecutive hit beams whose hit points lie within `gap_threshold`
/// of each other. No wrap-around across the fov boundary.
std::vector<BeamCluster> cluster_scan(const RangeScan& scan, double gap_threshold,
                                      int min_cluster_size);

DetectedObjects clusters_to_objects(const RangeScan& scan, const std::vector<BeamCluster>& clusters);

inline std::string detections_topic(const std::string& entity) {
  return "/perception/" + entity + "/detections";
}

/// Subscribes to `scan_topic` and republishes detections for `entity` on
/// `/perception/<entity>/detections`. Returns the subscription.
SubscriptionId attach_detector(Bus& bus, const std::string& scan_topic, const std::string& entity,
                               DetectorConfig cfg);

}  // namespace simlane
