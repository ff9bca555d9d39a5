#include "simlane/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "simlane/error.hpp"
#include "simlane/util.hpp"

namespace simlane {

namespace {

constexpr std::pair<MetricKind, const char*> kMetricNames[] = {
    {MetricKind::collision_count, "collision_count"},
    {MetricKind::min_center_distance, "min_center_distance"},
    {MetricKind::min_ttc, "min_ttc"},
    {MetricKind::goal_reached, "goal_reached"},
    {MetricKind::max_speed, "max_speed"},
    {MetricKind::detection_precision, "detection_precision"},
    {MetricKind::detection_recall, "detection_recall"},
    {MetricKind::detection_position_rmse, "detection_position_rmse"},
};

constexpr std::pair<CompareOp, const char*> kOpNames[] = {
    {CompareOp::eq, "=="}, {CompareOp::ne, "!="}, {CompareOp::lt, "<"},
    {CompareOp::le, "<="}, {CompareOp::gt, ">"},  {CompareOp::ge, ">="},
};

const EntityState* alive_in(const TraceTick& t, const std::string& id) {
  auto it = t.entities.find(id);
  return (it == t.entities.end() || !it->second.alive) ? nullptr : &it->second;
}

void require_present(const Trace& trace, const std::string& id, const MetricSpec& metric) {
  for (const auto& t : trace.ticks) {
    if (alive_in(t, id) != nullptr) return;
  }
  throw EvaluationError(metric_label(metric) + ": entity '" + id + "' absent from every tick");
}

double min_center_distance(const MetricSpec& m, const Trace& trace) {
  double best = kNoTtc;
  for (const auto& t : trace.ticks) {
    const auto* a = alive_in(t, m.a);
    const auto* b = alive_in(t, m.b);
    if (a == nullptr || b == nullptr) continue;
    best = std::min(best, distance(a->pose.position(), b->pose.position()));
  }
  return best;
}

double min_ttc(const MetricSpec& m, const Trace& trace) {
  double best = kNoTtc;
  for (const auto& t : trace.ticks) {
    const auto* a = alive_in(t, m.a);
    const auto* b = alive_in(t, m.b);
    if (a == nullptr || b == nullptr || a->path_id != b->path_id) continue;
    const auto* lead = a->station >= b->station ? a : b;
    const auto* follow = lead == a ? b : a;
    const double gap = (lead->station - follow->station) - 0.5 * (lead->length + follow->length);
    const double closing = follow->speed - lead->speed;
    if (closing <= 0.0) continue;
    best = std::min(best, std::max(gap, 0.0) / closing);
  }
  return best;
}

double goal_reached(const MetricSpec& m, const Trace& trace) {
  for (const auto& t : trace.ticks) {
    if (t.sim_time > m.by_time_s) break;
    const auto* e = alive_in(t, m.entity);
    if (e != nullptr && e->station >= m.station) return 1.0;
  }
  return 0.0;
}

double max_speed(const MetricSpec& m, const Trace& trace) {
  double best = 0.0;
  for (const auto& t : trace.ticks) {
    if (const auto* e = alive_in(t, m.entity)) best = std::max(best, e->speed);
  }
  return best;
}

double detection_metric(const MetricSpec& m, const Trace& trace) {
  auto sensor = std::find_if(trace.sensors.begin(), trace.sensors.end(), [&](const SensorConfig& s) {
    return s.kind == SensorKind::range_scan && s.mount_entity == m.entity;
  });
  if (sensor == trace.sensors.end()) {
    throw EvaluationError(metric_label(m) + ": no range_scan sensor mounted on '" + m.entity + "'");
  }
  SensorConfig truth_cfg = *sensor;
  truth_cfg.kind = SensorKind::object_list;

  MatchResult total;
  for (const auto& t : trace.ticks) {
    auto det = t.detections.find(m.entity);
    if (det == t.detections.end() || alive_in(t, m.entity) == nullptr) continue;
    WorldState view;
    view.tick = t.tick;
    view.sim_time = t.sim_time;
    view.entities = t.entities;
    const auto r = match_detections(det->second, sample_object_sensor(view, truth_cfg), m.radius_m);
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
    total.sum_sq_position_error += r.sum_sq_position_error;
  }
  switch (m.kind) {
    case MetricKind::detection_precision:
      return total.tp + total.fp == 0 ? 1.0 : double(total.tp) / (total.tp + total.fp);
    case MetricKind::detection_recall:
      return total.tp + total.fn == 0 ? 1.0 : double(total.tp) / (total.tp + total.fn);
    default:
      return total.tp == 0 ? 0.0 : std::sqrt(total.sum_sq_position_error / total.tp);
  }
}

}  // namespace

std::string to_string(MetricKind kind) {
  for (const auto& [k, name] : kMetricNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

MetricKind metric_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kMetricNames) {
    if (name == n) return k;
  }
  throw ValidationError("", "unknown metric '" + name + "'");
}

std::string metric_label(const MetricSpec& m) {
  const std::string name = to_string(m.kind);
  switch (m.kind) {
    case MetricKind::collision_count:
      return name;
    case MetricKind::min_center_distance:
    case MetricKind::min_ttc:
      return name + "{a=" + m.a + ",b=" + m.b + "}";
    case MetricKind::goal_reached:
      return name + "{entity=" + m.entity + ",station=" + format_number(m.station) +
             ",by_time_s=" + format_number(m.by_time_s) + "}";
    case MetricKind::max_speed:
      return name + "{entity=" + m.entity + "}";
    default:
      return name + "{entity=" + m.entity + ",radius_m=" + format_number(m.radius_m) + "}";
  }
}

std::string to_string(CompareOp op) {
  for (const auto& [o, name] : kOpNames) {
    if (o == op) return name;
  }
  return "?";
}

CompareOp compare_op_from_string(const std::string& op) {
  for (const auto& [o, name] : kOpNames) {
    if (op == name) return o;
  }
  throw ValidationError("", "unknown comparison operator '" + op + "'");
}

bool compare(double observed, CompareOp op, double value) {
  switch (op) {
    case CompareOp::eq: return observed == value;
    case CompareOp::ne: return observed != value;
    case CompareOp::lt: return observed < value;
    case CompareOp::le: return observed <= value;
    case CompareOp::gt: return observed > value;
    case CompareOp::ge: return observed >= value;
  }
  return false;
}

std::string criterion_label(const CriterionSpec& c) {
  return metric_label(c.metric) + " " + to_string(c.op) + " " + format_number(c.value);
}

MatchResult match_detections(const DetectedObjects& detections, const ObjectList& truth, double radius) {
  struct Candidate {
    double dist;
    std::size_t det;
    std::size_t obj;
  };
  std::vector<Candidate> pairs;
  for (std::size_t i = 0; i < detections.objects.size(); ++i) {
    for (std::size_t j = 0; j < truth.objects.size(); ++j) {
      const double d = distance(detections.objects[i].center, truth.objects[j].pose.position());
      if (d <= radius) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Candidate& l, const Candidate& r) {
    return std::tie(l.dist, l.det, l.obj) < std::tie(r.dist, r.det, r.obj);
  });

  std::vector<bool> det_used(detections.objects.size(), false);
  std::vector<bool> obj_used(truth.objects.size(), false);
  MatchResult out;
  for (const auto& c : pairs) {
    if (det_used[c.det] || obj_used[c.obj]) continue;
    det_used[c.det] = obj_used[c.obj] = true;
    ++out.tp;
    out.sum_sq_position_error += c.dist * c.dist;
  }
  out.fp = static_cast<int>(detections.objects.size()) - out.tp;
  out.fn = static_cast<int>(truth.objects.size()) - out.tp;
  return out;
}

double compute_metric(const MetricSpec& m, const Trace& trace) {
  switch (m.kind) {
    case MetricKind::collision_count: {
      double n = 0;
      for (const auto& t : trace.ticks) n += static_cast<double>(t.collisions.size());
      return n;
    }
    case MetricKind::min_center_distance:
      require_present(trace, m.a, m);
      require_present(trace, m.b, m);
      return min_center_distance(m, trace);
    case MetricKind::min_ttc:
      require_present(trace, m.a, m);
      require_present(trace, m.b, m);
      return min_ttc(m, trace);
    case MetricKind::goal_reached:
      require_present(trace, m.entity, m);
      return goal_reached(m, trace);
    case MetricKind::max_speed:
      require_present(trace, m.entity, m);
      return max_speed(m, trace);
    case MetricKind::detection_precision:
    case MetricKind::detection_recall:
    case MetricKind::detection_position_rmse:
      require_present(trace, m.entity, m);
      return detection_metric(m, trace);
  }
  throw EvaluationError("unsupported metric");
}

CriteriaOutcome evaluate_criteria(const std::vector<CriterionSpec>& criteria, const Trace& trace) {
  CriteriaOutcome out;
  for (const auto& c : criteria) {
    Verdict v;
    v.criterion = criterion_label(c);
    v.metric = metric_label(c.metric);
    v.op = c.op;
    v.value = c.value;
    try {
      v.observed = compute_metric(c.metric, trace);
      v.passed = compare(v.observed, c.op, c.value);
    } catch (const Error& e) {
      v.observed = std::numeric_limits<double>::quiet_NaN();
      v.passed = false;
      v.error = e.what();
    }
    out.passed = out.passed && v.passed;
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

}  // namespace simlane
