#include "simlane/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "simlane/bus.hpp"
#include "simlane/error.hpp"

namespace simlane {

using nlohmann::json;

bool operator==(const AllOfCondition& l, const AllOfCondition& r) {
  return l.conditions == r.conditions;
}
bool operator==(const AnyOfCondition& l, const AnyOfCondition& r) {
  return l.conditions == r.conditions;
}
bool operator==(const Condition& l, const Condition& r) { return l.node == r.node; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cursor over one JSON object that tracks its document path and which keys
/// were consumed, so leftovers can be rejected.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ValidationError(key.empty() ? path_ : at(key), what);
  }

  void require_object() const {
    if (!value_.is_object()) throw ValidationError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  const json& field(const std::string& key) {
    seen_.insert(key);
    if (!value_.contains(key)) fail(key, "missing required field");
    return value_.at(key);
  }

  double number(const std::string& key) {
    const json& v = field(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : (seen_.insert(key), fallback);
  }

  std::string string(const std::string& key) {
    const json& v = field(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::string identifier(const std::string& key) {
    std::string s = string(key);
    if (s.empty()) fail(key, "identifier must not be empty");
    return s;
  }

  const json& array(const std::string& key) {
    const json& v = field(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  const json& array_or_empty(const std::string& key) {
    static const json kEmpty = json::array();
    return has(key) ? array(key) : (seen_.insert(key), kEmpty);
  }

  Node child(const std::string& key) {
    Node n(field(key), at(key));
    n.require_object();
    return n;
  }

  Node element(const json& arr, const std::string& key, std::size_t i) const {
    Node n(arr.at(i), at(key) + "[" + std::to_string(i) + "]");
    n.require_object();
    return n;
  }

  void finish() const {
    for (const auto& [k, v] : value_.items()) {
      if (!seen_.contains(k)) fail(k, "unknown key");
    }
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, Node& n, const std::string& key, const std::string& what) {
  if (!ok) n.fail(key, what);
}

EntityDecl parse_entity(Node n) {
  EntityDecl e;
  e.id = n.identifier("id");
  e.path = n.identifier("path");
  e.station = n.number("station");
  e.speed = n.number("speed");
  e.target_speed = n.number("target_speed");
  e.max_accel = n.number_or("max_accel", 3.0);
  e.max_decel = n.number_or("max_decel", 6.0);
  e.length = n.number_or("length", 4.5);
  e.width = n.number_or("width", 2.0);
  require(e.station >= 0.0, n, "station", "must be >= 0");
  require(e.speed >= 0.0, n, "speed", "must be >= 0");
  require(e.target_speed >= 0.0, n, "target_speed", "must be >= 0");
  require(e.max_accel > 0.0, n, "max_accel", "must be > 0");
  require(e.max_decel > 0.0, n, "max_decel", "must be > 0");
  require(e.length > 0.0, n, "length", "must be > 0");
  require(e.width > 0.0, n, "width", "must be > 0");
  n.finish();
  return e;
}

Condition parse_condition(Node n) {
  const std::string type = n.string("type");
  Condition c;
  if (type == "sim_time") {
    c.node = SimTimeCondition{n.number("ge")};
  } else if (type == "reach_station") {
    c.node = ReachStationCondition{n.identifier("entity"), n.number("ge")};
  } else if (type == "relative_distance") {
    RelativeDistanceCondition r;
    r.a = n.identifier("a");
    r.b = n.identifier("b");
    r.le = n.number("le");
    c.node = r;
  } else if (type == "speed") {
    SpeedCondition s;
    s.entity = n.identifier("entity");
    const bool ge = n.has("ge");
    const bool le = n.has("le");
    if (ge == le) n.fail("", "speed condition needs exactly one of 'ge' or 'le'");
    s.op = ge ? CompareOp::ge : CompareOp::le;
    s.value = n.number(ge ? "ge" : "le");
    c.node = s;
  } else if (type == "all_of" || type == "any_of") {
    const json& arr = n.array("conditions");
    if (arr.empty()) n.fail("conditions", "composite condition must not be empty");
    std::vector<Condition> items;
    for (std::size_t i = 0; i < arr.size(); ++i) items.push_back(parse_condition(n.element(arr, "conditions", i)));
    if (type == "all_of") {
      c.node = AllOfCondition{std::move(items)};
    } else {
      c.node = AnyOfCondition{std::move(items)};
    }
  } else {
    n.fail("type", "unknown condition type '" + type + "'");
  }
  n.finish();
  return c;
}

Action parse_action(Node n) {
  const std::string type = n.string("type");
  Action a;
  if (type == "set_target_speed") {
    SetTargetSpeedAction s{n.identifier("entity"), n.number("value")};
    require(s.value >= 0.0, n, "value", "must be >= 0");
    a = s;
  } else if (type == "teleport") {
    TeleportAction t;
    t.entity = n.identifier("entity");
    t.path = n.identifier("path");
    t.station = n.number("station");
    require(t.station >= 0.0, n, "station", "must be >= 0");
    a = t;
  } else if (type == "spawn") {
    a = SpawnAction{parse_entity(n.child("entity"))};
  } else if (type == "despawn") {
    a = DespawnAction{n.identifier("entity")};
  } else {
    n.fail("type", "unknown action type '" + type + "'");
  }
  n.finish();
  return a;
}

ScenarioSensor parse_sensor(Node n) {
  ScenarioSensor s;
  SensorConfig& c = s.config;
  const std::string kind = n.string("kind");
  if (kind == "object_list") {
    c.kind = SensorKind::object_list;
  } else if (kind == "range_scan") {
    c.kind = SensorKind::range_scan;
  } else {
    n.fail("kind", "unknown sensor kind '" + kind + "'");
  }
  c.mount_entity = n.identifier("mount_entity");
  c.range = n.number("range");
  c.fov = n.number_or("fov", kTwoPi);
  require(c.range > 0.0, n, "range", "must be > 0");
  require(c.fov > 0.0 && c.fov <= kTwoPi, n, "fov", "must be in (0, 2*pi]");
  const std::string suffix = c.kind == SensorKind::range_scan ? "/scan" : "/objects";
  c.topic = n.has("topic") ? n.string("topic") : "/sensors/" + c.mount_entity + suffix;
  require(is_valid_topic(c.topic), n, "topic", "invalid topic '" + c.topic + "'");

  if (c.kind == SensorKind::range_scan) {
    const double beams = n.number("beam_count");
    require(beams >= 1.0 && beams == std::floor(beams) && beams <= 1e6, n, "beam_count",
            "must be an integer >= 1");
    c.beam_count = static_cast<int>(beams);
    c.noise_stddev = n.number_or("noise_stddev", 0.0);
    require(c.noise_stddev >= 0.0, n, "noise_stddev", "must be >= 0");
    if (n.has("detector")) {
      Node d = n.child("detector");
      DetectorConfig dc;
      dc.gap_threshold = d.number_or("gap_threshold", 1.0);
      const double min_size = d.number_or("min_cluster_size", 2.0);
      require(dc.gap_threshold > 0.0, d, "gap_threshold", "must be > 0");
      require(min_size >= 1.0 && min_size == std::floor(min_size) && min_size <= 1e6, d,
              "min_cluster_size", "must be an integer >= 1");
      dc.min_cluster_size = static_cast<int>(min_size);
      d.finish();
      s.detector = dc;
    }
  } else {
    for (const char* key : {"beam_count", "noise_stddev", "detector"}) {
      if (n.has(key)) n.fail(key, "only valid for range_scan sensors");
    }
    c.beam_count = 1;
    c.noise_stddev = 0.0;
  }
  n.finish();
  return s;
}

CriterionSpec parse_criterion(Node n) {
  CriterionSpec c;
  Node m = n.child("metric");
  const std::string name = m.string("name");
  try {
    c.metric.kind = metric_kind_from_string(name);
  } catch (const ValidationError&) {
    m.fail("name", "unknown metric '" + name + "'");
  }
  switch (c.metric.kind) {
    case MetricKind::collision_count:
      break;
    case MetricKind::min_center_distance:
    case MetricKind::min_ttc:
      c.metric.a = m.identifier("a");
      c.metric.b = m.identifier("b");
      break;
    case MetricKind::goal_reached:
      c.metric.entity = m.identifier("entity");
      c.metric.station = m.number("station");
      c.metric.by_time_s = m.number("by_time_s");
      break;
    case MetricKind::max_speed:
      c.metric.entity = m.identifier("entity");
      break;
    default:
      c.metric.entity = m.identifier("entity");
      c.metric.radius_m = m.number("radius_m");
      require(c.metric.radius_m > 0.0, m, "radius_m", "must be > 0");
      break;
  }
  m.finish();
  const std::string op = n.string("op");
  try {
    c.op = compare_op_from_string(op);
  } catch (const ValidationError&) {
    n.fail("op", "unknown comparison operator '" + op + "'");
  }
  c.value = n.number("value");
  n.finish();
  return c;
}

// Reference checks need the full entity universe (declared + spawned).
struct References {
  std::set<std::string> entities;
  std::map<std::string, double> paths;  // id -> length
};

void check_entity(const References& refs, const std::string& id, const std::string& path) {
  if (!refs.entities.contains(id)) throw ValidationError(path, "unknown entity '" + id + "'");
}

void check_condition(const References& refs, const Condition& c, const std::string& path) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ReachStationCondition> || std::is_same_v<T, SpeedCondition>) {
          check_entity(refs, node.entity, path + ".entity");
        } else if constexpr (std::is_same_v<T, RelativeDistanceCondition>) {
          check_entity(refs, node.a, path + ".a");
          check_entity(refs, node.b, path + ".b");
        } else if constexpr (std::is_same_v<T, AllOfCondition> || std::is_same_v<T, AnyOfCondition>) {
          for (std::size_t i = 0; i < node.conditions.size(); ++i) {
            check_condition(refs, node.conditions[i], path + ".conditions[" + std::to_string(i) + "]");
          }
        }
      },
      c.node);
}

void check_path_station(const References& refs, const std::string& path_id, double station,
                        const std::string& at) {
  auto it = refs.paths.find(path_id);
  if (it == refs.paths.end()) throw ValidationError(at + ".path", "unknown path '" + path_id + "'");
  if (station > it->second) {
    throw ValidationError(at + ".station", "station exceeds length of path '" + path_id + "'");
  }
}

std::string type_of(const Condition& c) {
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, SimTimeCondition>) return "sim_time";
        else if constexpr (std::is_same_v<T, ReachStationCondition>) return "reach_station";
        else if constexpr (std::is_same_v<T, RelativeDistanceCondition>) return "relative_distance";
        else if constexpr (std::is_same_v<T, SpeedCondition>) return "speed";
        else if constexpr (std::is_same_v<T, AllOfCondition>) return "all_of";
        else return "any_of";
      },
      c.node);
}

json entity_to_json(const EntityDecl& e) {
  return {{"id", e.id},
          {"path", e.path},
          {"station", e.station},
          {"speed", e.speed},
          {"target_speed", e.target_speed},
          {"max_accel", e.max_accel},
          {"max_decel", e.max_decel},
          {"length", e.length},
          {"width", e.width}};
}

json condition_to_json(const Condition& c) {
  json out = std::visit(
      [](const auto& node) -> json {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, SimTimeCondition>) {
          return {{"ge", node.ge}};
        } else if constexpr (std::is_same_v<T, ReachStationCondition>) {
          return {{"entity", node.entity}, {"ge", node.ge}};
        } else if constexpr (std::is_same_v<T, RelativeDistanceCondition>) {
          return {{"a", node.a}, {"b", node.b}, {"le", node.le}};
        } else if constexpr (std::is_same_v<T, SpeedCondition>) {
          return {{"entity", node.entity}, {node.op == CompareOp::ge ? "ge" : "le", node.value}};
        } else {
          json items = json::array();
          for (const auto& sub : node.conditions) items.push_back(condition_to_json(sub));
          return {{"conditions", items}};
        }
      },
      c.node);
  out["type"] = type_of(c);
  return out;
}

json action_to_json(const Action& a) {
  json out = std::visit(
      [](const auto& act) -> json {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, SetTargetSpeedAction>) {
          return {{"entity", act.entity}, {"value", act.value}};
        } else if constexpr (std::is_same_v<T, TeleportAction>) {
          return {{"entity", act.entity}, {"path", act.path}, {"station", act.station}};
        } else if constexpr (std::is_same_v<T, SpawnAction>) {
          return {{"entity", entity_to_json(act.entity)}};
        } else {
          return {{"entity", act.entity}};
        }
      },
      a);
  out["type"] = action_type(a);
  return out;
}

json metric_to_json(const MetricSpec& m) {
  json out{{"name", to_string(m.kind)}};
  switch (m.kind) {
    case MetricKind::collision_count:
      break;
    case MetricKind::min_center_distance:
    case MetricKind::min_ttc:
      out["a"] = m.a;
      out["b"] = m.b;
      break;
    case MetricKind::goal_reached:
      out["entity"] = m.entity;
      out["station"] = m.station;
      out["by_time_s"] = m.by_time_s;
      break;
    case MetricKind::max_speed:
      out["entity"] = m.entity;
      break;
    default:
      out["entity"] = m.entity;
      out["radius_m"] = m.radius_m;
      break;
  }
  return out;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::string action_type(const Action& action) {
  return std::visit(
      [](const auto& act) -> std::string {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, SetTargetSpeedAction>) return "set_target_speed";
        else if constexpr (std::is_same_v<T, TeleportAction>) return "teleport";
        else if constexpr (std::is_same_v<T, SpawnAction>) return "spawn";
        else return "despawn";
      },
      action);
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at ...: " prefix.
    if (auto pos = what.rfind(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ParseError(what, line, column);
  }
}

ScenarioSpec parse_scenario(const std::string& text) { return parse_scenario_json(parse_json_text(text)); }

ScenarioSpec parse_scenario_json(const json& doc) {
  Node root(doc, "");
  root.require_object();
  ScenarioSpec spec;
  spec.name = root.identifier("name");

  References refs;
  {
    Node map = root.child("map");
    const json& paths = map.array("paths");
    if (paths.empty()) map.fail("paths", "at least one path required");
    for (std::size_t i = 0; i < paths.size(); ++i) {
      Node p = map.element(paths, "paths", i);
      const std::string id = p.identifier("id");
      const json& pts = p.array("points");
      std::vector<Vec2> points;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const json& pt = pts[k];
        const std::string at = p.at("points") + "[" + std::to_string(k) + "]";
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          throw ValidationError(at, "expected a [x, y] pair");
        }
        points.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      try {
        spec.paths.emplace_back(id, std::move(points));
      } catch (const ValidationError& e) {
        throw ValidationError(p.at("points"), e.what());
      }
      if (!refs.paths.emplace(id, spec.paths.back().length()).second) {
        p.fail("id", "duplicate path id '" + id + "'");
      }
      p.finish();
    }
    map.finish();
  }

  const json& entities = root.array("entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    Node n = root.element(entities, "entities", i);
    EntityDecl e = parse_entity(n);
    if (!refs.entities.insert(e.id).second) {
      throw ValidationError(n.at("id"), "duplicate entity id '" + e.id + "'");
    }
    check_path_station(refs, e.path, e.station, n.path());
    spec.entities.push_back(std::move(e));
  }

  const json& sensors = root.array_or_empty("sensors");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    spec.sensors.push_back(parse_sensor(root.element(sensors, "sensors", i)));
  }

  const json& events = root.array_or_empty("events");
  std::set<std::string> event_names;
  for (std::size_t i = 0; i < events.size(); ++i) {
    Node n = root.element(events, "events", i);
    Event ev;
    ev.name = n.identifier("name");
    if (!event_names.insert(ev.name).second) n.fail("name", "duplicate event name '" + ev.name + "'");
    ev.trigger = parse_condition(n.child("trigger"));
    const json& actions = n.array("actions");
    for (std::size_t k = 0; k < actions.size(); ++k) {
      Action a = parse_action(n.element(actions, "actions", k));
      if (const auto* spawn = std::get_if<SpawnAction>(&a)) refs.entities.insert(spawn->entity.id);
      ev.actions.push_back(std::move(a));
    }
    n.finish();
    spec.events.push_back(std::move(ev));
  }

  {
    Node stop = root.child("stop");
    const json& any = stop.array_or_empty("any_of");
    for (std::size_t i = 0; i < any.size(); ++i) {
      spec.stop.any_of.push_back(parse_condition(stop.element(any, "any_of", i)));
    }
    spec.stop.timeout_s = stop.number("timeout_s");
    if (!(spec.stop.timeout_s > 0.0)) stop.fail("timeout_s", "must be > 0");
    stop.finish();
  }

  const json& criteria = root.array_or_empty("criteria");
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    spec.criteria.push_back(parse_criterion(root.element(criteria, "criteria", i)));
  }
  root.finish();

  // Cross references, now that spawned ids are known.
  for (std::size_t i = 0; i < spec.sensors.size(); ++i) {
    check_entity(refs, spec.sensors[i].config.mount_entity,
                 "sensors[" + std::to_string(i) + "].mount_entity");
  }
  for (std::size_t i = 0; i < spec.events.size(); ++i) {
    const std::string at = "events[" + std::to_string(i) + "]";
    check_condition(refs, spec.events[i].trigger, at + ".trigger");
    for (std::size_t k = 0; k < spec.events[i].actions.size(); ++k) {
      const std::string act_at = at + ".actions[" + std::to_string(k) + "]";
      std::visit(
          [&](const auto& act) {
            using T = std::decay_t<decltype(act)>;
            if constexpr (std::is_same_v<T, SpawnAction>) {
              check_path_station(refs, act.entity.path, act.entity.station, act_at + ".entity");
            } else if constexpr (std::is_same_v<T, TeleportAction>) {
              check_entity(refs, act.entity, act_at + ".entity");
              check_path_station(refs, act.path, act.station, act_at);
            } else {
              check_entity(refs, act.entity, act_at + ".entity");
            }
          },
          spec.events[i].actions[k]);
    }
  }
  for (std::size_t i = 0; i < spec.stop.any_of.size(); ++i) {
    check_condition(refs, spec.stop.any_of[i], "stop.any_of[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < spec.criteria.size(); ++i) {
    const auto& m = spec.criteria[i].metric;
    const std::string at = "criteria[" + std::to_string(i) + "].metric";
    switch (m.kind) {
      case MetricKind::collision_count:
        break;
      case MetricKind::min_center_distance:
      case MetricKind::min_ttc:
        check_entity(refs, m.a, at + ".a");
        check_entity(refs, m.b, at + ".b");
        break;
      case MetricKind::goal_reached:
      case MetricKind::max_speed:
        check_entity(refs, m.entity, at + ".entity");
        break;
      default: {
        check_entity(refs, m.entity, at + ".entity");
        const bool has_detector = std::any_of(spec.sensors.begin(), spec.sensors.end(), [&](const auto& s) {
          return s.config.kind == SensorKind::range_scan && s.config.mount_entity == m.entity &&
                 s.detector.has_value();
        });
        if (!has_detector) {
          throw ValidationError(at + ".entity",
                                "detection metric needs a range_scan sensor with a detector on '" +
                                    m.entity + "'");
        }
      }
    }
  }
  return spec;
}

json serialize_scenario(const ScenarioSpec& spec) {
  json paths = json::array();
  for (const auto& p : spec.paths) {
    json pts = json::array();
    for (const auto& v : p.points()) pts.push_back({v.x, v.y});
    paths.push_back({{"id", p.id()}, {"points", pts}});
  }
  json entities = json::array();
  for (const auto& e : spec.entities) entities.push_back(entity_to_json(e));

  json sensors = json::array();
  for (const auto& s : spec.sensors) {
    const auto& c = s.config;
    json j{{"kind", c.kind == SensorKind::range_scan ? "range_scan" : "object_list"},
           {"mount_entity", c.mount_entity},
           {"range", c.range},
           {"fov", c.fov},
           {"topic", c.topic}};
    if (c.kind == SensorKind::range_scan) {
      j["beam_count"] = c.beam_count;
      j["noise_stddev"] = c.noise_stddev;
      if (s.detector) {
        j["detector"] = {{"gap_threshold", s.detector->gap_threshold},
                         {"min_cluster_size", s.detector->min_cluster_size}};
      }
    }
    sensors.push_back(std::move(j));
  }

  json events = json::array();
  for (const auto& ev : spec.events) {
    json actions = json::array();
    for (const auto& a : ev.actions) actions.push_back(action_to_json(a));
    events.push_back({{"name", ev.name}, {"trigger", condition_to_json(ev.trigger)}, {"actions", actions}});
  }

  json any = json::array();
  for (const auto& c : spec.stop.any_of) any.push_back(condition_to_json(c));

  json criteria = json::array();
  for (const auto& c : spec.criteria) {
    criteria.push_back({{"metric", metric_to_json(c.metric)}, {"op", to_string(c.op)}, {"value", c.value}});
  }

  return {{"name", spec.name},
          {"map", {{"paths", paths}}},
          {"entities", entities},
          {"sensors", sensors},
          {"events", events},
          {"stop", {{"any_of", any}, {"timeout_s", spec.stop.timeout_s}}},
          {"criteria", criteria}};
}

WorldState init_world(const ScenarioSpec& spec, std::uint64_t seed) {
  return init_world(spec.paths, spec.entities, seed);
}

bool eval_condition(const Condition& cond, const WorldState& world) {
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, SimTimeCondition>) {
          return world.sim_time >= node.ge;
        } else if constexpr (std::is_same_v<T, ReachStationCondition>) {
          const auto* e = world.find_alive(node.entity);
          return e != nullptr && e->station >= node.ge;
        } else if constexpr (std::is_same_v<T, RelativeDistanceCondition>) {
          const auto* a = world.find_alive(node.a);
          const auto* b = world.find_alive(node.b);
          return a != nullptr && b != nullptr &&
                 distance(a->pose.position(), b->pose.position()) <= node.le;
        } else if constexpr (std::is_same_v<T, SpeedCondition>) {
          const auto* e = world.find_alive(node.entity);
          return e != nullptr && compare(e->speed, node.op, node.value);
        } else if constexpr (std::is_same_v<T, AllOfCondition>) {
          for (const auto& c : node.conditions) {
            if (!eval_condition(c, world)) return false;
          }
          return true;
        } else {
          for (const auto& c : node.conditions) {
            if (eval_condition(c, world)) return true;
          }
          return false;
        }
      },
      cond.node);
}

WorldState apply_action(const Action& action, const WorldState& world) {
  WorldState next = world;
  auto alive = [&](const std::string& id) -> EntityState& {
    auto it = next.entities.find(id);
    if (it == next.entities.end() || !it->second.alive) {
      throw ActionError(action_type(action) + ": no alive entity '" + id + "'");
    }
    return it->second;
  };
  auto path = [&](const std::string& id) -> const PathModel& {
    auto it = next.map.find(id);
    if (it == next.map.end()) throw ActionError(action_type(action) + ": unknown path '" + id + "'");
    return it->second;
  };
  auto check_station = [&](const PathModel& p, double station) {
    if (station < 0.0 || station > p.length()) {
      throw ActionError(action_type(action) + ": station outside path '" + p.id() + "'");
    }
  };

  std::visit(
      [&](const auto& act) {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, SetTargetSpeedAction>) {
          alive(act.entity).target_speed = act.value;
        } else if constexpr (std::is_same_v<T, TeleportAction>) {
          EntityState& e = alive(act.entity);
          const PathModel& p = path(act.path);
          check_station(p, act.station);
          e.path_id = act.path;
          e.station = act.station;
          e.pose = station_to_pose(p, act.station);
        } else if constexpr (std::is_same_v<T, SpawnAction>) {
          if (next.find_alive(act.entity.id) != nullptr) {
            throw ActionError("spawn: entity '" + act.entity.id + "' already exists");
          }
          const PathModel& p = path(act.entity.path);
          check_station(p, act.entity.station);
          next.entities[act.entity.id] = make_entity(act.entity, p);
        } else {
          alive(act.entity).alive = false;
        }
      },
      action);
  return next;
}

}  // namespace simlane
