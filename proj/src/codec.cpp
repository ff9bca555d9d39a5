#include "simlane/codec.hpp"

#include "simlane/error.hpp"

namespace simlane {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string payload_kind(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const Clock&) { return std::string("clock"); },
                        [](const WorldSnapshot&) { return std::string("world_snapshot"); },
                        [](const ObjectList&) { return std::string("object_list"); },
                        [](const RangeScan&) { return std::string("range_scan"); },
                        [](const CollisionList&) { return std::string("collision_list"); },
                        [](const DetectedObjects&) { return std::string("detected_objects"); },
                        [](const ScenarioStatus&) { return std::string("scenario_status"); },
                    },
                    payload);
}

void to_json(Json& j, const Vec2& v) { j = Json::array({v.x, v.y}); }
void from_json(const Json& j, Vec2& v) {
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
}

void to_json(Json& j, const Pose2D& p) { j = {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }
void from_json(const Json& j, Pose2D& p) {
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.heading = j.at("heading").get<double>();
}

void to_json(Json& j, const EntityState& e) {
  j = {{"id", e.id},
       {"path", e.path_id},
       {"station", e.station},
       {"speed", e.speed},
       {"target_speed", e.target_speed},
       {"max_accel", e.max_accel},
       {"max_decel", e.max_decel},
       {"length", e.length},
       {"width", e.width},
       {"pose", e.pose},
       {"alive", e.alive}};
}
void from_json(const Json& j, EntityState& e) {
  e.id = j.at("id").get<std::string>();
  e.path_id = j.at("path").get<std::string>();
  e.station = j.at("station").get<double>();
  e.speed = j.at("speed").get<double>();
  e.target_speed = j.at("target_speed").get<double>();
  e.max_accel = j.at("max_accel").get<double>();
  e.max_decel = j.at("max_decel").get<double>();
  e.length = j.at("length").get<double>();
  e.width = j.at("width").get<double>();
  e.pose = j.at("pose").get<Pose2D>();
  e.alive = j.at("alive").get<bool>();
}

void to_json(Json& j, const ObjectInfo& o) {
  j = {{"id", o.id}, {"pose", o.pose}, {"speed", o.speed}, {"length", o.length}, {"width", o.width}};
}
void from_json(const Json& j, ObjectInfo& o) {
  o.id = j.at("id").get<std::string>();
  o.pose = j.at("pose").get<Pose2D>();
  o.speed = j.at("speed").get<double>();
  o.length = j.at("length").get<double>();
  o.width = j.at("width").get<double>();
}

void to_json(Json& j, const CollisionEvent& c) {
  j = {{"sim_time", c.sim_time}, {"entity_a", c.entity_a}, {"entity_b", c.entity_b}};
}
void from_json(const Json& j, CollisionEvent& c) {
  c.sim_time = j.at("sim_time").get<double>();
  c.entity_a = j.at("entity_a").get<std::string>();
  c.entity_b = j.at("entity_b").get<std::string>();
}

void to_json(Json& j, const DetectedObject& d) {
  j = {{"center", d.center}, {"extent", d.extent}, {"support", d.support}};
}
void from_json(const Json& j, DetectedObject& d) {
  d.center = j.at("center").get<Vec2>();
  d.extent = j.at("extent").get<double>();
  d.support = j.at("support").get<int>();
}

Json encode_payload(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const Clock& c) -> Json { return {{"tick", c.tick}, {"sim_time", c.sim_time}}; },
          [](const WorldSnapshot& s) -> Json {
            return {{"tick", s.tick}, {"sim_time", s.sim_time}, {"entities", s.entities}};
          },
          [](const ObjectList& o) -> Json {
            return {{"sim_time", o.sim_time}, {"objects", o.objects}};
          },
          [](const RangeScan& s) -> Json {
            return {{"sim_time", s.sim_time},
                    {"origin", s.origin},
                    {"angles", s.angles},
                    {"ranges", s.ranges},
                    {"max_range", s.max_range}};
          },
          [](const CollisionList& c) -> Json {
            return {{"sim_time", c.sim_time}, {"events", c.events}};
          },
          [](const DetectedObjects& d) -> Json {
            return {{"sim_time", d.sim_time}, {"objects", d.objects}};
          },
          [](const ScenarioStatus& s) -> Json {
            return {{"tick", s.tick}, {"sim_time", s.sim_time}, {"kind", s.kind}, {"detail", s.detail}};
          },
      },
      payload);
}

Payload decode_payload(const std::string& kind, const Json& j) {
  if (kind == "clock") {
    return Clock{j.at("tick").get<std::int64_t>(), j.at("sim_time").get<double>()};
  }
  if (kind == "world_snapshot") {
    return WorldSnapshot{j.at("tick").get<std::int64_t>(), j.at("sim_time").get<double>(),
                         j.at("entities").get<std::vector<EntityState>>()};
  }
  if (kind == "object_list") {
    return ObjectList{j.at("sim_time").get<double>(), j.at("objects").get<std::vector<ObjectInfo>>()};
  }
  if (kind == "range_scan") {
    return RangeScan{j.at("sim_time").get<double>(), j.at("origin").get<Pose2D>(),
                     j.at("angles").get<std::vector<double>>(),
                     j.at("ranges").get<std::vector<double>>(), j.at("max_range").get<double>()};
  }
  if (kind == "collision_list") {
    return CollisionList{j.at("sim_time").get<double>(),
                         j.at("events").get<std::vector<CollisionEvent>>()};
  }
  if (kind == "detected_objects") {
    return DetectedObjects{j.at("sim_time").get<double>(),
                           j.at("objects").get<std::vector<DetectedObject>>()};
  }
  if (kind == "scenario_status") {
    return ScenarioStatus{j.at("tick").get<std::int64_t>(), j.at("sim_time").get<double>(),
                          j.at("kind").get<std::string>(), j.at("detail").get<std::string>()};
  }
  throw LoadError("unknown payload kind '" + kind + "'");
}

}  // namespace simlane
