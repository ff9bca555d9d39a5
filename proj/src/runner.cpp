#include "simlane/runner.hpp"

#include <cmath>

#include "simlane/detector.hpp"
#include "simlane/error.hpp"
#include "simlane/util.hpp"

namespace simlane {

std::string to_string(EndReason reason) {
  switch (reason) {
    case EndReason::stop_condition: return "stop_condition";
    case EndReason::timeout: return "timeout";
    case EndReason::error: return "error";
  }
  return "error";
}

std::int64_t timeout_ticks(double timeout_s, double dt) {
  // 10 s at dt 0.1 is 100 ticks, not 101.
  const double n = std::ceil(timeout_s / dt - 1e-9);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = value;
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::ordered_json j{{"criterion", v.criterion},
                             {"metric", v.metric},
                             {"op", to_string(v.op)},
                             {"value", v.value},
                             {"observed", v.observed},
                             {"passed", v.passed}};
    if (!v.error.empty()) j["error"] = v.error;
    verdicts.push_back(std::move(j));
  }
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& a : r.action_log) {
    nlohmann::ordered_json j{{"tick", a.tick}, {"event", a.event}, {"action", a.action}};
    if (!a.error.empty()) j["error"] = a.error;
    log.push_back(std::move(j));
  }
  nlohmann::ordered_json out{{"scenario_name", r.scenario_name},
                             {"end_reason", to_string(r.end_reason)},
                             {"ticks", r.ticks},
                             {"end_time", r.end_time},
                             {"metrics", metrics},
                             {"verdicts", verdicts}};
  out["overall"] = r.has_criteria ? (r.passed ? "pass" : "fail") : "none";
  out["artifact_dir"] = r.artifact_dir;
  out["diagnostic"] = r.diagnostic;
  out["action_log"] = log;
  out["delivery_failures"] = r.delivery_failures;
  return out;
}

namespace {

TraceTick snapshot(const WorldState& world) {
  TraceTick t;
  t.tick = world.tick;
  t.sim_time = world.sim_time;
  t.entities = world.entities;
  return t;
}

WorldSnapshot alive_snapshot(const WorldState& world) {
  WorldSnapshot s{world.tick, world.sim_time, {}};
  for (const auto& [id, e] : world.entities) {
    if (e.alive) s.entities.push_back(e);
  }
  return s;
}

// "/perception/<entity>/detections" -> "<entity>"
std::string detection_entity(const std::string& topic) {
  const auto a = topic.find('/', 1);
  const auto b = topic.find('/', a + 1);
  return topic.substr(a + 1, b - a - 1);
}

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& options, Bus& bus, Trace* trace_out) {
  RunResult result;
  result.scenario_name = spec.name;
  result.has_criteria = !spec.criteria.empty();

  Trace trace;
  trace.scenario = spec.name;
  trace.dt = options.dt;
  for (const auto& s : spec.sensors) trace.sensors.push_back(s.config);

  std::vector<SubscriptionId> subscriptions;
  TraceTick* current = nullptr;
  WorldState world;

  try {
    if (!(options.dt > 0.0)) throw ValidationError("dt", "must be > 0");
    const StepConfig step_cfg{options.dt, options.collision_check};
    const double timeout = options.duration_s.value_or(spec.stop.timeout_s);
    if (!(timeout > 0.0)) throw ValidationError("duration", "must be > 0");
    const std::int64_t max_ticks = timeout_ticks(timeout, options.dt);

    world = init_world(spec, options.seed);
    trace.ticks.push_back(snapshot(world));

    for (const auto& s : spec.sensors) {
      if (s.detector) {
        subscriptions.push_back(attach_detector(bus, s.config.topic, s.config.mount_entity, *s.detector));
      }
    }
    subscriptions.push_back(bus.subscribe("/perception/*/detections", [&current](const Message& msg) {
      if (current == nullptr) return;
      if (const auto* d = std::get_if<DetectedObjects>(&msg.payload)) {
        current->detections[detection_entity(msg.topic)] = *d;
      }
    }));

    std::vector<bool> fired(spec.events.size(), false);
    while (true) {
      auto [next, collisions] = step(world, step_cfg);
      world = std::move(next);

      TraceTick record = snapshot(world);
      record.collisions = collisions;
      current = &record;

      const double t = world.sim_time;
      bus.publish("/sim/clock", t, Clock{world.tick, t});
      bus.publish("/sim/objects", t, alive_snapshot(world));
      bus.publish("/sim/collisions", t, CollisionList{t, collisions});
      for (const auto& s : spec.sensors) {
        if (world.find_alive(s.config.mount_entity) == nullptr) continue;
        if (s.config.kind == SensorKind::object_list) {
          bus.publish(s.config.topic, t, sample_object_sensor(world, s.config));
        } else {
          bus.publish(s.config.topic, t, sample_range_scan(world, s.config));
        }
      }
      current = nullptr;
      trace.ticks.push_back(std::move(record));

      for (std::size_t i = 0; i < spec.events.size(); ++i) {
        if (fired[i] || !eval_condition(spec.events[i].trigger, world)) continue;
        fired[i] = true;
        const Event& ev = spec.events[i];
        bus.publish("/scenario/status", t, ScenarioStatus{world.tick, t, "event", ev.name});
        for (const auto& action : ev.actions) {
          ActionLogEntry entry{world.tick, ev.name, action_type(action), {}};
          try {
            world = apply_action(action, world);
          } catch (const ActionError& e) {
            entry.error = e.what();
          }
          result.action_log.push_back(std::move(entry));
        }
      }

      bool stop = false;
      for (const auto& c : spec.stop.any_of) {
        if (eval_condition(c, world)) {
          stop = true;
          break;
        }
      }
      if (stop || world.tick >= max_ticks) {
        result.end_reason = stop ? EndReason::stop_condition : EndReason::timeout;
        bus.publish("/scenario/status", t, ScenarioStatus{world.tick, t, "end", to_string(result.end_reason)});
        break;
      }
    }
  } catch (const std::exception& e) {
    result.end_reason = EndReason::error;
    result.diagnostic = e.what();
  }
  current = nullptr;
  for (auto id : subscriptions) bus.unsubscribe(id);

  result.ticks = world.tick;
  result.end_time = static_cast<double>(world.tick) * options.dt;
  for (const auto& f : bus.failures()) {
    result.delivery_failures.push_back(f.topic + "#" + std::to_string(f.seq) + ": " + f.what);
  }

  if (result.end_reason != EndReason::error) {
    const auto outcome = evaluate_criteria(spec.criteria, trace);
    result.passed = outcome.passed;
    for (const auto& v : outcome.verdicts) result.metrics.emplace_back(v.metric, v.observed);
    result.verdicts = outcome.verdicts;
  } else {
    result.passed = false;
  }
  if (trace_out != nullptr) *trace_out = std::move(trace);
  return result;
}

void provide_scenario_service(Bus& bus, RunOptions defaults) {
  bus.provide(kExecuteService, [defaults](const nlohmann::json& request) -> nlohmann::json {
    ScenarioSpec spec;
    if (request.contains("document")) {
      spec = parse_scenario_json(request.at("document"));
    } else if (request.contains("scenario")) {
      spec = parse_scenario(read_text_file(request.at("scenario").get<std::string>()));
    } else {
      throw UsageError("request needs 'scenario' or 'document'");
    }
    RunOptions opts = defaults;
    if (request.contains("dt")) opts.dt = request.at("dt").get<double>();
    if (request.contains("seed")) opts.seed = request.at("seed").get<std::uint64_t>();
    if (request.contains("duration_s")) opts.duration_s = request.at("duration_s").get<double>();
    Bus run_bus;
    const RunResult result = run_scenario(spec, opts, run_bus);
    return nlohmann::json::parse(to_json(result).dump());
  });
}

}  // namespace simlane
