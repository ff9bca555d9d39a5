#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "simlane/campaign.hpp"
#include "simlane/codec.hpp"
#include "simlane/detector.hpp"
#include "simlane/error.hpp"
#include "simlane/evaluation.hpp"
#include "simlane/recorder.hpp"
#include "simlane/runner.hpp"
#include "simlane/scenario.hpp"
#include "simlane/world.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Python objects cross the boundary through the stdlib json module.
json to_cpp(const py::handle& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

template <class J>
py::object to_py(const J& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json document_of(const py::handle& doc) {
  if (py::isinstance<py::str>(doc)) return simlane::parse_json_text(doc.cast<std::string>());
  return to_cpp(doc);
}

simlane::PathModel path_of(const std::vector<std::pair<double, double>>& points) {
  std::vector<simlane::Vec2> pts;
  for (const auto& [x, y] : points) pts.push_back({x, y});
  return simlane::PathModel("path", pts);
}

}  // namespace

PYBIND11_MODULE(simlane, m) {
  m.doc() = "Deterministic 2D scenario simulation: runs, campaigns, recordings";

  static py::exception<simlane::Error> base(m, "SimlaneError", PyExc_RuntimeError);
  static py::exception<simlane::ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<simlane::ParseError> parse(m, "ParseError", base.ptr());
  static py::exception<simlane::ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<simlane::RangeError> range(m, "RangeError", base.ptr());
  static py::exception<simlane::LoadError> load(m, "LoadError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const simlane::ValidationError& e) {
      PyErr_SetString(validation.ptr(), e.what());
    } catch (const simlane::ParseError& e) {
      PyErr_SetString(parse.ptr(), e.what());
    } catch (const simlane::ConfigError& e) {
      PyErr_SetString(config.ptr(), e.what());
    } catch (const simlane::RangeError& e) {
      PyErr_SetString(range.ptr(), e.what());
    } catch (const simlane::LoadError& e) {
      PyErr_SetString(load.ptr(), e.what());
    } catch (const simlane::Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("path_length", [](const std::vector<std::pair<double, double>>& points) {
    return simlane::path_length(path_of(points));
  }, py::arg("points"));

  m.def("station_to_pose", [](const std::vector<std::pair<double, double>>& points, double station) {
    const auto p = simlane::station_to_pose(path_of(points), station);
    return py::make_tuple(p.x, p.y, p.heading);
  }, py::arg("points"), py::arg("station"), "(x, y, heading) at `station` along the polyline.");

  m.def("parse_scenario", [](const py::object& doc) {
    return to_py(simlane::serialize_scenario(simlane::parse_scenario_json(document_of(doc))));
  }, py::arg("document"), "Validate a scenario (dict or JSON text); returns the canonical form.");

  m.def("run_scenario", [](const py::object& doc, double dt, std::uint64_t seed, std::optional<double> duration_s) {
    const auto spec = simlane::parse_scenario_json(document_of(doc));
    simlane::RunOptions opts;
    opts.dt = dt;
    opts.seed = seed;
    opts.duration_s = duration_s;
    simlane::RunResult result;
    {
      py::gil_scoped_release release;
      simlane::Bus bus;
      result = simlane::run_scenario(spec, opts, bus);
    }
    return to_py(simlane::to_json(result));
  }, py::arg("document"), py::arg("dt") = 0.05, py::arg("seed") = 0, py::arg("duration_s") = py::none());

  m.def("expand_permutations", [](const py::dict& space) {
    simlane::ParameterSpace s;
    const json j = to_cpp(space);
    for (const auto& [k, v] : j.items()) s[k] = v.get<std::vector<json>>();
    json out = json::array();
    for (const auto& o : simlane::expand_permutations(s)) out.push_back(json(o));
    return to_py(out);
  }, py::arg("space"), "Cartesian product, lexicographic dimensions, rightmost fastest.");

  m.def("run_campaign", [](const std::filesystem::path& path, std::optional<int> max_parallel) {
    auto campaign = simlane::load_campaign(path);
    if (max_parallel) campaign.general.max_parallel = *max_parallel;
    const auto runs = simlane::plan_campaign(campaign);
    simlane::CampaignReport report;
    {
      py::gil_scoped_release release;
      report = simlane::execute_campaign(campaign.general, runs, campaign.general.max_parallel);
    }
    return to_py(simlane::to_json(report));
  }, py::arg("path"), py::arg("max_parallel") = py::none());

  m.def("cluster_scan", [](const py::dict& scan, double gap_threshold, int min_cluster_size) {
    const auto s = std::get<simlane::RangeScan>(simlane::decode_payload("range_scan", to_cpp(scan)));
    const auto clusters = simlane::cluster_scan(s, gap_threshold, min_cluster_size);
    return py::make_tuple(clusters, to_py(simlane::encode_payload(simlane::clusters_to_objects(s, clusters))));
  }, py::arg("scan"), py::arg("gap_threshold") = 1.0, py::arg("min_cluster_size") = 2,
     "Returns (beam index clusters, detected objects).");

  m.def("match_detections", [](const py::dict& detections, const py::dict& truth, double radius) {
    const auto r = simlane::match_detections(std::get<simlane::DetectedObjects>(simlane::decode_payload("detected_objects", to_cpp(detections))),
                                             std::get<simlane::ObjectList>(simlane::decode_payload("object_list", to_cpp(truth))), radius);
    py::dict d;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["sum_sq_position_error"] = r.sum_sq_position_error;
    return d;
  }, py::arg("detections"), py::arg("truth"), py::arg("radius"));

  m.def("load_recording", [](const std::filesystem::path& dir) {
    const auto rec = simlane::load_recording(dir);
    json topics = json::object();
    for (const auto& [topic, records] : rec.topics) {
      json list = json::array();
      for (const auto& r : records) {
        list.push_back({{"t", r.t}, {"seq", r.seq}, {"payload", simlane::encode_payload(r.payload)}});
      }
      topics[topic] = std::move(list);
    }
    py::dict d;
    d["manifest"] = to_py(simlane::manifest_to_json(rec.manifest));
    d["topics"] = to_py(topics);
    return d;
  }, py::arg("run_dir"));
}
