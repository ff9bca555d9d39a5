#include "simlane/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "simlane/error.hpp"
#include "simlane/recorder.hpp"
#include "simlane/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace simlane {

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "out";
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    out.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.size() < 10 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Slot addressed by a dotted override path. Arrays are addressed by index
/// or by the `id` of an element; the final key may be absent (defaulted
/// field) as long as its parent object exists. Returns nullptr if the path
/// does not resolve.
json* resolve(json& doc, const std::string& path) {
  const auto segs = split_path(path);
  json* node = &doc;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string& seg = segs[i];
    if (seg.empty()) return nullptr;
    const bool last = i + 1 == segs.size();
    if (node->is_object()) {
      if (!node->contains(seg)) {
        if (!last) return nullptr;
        return &(*node)[seg];
      }
      node = &(*node)[seg];
    } else if (node->is_array()) {
      json* next = nullptr;
      if (is_index(seg)) {
        const auto idx = std::stoul(seg);
        if (idx < node->size()) next = &(*node)[idx];
      } else {
        for (auto& el : *node) {
          if (el.is_object() && el.contains("id") && el["id"] == seg) {
            next = &el;
            break;
          }
        }
      }
      if (next == nullptr) return nullptr;
      node = next;
    } else {
      return nullptr;
    }
  }
  return node;
}

bool path_resolves(const json& doc, const std::string& path) {
  json copy = doc;
  return resolve(copy, path) != nullptr;
}

std::string kind_of(const json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

fs::path resolve_file(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

json load_scenario_document(const fs::path& file, const std::string& label) {
  std::string text;
  try {
    text = read_text_file(file);
  } catch (const StorageError& e) {
    throw ConfigError(label + ": " + e.what());
  }
  json doc = parse_json_text(text);
  try {
    parse_scenario_json(doc);
  } catch (const ValidationError& e) {
    throw ConfigError(label + " '" + file.string() + "' invalid: " + e.what());
  }
  return doc;
}

GeneralSettings parse_general(const json& g, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {"scenario", "duration",    "dt",           "seed",
                                              "record_topics", "output_dir", "max_parallel", "services"};
  if (!g.is_object()) throw ConfigError("general: expected an object");
  for (const auto& [k, v] : g.items()) {
    if (!kKeys.contains(k)) throw ConfigError("general." + k + ": unknown key");
  }
  GeneralSettings s;
  auto number = [&](const char* key) -> double {
    const json& v = g.at(key);
    if (!v.is_number()) throw ConfigError(std::string("general.") + key + ": expected a number");
    return v.get<double>();
  };
  if (!g.contains("scenario") || !g["scenario"].is_string()) {
    throw ConfigError("general.scenario: required path to the base scenario");
  }
  s.scenario = resolve_file(base_dir, g["scenario"].get<std::string>());
  if (g.contains("duration")) {
    s.duration_s = number("duration");
    if (!(*s.duration_s > 0.0)) throw ConfigError("general.duration: must be > 0");
  }
  if (g.contains("dt")) s.dt = number("dt");
  if (!(s.dt > 0.0)) throw ConfigError("general.dt: must be > 0");
  if (g.contains("seed")) {
    if (!g["seed"].is_number_unsigned()) throw ConfigError("general.seed: expected an unsigned integer");
    s.seed = g["seed"].get<std::uint64_t>();
  }
  if (g.contains("record_topics")) {
    if (!g["record_topics"].is_array()) throw ConfigError("general.record_topics: expected an array");
    for (const auto& p : g["record_topics"]) {
      if (!p.is_string() || !is_valid_pattern(p.get<std::string>())) {
        throw ConfigError("general.record_topics: invalid pattern " + p.dump());
      }
      s.record_topics.push_back(p.get<std::string>());
    }
  }
  if (g.contains("output_dir")) {
    if (!g["output_dir"].is_string()) throw ConfigError("general.output_dir: expected a string");
    s.output_dir = g["output_dir"].get<std::string>();
  } else {
    s.output_dir = default_output_dir();
  }
  if (g.contains("max_parallel")) {
    if (!g["max_parallel"].is_number_integer() || g["max_parallel"].get<long long>() < 1) {
      throw ConfigError("general.max_parallel: must be an integer >= 1");
    }
    s.max_parallel = static_cast<int>(g["max_parallel"].get<long long>());
  }
  if (g.contains("services")) {
    if (!g["services"].is_array()) throw ConfigError("general.services: expected an array");
    for (const auto& name : g["services"]) {
      if (name != "csv_export") throw ConfigError("general.services: unknown service " + name.dump());
      s.services.push_back(name.get<std::string>());
    }
  }
  return s;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

Campaign parse_campaign(const std::string& text, const fs::path& base_dir) {
  const json doc = parse_json_text(text);
  if (!doc.is_object()) throw ConfigError("campaign document must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "general" && k != "parameter_space") throw ConfigError(k + ": unknown key");
  }
  if (!doc.contains("general")) throw ConfigError("general: missing");

  Campaign c;
  c.general = parse_general(doc["general"], base_dir);
  c.base_document = load_scenario_document(c.general.scenario, "general.scenario");

  if (doc.contains("parameter_space")) {
    const json& space = doc["parameter_space"];
    if (!space.is_object()) throw ConfigError("parameter_space: expected an object");
    for (const auto& [path, values] : space.items()) {
      if (!values.is_array() || values.empty()) {
        throw ConfigError("parameter_space." + path + ": expected a non-empty list of values");
      }
      const std::string kind = kind_of(values.front());
      for (const auto& v : values) {
        if (kind_of(v) != kind) throw ConfigError("parameter_space." + path + ": values differ in kind");
      }
      c.space[path] = values.get<std::vector<json>>();
    }
  }

  std::vector<const json*> bases{&c.base_document};
  if (auto files = c.space.find(kScenarioFileKey); files != c.space.end()) {
    bases.clear();
    for (const auto& v : files->second) {
      if (!v.is_string()) throw ConfigError("parameter_space.scenario_file: expected file paths");
      const std::string key = v.get<std::string>();
      c.scenario_documents[key] =
          load_scenario_document(resolve_file(base_dir, key), "parameter_space.scenario_file");
    }
    for (const auto& [key, d] : c.scenario_documents) bases.push_back(&d);
  }
  for (const auto& [path, values] : c.space) {
    if (path == kScenarioFileKey) continue;
    for (const json* base : bases) {
      if (!path_resolves(*base, path)) throw ConfigError("unresolvable override path '" + path + "'");
    }
  }
  return c;
}

Campaign load_campaign(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const StorageError& e) {
    throw ConfigError(e.what());
  }
  return parse_campaign(text, path.parent_path());
}

std::vector<Overrides> expand_permutations(const ParameterSpace& space) {
  std::vector<Overrides> out{Overrides{}};
  for (const auto& [path, values] : space) {
    std::vector<Overrides> next;
    next.reserve(out.size() * values.size());
    for (const auto& prefix : out) {
      for (const auto& v : values) {
        Overrides o = prefix;
        o[path] = v;
        next.push_back(std::move(o));
      }
    }
    out = std::move(next);
  }
  return out;
}

json apply_overrides(const json& base, const Overrides& overrides,
                     const std::map<std::string, json>& scenario_documents) {
  json doc = base;
  if (auto file = overrides.find(kScenarioFileKey); file != overrides.end()) {
    auto found = file->second.is_string() ? scenario_documents.find(file->second.get<std::string>())
                                          : scenario_documents.end();
    if (found == scenario_documents.end()) {
      throw ConfigError("scenario_file " + file->second.dump() + " was not loaded");
    }
    doc = found->second;
  }
  for (const auto& [path, value] : overrides) {
    if (path == kScenarioFileKey) continue;
    json* slot = resolve(doc, path);
    if (slot == nullptr) throw ConfigError("unresolvable override path '" + path + "'");
    *slot = value;
  }
  try {
    parse_scenario_json(doc);
  } catch (const ValidationError& e) {
    throw ConfigError("overrides " + json(overrides).dump() + " produce an invalid scenario: " + e.what());
  }
  return doc;
}

std::string make_run_id(std::size_t index, std::size_t total) {
  std::size_t width = std::to_string(total > 0 ? total - 1 : 0).size();
  width = std::max<std::size_t>(width, 3);
  std::string id = std::to_string(index);
  return std::string(width > id.size() ? width - id.size() : 0, '0') + id;
}

std::vector<RunConfig> plan_campaign(const Campaign& campaign) {
  const auto permutations = expand_permutations(campaign.space);
  std::vector<RunConfig> runs;
  runs.reserve(permutations.size());
  for (std::size_t i = 0; i < permutations.size(); ++i) {
    RunConfig r;
    r.index = i;
    r.run_id = make_run_id(i, permutations.size());
    r.overrides = permutations[i];
    r.effective_scenario = apply_overrides(campaign.base_document, r.overrides, campaign.scenario_documents);
    r.spec = parse_scenario_json(r.effective_scenario);
    r.general = campaign.general;
    r.seed = campaign.general.seed + i;
    runs.push_back(std::move(r));
  }
  return runs;
}

json effective_config(const RunConfig& run) {
  json general{{"dt", run.general.dt},
               {"seed", run.seed},
               {"record_topics", run.general.record_topics},
               {"services", run.general.services}};
  general["duration"] = run.general.duration_s ? json(*run.general.duration_s) : json(nullptr);
  return {{"general", general}, {"overrides", json(run.overrides)}, {"scenario", serialize_scenario(run.spec)}};
}

std::string config_hash(const RunConfig& run) { return sha256_hex(effective_config(run).dump()); }

nlohmann::ordered_json to_json(const CampaignReport& r) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& s : r.runs) {
    nlohmann::ordered_json j{{"run_id", s.run_id},
                             {"overrides", json(s.overrides)},
                             {"end_reason", s.end_reason},
                             {"verdict", s.verdict},
                             {"artifact_dir", s.artifact_dir}};
    if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
    runs.push_back(std::move(j));
  }
  return {{"total", r.total},
          {"completed", r.completed},
          {"failed", r.failed},
          {"verdicts", {{"pass", r.verdict_pass}, {"fail", r.verdict_fail}}},
          {"runs", runs},
          {"wall_time_s", r.wall_time_s}};
}

RunResult execute_run(const RunConfig& run, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  write_json(run_dir / "config.json", nlohmann::ordered_json(effective_config(run)));

  Bus bus;
  auto capture = start_capture(bus, run.general.record_topics, run_dir);
  RunOptions opts;
  opts.dt = run.general.dt;
  opts.seed = run.seed;
  opts.duration_s = run.general.duration_s;
  RunResult result = run_scenario(run.spec, opts, bus);
  result.artifact_dir = run_dir.string();

  const RecordingManifest manifest = finalize(*capture, {run.run_id, run.spec.name, config_hash(run), run.seed,
                                                         run.general.dt, to_string(result.end_reason)});
  for (const auto& service : run.general.services) {
    if (service == "csv_export") {
      const Recording rec = load_recording(run_dir);
      for (const auto& t : manifest.topics) export_csv(rec, t.topic, default_export_path(rec, t.topic));
    }
  }

  // Stored relative to the campaign output directory.
  auto stored = to_json(result);
  stored["artifact_dir"] = run.run_id;
  write_json(run_dir / "result.json", stored);
  return result;
}

CampaignReport execute_campaign(const GeneralSettings& general, const std::vector<RunConfig>& runs,
                                int max_parallel, const RunExecutor& executor) {
  const auto started = std::chrono::steady_clock::now();
  {
    std::error_code ec;
    fs::create_directories(general.output_dir, ec);
    const fs::path probe = general.output_dir / ".write_probe";
    std::ofstream out(probe);
    if (ec || !out) throw StorageError("output_dir '" + general.output_dir.string() + "' is not writable");
    out.close();
    fs::remove(probe, ec);
  }

  std::vector<RunSummary> summaries(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const RunConfig& run = runs[i];
      const fs::path dir = general.output_dir / run.run_id;
      RunSummary& s = summaries[i];
      s.run_id = run.run_id;
      s.overrides = run.overrides;
      s.artifact_dir = dir.string();
      try {
        const RunResult r = executor(run, dir);
        s.end_reason = to_string(r.end_reason);
        s.diagnostic = r.diagnostic;
        s.verdict = r.end_reason == EndReason::error ? "none" : !r.has_criteria ? "none" : r.passed ? "pass" : "fail";
      } catch (const std::exception& e) {
        s.end_reason = to_string(EndReason::error);
        s.verdict = "none";
        s.diagnostic = e.what();
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(std::max(max_parallel, 1), runs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  CampaignReport report;
  report.total = runs.size();
  for (const auto& s : summaries) {
    if (s.end_reason == "error") {
      ++report.failed;
    } else {
      ++report.completed;
      if (s.verdict == "pass") ++report.verdict_pass;
      if (s.verdict == "fail") ++report.verdict_fail;
    }
  }
  report.runs = std::move(summaries);
  std::sort(report.runs.begin(), report.runs.end(),
            [](const RunSummary& a, const RunSummary& b) { return a.run_id < b.run_id; });
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_json(general.output_dir / "campaign_report.json", to_json(report));
  return report;
}

}  // namespace simlane
