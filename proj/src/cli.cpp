#include "simlane/cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

#include "simlane/campaign.hpp"
#include "simlane/error.hpp"
#include "simlane/recorder.hpp"
#include "simlane/runner.hpp"
#include "simlane/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace simlane::cli {

namespace {

GeneralSettings general_from(const RunFlags& flags, const fs::path& scenario) {
  GeneralSettings g;
  g.scenario = scenario;
  g.dt = flags.dt;
  g.seed = flags.seed;
  g.duration_s = flags.duration_s;
  g.record_topics = flags.record;
  g.output_dir = flags.out.value_or(default_output_dir());
  return g;
}

void validate_flags(const RunFlags& flags) {
  if (!(flags.dt > 0.0)) throw ConfigError("--dt must be > 0");
  if (flags.duration_s && !(*flags.duration_s > 0.0)) throw ConfigError("--duration must be > 0");
  for (const auto& p : flags.record) {
    if (!is_valid_pattern(p)) throw ConfigError("--record: invalid topic pattern '" + p + "'");
  }
}

json load_document(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const StorageError& e) {
    throw ConfigError(e.what());
  }
  return parse_json_text(text);
}

RunConfig single_run(const json& doc, const GeneralSettings& general, std::size_t index, std::size_t total) {
  RunConfig r;
  r.index = index;
  r.run_id = make_run_id(index, total);
  r.effective_scenario = doc;
  r.spec = parse_scenario_json(doc);
  r.general = general;
  r.seed = general.seed + index;
  return r;
}

std::string verdict_word(const RunResult& r) {
  if (r.end_reason == EndReason::error) return "ERROR";
  if (!r.has_criteria) return "-";
  return r.passed ? "PASS" : "FAIL";
}

void print_result(const RunResult& r, std::ostream& out) {
  out << "scenario:   " << r.scenario_name << "\n"
      << "end_reason: " << to_string(r.end_reason) << "\n"
      << "ticks:      " << r.ticks << "\n"
      << "end_time:   " << format_number(r.end_time) << " s\n";
  for (const auto& v : r.verdicts) {
    out << "  [" << (v.passed ? "PASS" : "FAIL") << "] " << v.criterion << "  (observed "
        << format_number(v.observed) << ")";
    if (!v.error.empty()) out << "  error: " << v.error;
    out << "\n";
  }
  out << "verdict:    " << verdict_word(r) << "\n"
      << "artifacts:  " << r.artifact_dir << "\n";
}

int exit_code_for(const RunResult& r) {
  if (r.end_reason == EndReason::error) return kRuntimeError;
  return r.passed ? kSuccess : kCriteriaFailed;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct SuiteEntry {
  fs::path scenario;
  Overrides overrides;
};

struct TestOutcome {
  SuiteEntry entry;
  RunConfig config;
  RunResult result;
};

std::string junit_report(const std::string& suite_name, const std::vector<TestOutcome>& outcomes) {
  std::size_t failures = 0;
  std::size_t errors = 0;
  for (const auto& o : outcomes) {
    if (o.result.end_reason == EndReason::error) {
      ++errors;
    } else {
      for (const auto& v : o.result.verdicts) failures += v.passed ? 0 : 1;
    }
  }
  std::ostringstream x;
  x << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<testsuites name=\"" << xml_escape(suite_name) << "\" tests=\"" << outcomes.size() << "\" failures=\""
    << failures << "\" errors=\"" << errors << "\">\n"
    << "  <testsuite name=\"" << xml_escape(suite_name) << "\" tests=\"" << outcomes.size() << "\" failures=\""
    << failures << "\" errors=\"" << errors << "\" skipped=\"0\">\n";
  for (const auto& o : outcomes) {
    const auto& r = o.result;
    x << "    <testcase name=\"" << xml_escape(r.scenario_name) << "\" classname=\""
      << xml_escape(suite_name + "." + o.config.run_id) << "\" time=\"" << format_number(r.end_time) << "\"";
    const bool has_body = r.end_reason == EndReason::error ||
                          std::any_of(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return !v.passed; });
    if (!has_body) {
      x << "/>\n";
      continue;
    }
    x << ">\n";
    if (r.end_reason == EndReason::error) {
      x << "      <error message=\"" << xml_escape(r.diagnostic) << "\" type=\"run_error\"/>\n";
    } else {
      for (const auto& v : r.verdicts) {
        if (v.passed) continue;
        const std::string expected = to_string(v.op) + " " + format_number(v.value);
        const std::string observed = v.error.empty() ? format_number(v.observed) : "error";
        x << "      <failure message=\"" << xml_escape(v.criterion) << "\" type=\"criterion\" criterion=\""
          << xml_escape(v.criterion) << "\" observed=\"" << xml_escape(observed) << "\" expected=\""
          << xml_escape(expected) << "\">" << xml_escape("criterion " + v.criterion + ": observed " + observed +
                                                         ", expected " + expected +
                                                         (v.error.empty() ? "" : " (" + v.error + ")"))
          << "</failure>\n";
      }
    }
    x << "    </testcase>\n";
  }
  x << "  </testsuite>\n</testsuites>\n";
  return x.str();
}

std::vector<SuiteEntry> parse_suite(const json& doc, const fs::path& base_dir, std::string& name) {
  if (!doc.is_object() || !doc.contains("tests") || !doc["tests"].is_array()) {
    throw ConfigError("test suite needs a 'tests' array");
  }
  for (const auto& [k, v] : doc.items()) {
    if (k != "name" && k != "tests") throw ConfigError(k + ": unknown key in test suite");
  }
  name = doc.value("name", std::string("simlane"));
  std::vector<SuiteEntry> entries;
  for (std::size_t i = 0; i < doc["tests"].size(); ++i) {
    const json& t = doc["tests"][i];
    const std::string at = "tests[" + std::to_string(i) + "]";
    SuiteEntry e;
    if (t.is_string()) {
      e.scenario = t.get<std::string>();
    } else if (t.is_object() && t.contains("scenario") && t["scenario"].is_string()) {
      for (const auto& [k, v] : t.items()) {
        if (k != "scenario" && k != "overrides") throw ConfigError(at + "." + k + ": unknown key");
      }
      e.scenario = t["scenario"].get<std::string>();
      if (t.contains("overrides")) {
        if (!t["overrides"].is_object()) throw ConfigError(at + ".overrides: expected an object");
        for (const auto& [path, value] : t["overrides"].items()) e.overrides[path] = value;
      }
    } else {
      throw ConfigError(at + ": expected a scenario path or {\"scenario\": ...}");
    }
    if (e.scenario.is_relative()) e.scenario = base_dir / e.scenario;
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ConfigError("test suite is empty");
  return entries;
}

}  // namespace

int cmd_run(const fs::path& scenario, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  RunConfig run;
  try {
    validate_flags(flags);
    run = single_run(load_document(scenario), general_from(flags, scenario), 0, 1);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const RunResult r = execute_run(run, run.general.output_dir / run.run_id);
    print_result(r, out);
    if (r.end_reason == EndReason::error) err << "error: run failed: " << r.diagnostic << "\n";
    return exit_code_for(r);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_campaign(const fs::path& campaign_path, std::optional<int> max_parallel, std::ostream& out,
                 std::ostream& err) {
  Campaign campaign;
  std::vector<RunConfig> runs;
  try {
    campaign = load_campaign(campaign_path);
    if (max_parallel) {
      if (*max_parallel < 1) throw ConfigError("--max-parallel must be >= 1");
      campaign.general.max_parallel = *max_parallel;
    }
    runs = plan_campaign(campaign);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const auto report = execute_campaign(campaign.general, runs, campaign.general.max_parallel);
    out << "campaign: " << report.total << " runs, " << report.completed << " completed, " << report.failed
        << " failed, verdicts " << report.verdict_pass << " pass / " << report.verdict_fail << " fail\n";
    for (const auto& s : report.runs) {
      out << "  " << s.run_id << "  " << std::left << std::setw(15) << s.end_reason << std::setw(5) << s.verdict
          << " " << json(s.overrides).dump() << "\n";
      if (!s.diagnostic.empty()) err << "run " << s.run_id << ": " << s.diagnostic << "\n";
    }
    out << "report: " << (campaign.general.output_dir / "campaign_report.json").string() << "\n";
    return (report.failed == 0 && report.verdict_fail == 0) ? kSuccess : kCriteriaFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_test(const fs::path& suite_path, const RunFlags& flags, const std::optional<fs::path>& report,
             std::ostream& out, std::ostream& err) {
  std::string suite_name;
  std::vector<TestOutcome> outcomes;
  try {
    validate_flags(flags);
    const auto entries = parse_suite(load_document(suite_path), suite_path.parent_path(), suite_name);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const std::string label = "tests[" + std::to_string(i) + "] (" + e.scenario.string() + ")";
      json doc = load_document(e.scenario);
      if (!e.overrides.empty()) doc = apply_overrides(doc, e.overrides);
      TestOutcome o{e, single_run(doc, general_from(flags, e.scenario), i, entries.size()), {}};
      if (o.config.spec.criteria.empty()) throw ConfigError(label + ": scenario declares no criteria");
      outcomes.push_back(std::move(o));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  bool any_error = false;
  bool any_fail = false;
  for (auto& o : outcomes) {
    try {
      o.result = execute_run(o.config, o.config.general.output_dir / o.config.run_id);
    } catch (const std::exception& e) {
      o.result.scenario_name = o.config.spec.name;
      o.result.end_reason = EndReason::error;
      o.result.diagnostic = e.what();
      o.result.passed = false;
    }
    any_error = any_error || o.result.end_reason == EndReason::error;
    any_fail = any_fail || !o.result.passed;
  }

  out << std::left << std::setw(6) << "run" << std::setw(28) << "scenario" << std::setw(8) << "result"
      << "failed criteria\n";
  for (const auto& o : outcomes) {
    std::string failed;
    for (const auto& v : o.result.verdicts) {
      if (!v.passed) failed += (failed.empty() ? "" : "; ") + v.criterion + " (observed " + format_number(v.observed) + ")";
    }
    if (o.result.end_reason == EndReason::error) failed = o.result.diagnostic;
    out << std::setw(6) << o.config.run_id << std::setw(28) << o.result.scenario_name << std::setw(8)
        << verdict_word(o.result) << failed << "\n";
  }

  const fs::path xml_path =
      report.value_or(flags.out.value_or(default_output_dir()) / "test_report.xml");
  try {
    if (xml_path.has_parent_path()) fs::create_directories(xml_path.parent_path());
    write_text_file(xml_path, junit_report(suite_name, outcomes));
    nlohmann::ordered_json j{{"suite", suite_name}, {"tests", nlohmann::ordered_json::array()}};
    for (const auto& o : outcomes) {
      auto r = to_json(o.result);
      r["run_id"] = o.config.run_id;
      r["scenario_file"] = o.entry.scenario.string();
      j["tests"].push_back(std::move(r));
    }
    fs::path json_path = xml_path;
    json_path.replace_extension(".json");
    write_text_file(json_path, j.dump(2) + "\n");
    out << "report: " << xml_path.string() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  if (any_error) return kRuntimeError;
  return any_fail ? kCriteriaFailed : kSuccess;
}

int cmd_inspect(const fs::path& run_dir, const std::optional<std::string>& export_topic, std::ostream& out,
                std::ostream& err) {
  Recording rec;
  try {
    rec = load_recording(run_dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  const auto& m = rec.manifest;
  out << "run_id:      " << m.run_id << "\n"
      << "scenario:    " << m.scenario_name << "\n"
      << "end_reason:  " << m.end_reason << "\n"
      << "seed:        " << m.seed << "\n"
      << "dt:          " << format_number(m.dt) << "\n"
      << "config_hash: " << m.config_hash << "\n"
      << "integrity:   " << m.integrity << "\n"
      << "created:     " << m.created << "\n"
      << "topics:\n";
  for (const auto& t : m.topics) {
    out << "  " << std::left << std::setw(32) << t.topic << std::setw(18) << t.payload_kind << t.message_count
        << "\n";
  }
  if (m.integrity != "ok") {
    err << "error: recording is marked " << m.integrity << "\n";
    return kConfigError;
  }
  if (export_topic) {
    try {
      const auto path = export_csv(rec, *export_topic, default_export_path(rec, *export_topic));
      out << "exported: " << path.string() << "\n";
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kConfigError;
    }
  }
  return kSuccess;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-based driving simulation: single runs, campaigns, pass-fail tests"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string out_dir;
  std::optional<double> duration;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dt", flags.dt, "Fixed timestep in seconds")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "Base RNG seed")->capture_default_str();
    cmd->add_option("--record", flags.record, "Topic pattern to record (repeatable)");
    cmd->add_option("--out", out_dir, std::string("Output directory (default $") + kOutputDirEnv + " or ./out)");
  };

  std::string scenario;
  auto* run = app.add_subcommand("run", "Execute one scenario");
  run->add_option("scenario", scenario, "Scenario document")->required();
  add_run_flags(run);
  run->add_option("--duration", duration, "Override stop.timeout_s (seconds)");

  std::string campaign;
  std::optional<int> max_parallel;
  auto* camp = app.add_subcommand("campaign", "Expand and execute a parameter-sweep campaign");
  camp->add_option("campaign", campaign, "Campaign document")->required();
  camp->add_option("--max-parallel", max_parallel, "Override general.max_parallel");

  std::string suite;
  std::string report;
  auto* test = app.add_subcommand("test", "Run a pass-fail test suite and write a JUnit report");
  test->add_option("suite", suite, "Test-suite document")->required();
  add_run_flags(test);
  test->add_option("--report", report, "JUnit XML report path (JSON written alongside)");

  std::string run_dir;
  std::string export_topic;
  auto* inspect = app.add_subcommand("inspect", "Summarize a run directory");
  inspect->add_option("run_dir", run_dir, "Run directory containing manifest.json")->required();
  inspect->add_option("--export-csv", export_topic, "Export one topic to CSV");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  if (!out_dir.empty()) flags.out = fs::path(out_dir);
  flags.duration_s = duration;

  if (run->parsed()) return cmd_run(scenario, flags, out, err);
  if (camp->parsed()) return cmd_campaign(campaign, max_parallel, out, err);
  if (test->parsed()) {
    return cmd_test(suite, flags, report.empty() ? std::nullopt : std::optional<fs::path>(report), out, err);
  }
  return cmd_inspect(run_dir, export_topic.empty() ? std::nullopt : std::optional<std::string>(export_topic),
                     out, err);
}

}  // namespace simlane::cli
