#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simlane/runner.hpp"
#include "simlane/scenario.hpp"

namespace simlane {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CARLOS_LITE_OUT";

/// The kOutputDirEnv directory when set, else `out`.
std::filesystem::path default_output_dir();

struct GeneralSettings {
  std::filesystem::path scenario;
  std::optional<double> duration_s;
  double dt = 0.05;
  std::uint64_t seed = 0;
  std::vector<std::string> record_topics;
  std::filesystem::path output_dir;
  int max_parallel = 1;
  std::vector<std::string> services;  // post-run services: "csv_export"
};

/// Override path -> candidate values. std::map keeps dimensions sorted
/// lexicographically by path.
using ParameterSpace = std::map<std::string, std::vector<nlohmann::json>>;
using Overrides = std::map<std::string, nlohmann::json>;

/// Reserved override path that swaps the whole base scenario document.
inline constexpr const char* kScenarioFileKey = "scenario_file";

struct Campaign {
  GeneralSettings general;
  ParameterSpace space;
  nlohmann::json base_document;
  /// Documents reachable through `scenario_file`, keyed by the value as written.
  std::map<std::string, nlohmann::json> scenario_documents;
};

/// Parses the two-part campaign document. Relative scenario paths resolve
/// against `base_dir`. Throws ConfigError (ParseError for malformed text).
Campaign parse_campaign(const std::string& text, const std::filesystem::path& base_dir);
Campaign load_campaign(const std::filesystem::path& path);

/// Full Cartesian product, rightmost (lexicographically last) dimension
/// fastest. An empty space yields one empty map.
std::vector<Overrides> expand_permutations(const ParameterSpace& space);

/// Deep copy of `base` with every addressed field replaced and re-validated.
/// Throws ConfigError naming the path on a resolution or kind problem.
nlohmann::json apply_overrides(const nlohmann::json& base, const Overrides& overrides,
                               const std::map<std::string, nlohmann::json>& scenario_documents = {});

/// `max(3, digits(total - 1))`-wide zero-padded index.
std::string make_run_id(std::size_t index, std::size_t total);

struct RunConfig {
  std::string run_id;
  std::size_t index = 0;
  Overrides overrides;
  nlohmann::json effective_scenario;
  ScenarioSpec spec;
  GeneralSettings general;
  std::uint64_t seed = 0;  // general.seed + index
};

/// Expands and validates every run before anything executes.
std::vector<RunConfig> plan_campaign(const Campaign& campaign);

/// Canonical effective run configuration (no paths, no wall clock).
nlohmann::json effective_config(const RunConfig& run);
/// SHA-256 over the canonical dump of `effective_config`.
std::string config_hash(const RunConfig& run);

struct RunSummary {
  std::string run_id;
  Overrides overrides;
  std::string end_reason;
  std::string verdict;  // pass | fail | none
  std::string artifact_dir;
  std::string diagnostic;
};

struct CampaignReport {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::size_t verdict_pass = 0;
  std::size_t verdict_fail = 0;
  std::vector<RunSummary> runs;  // ordered by run_id
  double wall_time_s = 0.0;
};

nlohmann::ordered_json to_json(const CampaignReport& report);

/// Executes one run into `run_dir`: effective config, topic recordings,
/// manifest, post-run services and `result.json`.
RunResult execute_run(const RunConfig& run, const std::filesystem::path& run_dir);

using RunExecutor = std::function<RunResult(const RunConfig&, const std::filesystem::path&)>;

/// Runs every config on at most `max_parallel` worker threads, each into
/// `output_dir/<run_id>`, and writes `output_dir/campaign_report.json`.
/// A failing run is recorded, never fatal. Throws StorageError if
/// output_dir is not writable.
CampaignReport execute_campaign(const GeneralSettings& general, const std::vector<RunConfig>& runs,
                                int max_parallel, const RunExecutor& executor = execute_run);

}  // namespace simlane
