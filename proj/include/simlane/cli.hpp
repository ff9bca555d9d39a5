#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace simlane::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCriteriaFailed = 1,
  kConfigError = 2,
  kRuntimeError = 3,
};

struct RunFlags {
  double dt = 0.05;
  std::uint64_t seed = 0;
  std::vector<std::string> record;
  std::optional<std::filesystem::path> out;  // default: default_output_dir()
  std::optional<double> duration_s;
};

int cmd_run(const std::filesystem::path& scenario, const RunFlags& flags, std::ostream& out, std::ostream& err);

int cmd_campaign(const std::filesystem::path& campaign, std::optional<int> max_parallel, std::ostream& out,
                 std::ostream& err);

/// Suite document: `{"name": ..., "tests": ["a.json", {"scenario": "b.json",
/// "overrides": {"entities.ego.target_speed": 12}}]}`. Writes a JUnit XML
/// report to `report` (default `<out>/test_report.xml`) and a JSON report
/// next to it.
int cmd_test(const std::filesystem::path& suite, const RunFlags& flags,
             const std::optional<std::filesystem::path>& report, std::ostream& out, std::ostream& err);

int cmd_inspect(const std::filesystem::path& run_dir, const std::optional<std::string>& export_topic,
                std::ostream& out, std::ostream& err);

/// Full command line (args[0] is the program name).
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simlane::cli
