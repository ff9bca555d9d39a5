#include <gtest/gtest.h>

#include <random>

#include "simlane/codec.hpp"
#include "simlane/error.hpp"
#include "simlane/recorder.hpp"
#include "simlane/runner.hpp"
#include "support.hpp"

using namespace simlane;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

RecordingManifest record_run(const nlohmann::json& doc, const std::vector<std::string>& patterns, const fs::path& dir,
                             std::uint64_t seed = 1, double dt = 0.05, RunResult* result = nullptr) {
  const auto spec = parse_scenario_json(doc);
  Bus bus;
  auto capture = start_capture(bus, patterns, dir);
  RunOptions opts;
  opts.dt = dt;
  opts.seed = seed;
  const auto r = run_scenario(spec, opts, bus);
  if (result) *result = r;
  return finalize(*capture, {"r0", spec.name, "hash", seed, dt, to_string(r.end_reason)});
}

std::vector<std::string> topic_files(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir / "topics")) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

nlohmann::json two_scanner_scenario() {
  auto doc = testsupport::busy_scenario(1.0, 0.0);
  doc["sensors"].push_back({{"kind", "range_scan"}, {"mount_entity", "lead"}, {"range", 30.0}, {"beam_count", 5}});
  return doc;
}

}  // namespace

TEST(TopicFileStem, Mapping) {
  EXPECT_EQ(topic_file_stem("/sensors/ego/scan"), "__sensors__ego__scan");
  EXPECT_EQ(topic_file_stem("/sim/clock"), "__sim__clock");
}

TEST(Capture, OnlyMatchedTopicsGetFiles) {
  TempDir tmp;
  const auto m = record_run(testsupport::busy_scenario(1.0), {"/sim/clock"}, tmp.path());
  EXPECT_EQ(topic_files(tmp.path()), (std::vector<std::string>{"__sim__clock.jsonl"}));
  ASSERT_EQ(m.topics.size(), 1u);
  EXPECT_EQ(m.topics[0].topic, "/sim/clock");
  EXPECT_EQ(m.topics[0].payload_kind, "clock");
  EXPECT_EQ(m.integrity, "ok");
}

TEST(Capture, WildcardCoversEachScanner) {
  TempDir tmp;
  record_run(two_scanner_scenario(), {"/sensors/*/scan"}, tmp.path());
  EXPECT_EQ(topic_files(tmp.path()), (std::vector<std::string>{"__sensors__ego__scan.jsonl", "__sensors__lead__scan.jsonl"}));
}

TEST(Capture, NoPatternsWritesManifestOnly) {
  TempDir tmp;
  const auto m = record_run(testsupport::busy_scenario(1.0), {}, tmp.path());
  EXPECT_TRUE(m.topics.empty());
  EXPECT_TRUE(topic_files(tmp.path()).empty());
  EXPECT_TRUE(fs::exists(tmp / "manifest.json"));
}

TEST(Capture, OverlappingPatternsWriteOnce) {
  TempDir tmp;
  const auto m = record_run(testsupport::minimal_scenario(), {"/sim/*", "/sim/clock", "/*/clock"}, tmp.path(), 1, 0.1);
  for (const auto& t : m.topics) {
    if (t.topic == "/sim/clock") {
      EXPECT_EQ(t.message_count, 100u);
    }
  }
  EXPECT_EQ(testsupport::count_lines(tmp / "topics" / "__sim__clock.jsonl"), 100u);
}

TEST(Capture, ClockCountMatchesTicks) {
  TempDir tmp;
  RunResult r;
  const auto m = record_run(testsupport::minimal_scenario(), {"/sim/clock"}, tmp.path(), 1, 0.1, &r);
  EXPECT_EQ(r.ticks, 100);
  EXPECT_EQ(m.topics.at(0).message_count, 100u);
  const auto rec = load_recording(tmp.path());
  ASSERT_EQ(rec.topics.at("/sim/clock").size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& rcd = rec.topics.at("/sim/clock")[i];
    EXPECT_EQ(rcd.seq, i);
    EXPECT_EQ(std::get<Clock>(rcd.payload).tick, static_cast<std::int64_t>(i + 1));
  }
}

TEST(Capture, InvalidPatternOrUnwritableDir) {
  TempDir tmp;
  Bus bus;
  EXPECT_THROW(start_capture(bus, {"/sim/cl*"}, tmp.path()), UsageError);
  testsupport::spit(tmp / "file", "x");
  EXPECT_THROW(start_capture(bus, {"/sim/clock"}, tmp / "file" / "sub"), StorageError);
}

TEST(Capture, LineCountMismatchIsIntegrityError) {
  TempDir tmp;
  const auto spec = parse_scenario_json(testsupport::minimal_scenario());
  Bus bus;
  auto capture = start_capture(bus, {"/sim/clock"}, tmp.path());
  RunOptions opts;
  opts.dt = 0.1;
  run_scenario(spec, opts, bus);
  capture->flush();
  fs::resize_file(tmp / "topics" / "__sim__clock.jsonl", 0);
  EXPECT_THROW(finalize(*capture, {"r0", "minimal", "h", 1, 0.1, "timeout"}), IntegrityError);
  const auto manifest = nlohmann::json::parse(testsupport::slurp(tmp / "manifest.json"));
  EXPECT_EQ(manifest["integrity"], "corrupt");
}

TEST(Capture, IdenticalRunsIdenticalBytes) {
  TempDir a, b;
  const auto doc = testsupport::busy_scenario(5.0, 0.05);
  record_run(doc, {"/sim/*", "/sensors/*/scan", "/perception/*/detections"}, a.path(), 42);
  record_run(doc, {"/sim/*", "/sensors/*/scan", "/perception/*/detections"}, b.path(), 42);
  EXPECT_EQ(testsupport::tree_bytes(a.path() / "topics"), testsupport::tree_bytes(b.path() / "topics"));
  EXPECT_EQ(testsupport::manifest_without_volatile(a / "manifest.json"),
            testsupport::manifest_without_volatile(b / "manifest.json"));
  EXPECT_FALSE(testsupport::tree_bytes(a.path() / "topics").empty());

  TempDir c;
  record_run(doc, {"/sensors/*/scan"}, c.path(), 43);
  EXPECT_NE(testsupport::slurp(a / "topics" / "__sensors__ego__scan.jsonl"),
            testsupport::slurp(c / "topics" / "__sensors__ego__scan.jsonl"));
}

TEST(LoadRecording, MissingManifestIsLoadError) {
  TempDir tmp;
  EXPECT_THROW(load_recording(tmp.path()), LoadError);
  testsupport::spit(tmp / "manifest.json", "{not json");
  EXPECT_THROW(load_recording(tmp.path()), LoadError);
}

TEST(LoadRecording, BadLineNamesFileAndLine) {
  TempDir tmp;
  record_run(testsupport::minimal_scenario(), {"/sim/clock"}, tmp.path(), 1, 0.1);
  const auto file = tmp / "topics" / "__sim__clock.jsonl";
  auto text = testsupport::slurp(file);
  const auto second = text.find('\n') + 1;
  text.insert(second, "garbage\n");
  testsupport::spit(file, text);
  try {
    load_recording(tmp.path());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("__sim__clock.jsonl:2"), std::string::npos) << what;
  }
}

TEST(LoadRecording, RoundTripEqualsPublished) {
  TempDir tmp;
  const auto spec = parse_scenario_json(testsupport::busy_scenario(2.0, 0.05));
  Bus bus;
  std::map<std::string, std::vector<Record>> seen;
  const std::vector<std::string> patterns = {"/sim/clock", "/sim/objects", "/sensors/ego/scan",
                                             "/sensors/ego/objects", "/perception/ego/detections"};
  for (const auto& p : patterns) {
    bus.subscribe(p, [&](const Message& m) { seen[m.topic].push_back({m.sim_time, m.seq, m.payload}); });
  }
  auto capture = start_capture(bus, patterns, tmp.path());
  RunOptions opts;
  opts.seed = 9;
  run_scenario(spec, opts, bus);
  finalize(*capture, {"r", spec.name, "h", 9, 0.05, "timeout"});
  const auto rec = load_recording(tmp.path());
  EXPECT_EQ(rec.manifest.scenario_name, "busy");
  EXPECT_EQ(rec.manifest.seed, 9u);
  ASSERT_EQ(rec.topics.size(), patterns.size());
  for (const auto& [topic, records] : seen) {
    ASSERT_TRUE(rec.topics.count(topic)) << topic;
    EXPECT_TRUE(rec.topics.at(topic) == records) << topic;
  }
}

TEST(Manifest, JsonRoundTrip) {
  RecordingManifest m;
  m.run_id = "007";
  m.scenario_name = "s";
  m.config_hash = "abc";
  m.seed = 3;
  m.dt = 0.05;
  m.topics = {{"/sim/clock", 10, "clock"}};
  m.end_reason = "timeout";
  m.created = "2020-01-01T00:00:00Z";
  const auto back = manifest_from_json(nlohmann::json(manifest_to_json(m)));
  EXPECT_EQ(back.run_id, m.run_id);
  EXPECT_EQ(back.topics, m.topics);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.dt, m.dt);
  EXPECT_EQ(back.integrity, "ok");
}

TEST(ExportCsv, ClockRows) {
  TempDir tmp;
  auto doc = testsupport::minimal_scenario();
  doc["stop"]["timeout_s"] = 0.3;
  record_run(doc, {"/sim/clock"}, tmp.path(), 1, 0.1);
  const auto rec = load_recording(tmp.path());
  const auto out = export_csv(rec, "/sim/clock", default_export_path(rec, "/sim/clock"));
  EXPECT_EQ(out, tmp / "export" / "__sim__clock.csv");
  EXPECT_EQ(testsupport::count_lines(out), 4u);
}

TEST(ExportCsv, ScanRowPerBeam) {
  TempDir tmp;
  auto doc = testsupport::minimal_scenario();
  doc["stop"]["timeout_s"] = 0.2;
  doc["sensors"] = nlohmann::json::array(
      {{{"kind", "range_scan"}, {"mount_entity", "ego"}, {"range", 20.0}, {"beam_count", 5}}});
  record_run(doc, {"/sensors/ego/scan"}, tmp.path(), 1, 0.1);
  const auto rec = load_recording(tmp.path());
  const auto out = export_csv(rec, "/sensors/ego/scan", tmp / "scan.csv");
  EXPECT_EQ(testsupport::count_lines(out), 11u);
  EXPECT_THROW(export_csv(rec, "/sim/nothing", tmp / "x.csv"), ExportError);
}

TEST(CaptureProperty, CompletenessAgainstIndependentSubscriber) {
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool = {"/sim/*", "/sim/clock", "/sensors/*/scan", "/sensors/ego/*",
                                         "/perception/*/detections", "/scenario/status", "/*/*/*"};
  std::uniform_int_distribution<int> count(0, 3);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 15; ++trial) {
    TempDir tmp;
    std::vector<std::string> patterns;
    for (int k = count(rng); k > 0; --k) patterns.push_back(pool[pick(rng)]);
    const auto spec = parse_scenario_json(testsupport::busy_scenario(0.5, 0.05));
    Bus bus;
    std::map<std::string, std::uint64_t> expected;
    bus.subscribe("/*", [&](const Message&) {});
    for (const auto& t : {"/*/*", "/*/*/*"}) {
      bus.subscribe(t, [&](const Message& m) {
        for (const auto& p : patterns) {
          if (topic_matches(p, m.topic)) {
            ++expected[m.topic];
            break;
          }
        }
      });
    }
    auto capture = start_capture(bus, patterns, tmp.path());
    run_scenario(spec, {}, bus);
    const auto m = finalize(*capture, {"r", spec.name, "h", 0, 0.05, "timeout"});
    std::map<std::string, std::uint64_t> got;
    for (const auto& t : m.topics) got[t.topic] = t.message_count;
    EXPECT_EQ(got, expected);
  }
}
