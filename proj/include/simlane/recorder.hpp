#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "simlane/bus.hpp"

namespace simlane {

/// `/sensors/ego/scan` -> `__sensors__ego__scan`
std::string topic_file_stem(const std::string& topic);

struct TopicSummary {
  std::string topic;
  std::uint64_t message_count = 0;
  std::string payload_kind;

  friend bool operator==(const TopicSummary&, const TopicSummary&) = default;
};

struct RecordingManifest {
  std::string run_id;
  std::string scenario_name;
  std::string config_hash;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<TopicSummary> topics;  // sorted by topic
  std::string end_reason;
  std::string created;               // wall clock, manifest only
  std::string integrity = "ok";      // "ok" or "corrupt"
};

/// Manifest fields known only to the caller at the end of a run.
struct ManifestFields {
  std::string run_id;
  std::string scenario_name;
  std::string config_hash;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string end_reason;
};

/// Active capture of bus topics into `<dir>/topics/*.jsonl`. Each line is
/// `{"payload":...,"seq":N,"t":T}`.
class CaptureHandle {
 public:
  CaptureHandle(const CaptureHandle&) = delete;
  CaptureHandle& operator=(const CaptureHandle&) = delete;
  ~CaptureHandle();

  const std::filesystem::path& directory() const { return dir_; }
  /// Flushes open data files without closing them.
  void flush();

 private:
  friend std::unique_ptr<CaptureHandle> start_capture(Bus&, const std::vector<std::string>&,
                                                      const std::filesystem::path&);
  friend RecordingManifest finalize(CaptureHandle&, const ManifestFields&);

  struct TopicFile {
    std::ofstream stream;
    std::filesystem::path path;
    std::uint64_t written = 0;
    std::uint64_t last_seq = 0;
    std::string kind;
  };

  CaptureHandle(Bus& bus, std::filesystem::path dir) : bus_(bus), dir_(std::move(dir)) {}
  void on_message(const Message& msg);

  Bus& bus_;
  std::filesystem::path dir_;
  std::vector<SubscriptionId> subscriptions_;
  std::map<std::string, TopicFile> files_;
  std::string write_error_;
  bool finalized_ = false;
};

/// Creates `<out_dir>/topics` and subscribes to every pattern. A topic
/// matched by several patterns is written once. Throws StorageError if the
/// directory is not writable, UsageError on an invalid pattern.
std::unique_ptr<CaptureHandle> start_capture(Bus& bus, const std::vector<std::string>& patterns,
                                             const std::filesystem::path& out_dir);

/// Closes the data files, verifies line counts and writes `manifest.json`.
/// On a count mismatch the manifest is written with integrity "corrupt" and
/// IntegrityError is thrown.
RecordingManifest finalize(CaptureHandle& handle, const ManifestFields& fields);

struct Record {
  double t = 0.0;
  std::uint64_t seq = 0;
  Payload payload;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Recording {
  std::filesystem::path directory;
  RecordingManifest manifest;
  std::map<std::string, std::vector<Record>> topics;  // records in (t, seq) order
};

nlohmann::ordered_json manifest_to_json(const RecordingManifest& m);
RecordingManifest manifest_from_json(const nlohmann::json& j);

/// Throws LoadError for a missing or invalid manifest, or for an
/// unparseable line (message names file and line number).
Recording load_recording(const std::filesystem::path& dir);

/// Writes one CSV for `topic`; returns the path written. Lists expand to one
/// row per element (one row per beam for scans). Throws ExportError for an
/// unknown topic.
std::filesystem::path export_csv(const Recording& recording, const std::string& topic,
                                 const std::filesystem::path& out_path);
/// `<dir>/export/<stem>.csv`
std::filesystem::path default_export_path(const Recording& recording, const std::string& topic);

}  // namespace simlane
