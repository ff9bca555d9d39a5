#include "simlane/recorder.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "simlane/codec.hpp"
#include "simlane/error.hpp"
#include "simlane/util.hpp"

namespace fs = std::filesystem;

namespace simlane {

std::string topic_file_stem(const std::string& topic) {
  std::string out;
  for (char c : topic) {
    if (c == '/') {
      out += "__";
    } else {
      out += c;
    }
  }
  return out;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t count_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t n = 0;
  char c;
  while (in.get(c)) {
    if (c == '\n') ++n;
  }
  return n;
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw StorageError("cannot create directory '" + dir.string() + "'" +
                       (ec ? ": " + ec.message() : std::string()));
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw StorageError("directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace

CaptureHandle::~CaptureHandle() {
  for (auto id : subscriptions_) bus_.unsubscribe(id);
}

void CaptureHandle::flush() {
  for (auto& [topic, f] : files_) f.stream.flush();
}

void CaptureHandle::on_message(const Message& msg) {
  if (finalized_) return;
  auto it = files_.find(msg.topic);
  if (it == files_.end()) {
    TopicFile f;
    f.path = dir_ / "topics" / (topic_file_stem(msg.topic) + ".jsonl");
    f.stream.open(f.path, std::ios::binary | std::ios::trunc);
    if (!f.stream) {
      write_error_ = "cannot open '" + f.path.string() + "'";
      return;
    }
    f.kind = payload_kind(msg.payload);
    it = files_.emplace(msg.topic, std::move(f)).first;
  } else if (msg.seq <= it->second.last_seq) {
    return;  // already written through another pattern
  }
  TopicFile& f = it->second;
  const nlohmann::json line{{"t", msg.sim_time}, {"seq", msg.seq}, {"payload", encode_payload(msg.payload)}};
  f.stream << line.dump() << '\n';
  f.last_seq = msg.seq;
  ++f.written;
}

std::unique_ptr<CaptureHandle> start_capture(Bus& bus, const std::vector<std::string>& patterns,
                                             const fs::path& out_dir) {
  for (const auto& p : patterns) {
    if (!is_valid_pattern(p)) throw UsageError("invalid topic pattern '" + p + "'");
  }
  ensure_writable(out_dir / "topics");
  std::unique_ptr<CaptureHandle> handle(new CaptureHandle(bus, out_dir));
  for (const auto& p : patterns) {
    handle->subscriptions_.push_back(
        bus.subscribe(p, [h = handle.get()](const Message& msg) { h->on_message(msg); }));
  }
  return handle;
}

nlohmann::ordered_json manifest_to_json(const RecordingManifest& m) {
  nlohmann::ordered_json topics = nlohmann::ordered_json::array();
  for (const auto& t : m.topics) {
    topics.push_back({{"topic", t.topic}, {"message_count", t.message_count}, {"payload_kind", t.payload_kind}});
  }
  return {{"run_id", m.run_id},
          {"scenario_name", m.scenario_name},
          {"config_hash", m.config_hash},
          {"seed", m.seed},
          {"dt", m.dt},
          {"topics", topics},
          {"end_reason", m.end_reason},
          {"integrity", m.integrity},
          {"created", m.created}};
}

RecordingManifest manifest_from_json(const nlohmann::json& j) {
  RecordingManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.scenario_name = j.at("scenario_name").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.dt = j.at("dt").get<double>();
  for (const auto& t : j.at("topics")) {
    m.topics.push_back({t.at("topic").get<std::string>(), t.at("message_count").get<std::uint64_t>(),
                        t.at("payload_kind").get<std::string>()});
  }
  m.end_reason = j.at("end_reason").get<std::string>();
  m.integrity = j.value("integrity", std::string("ok"));
  m.created = j.at("created").get<std::string>();
  return m;
}

RecordingManifest finalize(CaptureHandle& handle, const ManifestFields& fields) {
  for (auto id : handle.subscriptions_) handle.bus_.unsubscribe(id);
  handle.subscriptions_.clear();
  handle.finalized_ = true;

  RecordingManifest m;
  m.run_id = fields.run_id;
  m.scenario_name = fields.scenario_name;
  m.config_hash = fields.config_hash;
  m.seed = fields.seed;
  m.dt = fields.dt;
  m.end_reason = fields.end_reason;
  m.created = utc_timestamp();

  std::string problem = handle.write_error_;
  for (auto& [topic, f] : handle.files_) {
    f.stream.close();
    if (f.stream.fail() && problem.empty()) problem = "write failure on '" + f.path.string() + "'";
    const std::uint64_t lines = count_lines(f.path);
    if (lines != f.written && problem.empty()) {
      problem = "topic " + topic + ": " + std::to_string(lines) + " lines on disk, " +
                std::to_string(f.written) + " messages captured";
    }
    m.topics.push_back({topic, f.written, f.kind});
  }
  if (!problem.empty()) m.integrity = "corrupt";
  write_text_file(handle.dir_ / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  if (!problem.empty()) throw IntegrityError("recording '" + handle.dir_.string() + "' corrupt: " + problem);
  return m;
}

Recording load_recording(const fs::path& dir) {
  Recording rec;
  rec.directory = dir;
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw LoadError("no manifest.json in '" + dir.string() + "'");
  }
  try {
    rec.manifest = manifest_from_json(nlohmann::json::parse(read_text_file(manifest_path)));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("invalid manifest '" + manifest_path.string() + "': " + e.what());
  }

  for (const auto& summary : rec.manifest.topics) {
    const fs::path file = dir / "topics" / (topic_file_stem(summary.topic) + ".jsonl");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw LoadError("missing data file '" + file.string() + "'");
    auto& records = rec.topics[summary.topic];
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      try {
        const auto j = nlohmann::json::parse(line);
        Record r{j.at("t").get<double>(), j.at("seq").get<std::uint64_t>(),
                 decode_payload(summary.payload_kind, j.at("payload"))};
        if (r.seq != records.size()) throw LoadError("seq " + std::to_string(r.seq) + " out of order");
        if (!records.empty() && r.t < records.back().t) throw LoadError("time goes backwards");
        records.push_back(std::move(r));
      } catch (const std::exception& e) {
        throw LoadError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (records.size() != summary.message_count) {
      throw LoadError(file.string() + ": " + std::to_string(records.size()) + " records, manifest says " +
                      std::to_string(summary.message_count));
    }
  }
  return rec;
}

namespace {

using Row = std::vector<std::string>;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Row header_for(const std::string& kind) {
  if (kind == "clock") return {"t", "seq", "tick", "sim_time"};
  if (kind == "world_snapshot") {
    return {"t", "seq", "tick", "id", "path", "station", "speed", "target_speed", "x", "y", "heading", "length", "width"};
  }
  if (kind == "object_list") return {"t", "seq", "id", "x", "y", "heading", "speed", "length", "width"};
  if (kind == "range_scan") return {"t", "seq", "beam", "angle", "range", "max_range", "origin_x", "origin_y", "origin_heading"};
  if (kind == "collision_list") return {"t", "seq", "entity_a", "entity_b"};
  if (kind == "detected_objects") return {"t", "seq", "x", "y", "extent", "support"};
  if (kind == "scenario_status") return {"t", "seq", "tick", "kind", "detail"};
  throw ExportError("payload kind '" + kind + "' has no tabular form");
}

void append_rows(const Record& r, std::vector<Row>& rows) {
  const auto n = format_number;
  const std::string t = n(r.t);
  const std::string seq = std::to_string(r.seq);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Clock>) {
          rows.push_back({t, seq, std::to_string(p.tick), n(p.sim_time)});
        } else if constexpr (std::is_same_v<T, WorldSnapshot>) {
          for (const auto& e : p.entities) {
            rows.push_back({t, seq, std::to_string(p.tick), e.id, e.path_id, n(e.station), n(e.speed),
                            n(e.target_speed), n(e.pose.x), n(e.pose.y), n(e.pose.heading), n(e.length),
                            n(e.width)});
          }
        } else if constexpr (std::is_same_v<T, ObjectList>) {
          for (const auto& o : p.objects) {
            rows.push_back({t, seq, o.id, n(o.pose.x), n(o.pose.y), n(o.pose.heading), n(o.speed),
                            n(o.length), n(o.width)});
          }
        } else if constexpr (std::is_same_v<T, RangeScan>) {
          for (std::size_t i = 0; i < p.ranges.size(); ++i) {
            rows.push_back({t, seq, std::to_string(i), n(p.angles[i]), n(p.ranges[i]), n(p.max_range),
                            n(p.origin.x), n(p.origin.y), n(p.origin.heading)});
          }
        } else if constexpr (std::is_same_v<T, CollisionList>) {
          for (const auto& c : p.events) rows.push_back({t, seq, c.entity_a, c.entity_b});
        } else if constexpr (std::is_same_v<T, DetectedObjects>) {
          for (const auto& d : p.objects) {
            rows.push_back({t, seq, n(d.center.x), n(d.center.y), n(d.extent), std::to_string(d.support)});
          }
        } else {
          rows.push_back({t, seq, std::to_string(p.tick), p.kind, p.detail});
        }
      },
      r.payload);
}

}  // namespace

fs::path default_export_path(const Recording& recording, const std::string& topic) {
  return recording.directory / "export" / (topic_file_stem(topic) + ".csv");
}

fs::path export_csv(const Recording& recording, const std::string& topic, const fs::path& out_path) {
  auto records = recording.topics.find(topic);
  if (records == recording.topics.end()) {
    throw ExportError("topic '" + topic + "' not in recording '" + recording.directory.string() + "'");
  }
  std::string kind;
  for (const auto& t : recording.manifest.topics) {
    if (t.topic == topic) kind = t.payload_kind;
  }
  std::vector<Row> rows{header_for(kind)};
  for (const auto& r : records->second) append_rows(r, rows);

  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_field(row[i]);
    }
    out << '\n';
  }
  std::error_code ec;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path(), ec);
  try {
    write_text_file(out_path, out.str());
  } catch (const StorageError& e) {
    throw ExportError(e.what());
  }
  return out_path;
}

}  // namespace simlane
