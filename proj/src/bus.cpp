#include "simlane/bus.hpp"

#include <algorithm>

#include "simlane/error.hpp"

namespace simlane {

namespace {

std::vector<std::string_view> split_segments(std::string_view s) {
  std::vector<std::string_view> out;
  s.remove_prefix(1);  // leading '/'
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('/', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool valid_segment(std::string_view seg, bool allow_wildcard) {
  if (seg.empty()) return false;
  if (allow_wildcard && seg == "*") return true;
  return std::all_of(seg.begin(), seg.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool valid_name(std::string_view s, bool allow_wildcard) {
  if (s.size() < 2 || s.front() != '/') return false;
  const auto segs = split_segments(s);
  return std::all_of(segs.begin(), segs.end(),
                     [&](std::string_view seg) { return valid_segment(seg, allow_wildcard); });
}

}  // namespace

bool is_valid_topic(std::string_view topic) { return valid_name(topic, false); }
bool is_valid_pattern(std::string_view pattern) { return valid_name(pattern, true); }

bool topic_matches(std::string_view pattern, std::string_view topic) {
  if (!is_valid_pattern(pattern) || !is_valid_topic(topic)) return false;
  const auto p = split_segments(pattern);
  const auto t = split_segments(topic);
  if (p.size() != t.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != "*" && p[i] != t[i]) return false;
  }
  return true;
}

std::uint64_t Bus::publish(std::string_view topic, double sim_time, Payload payload) {
  if (!is_valid_topic(topic)) throw UsageError("invalid topic '" + std::string(topic) + "'");
  auto last = last_time_.find(topic);
  if (last != last_time_.end() && sim_time < last->second) {
    throw UsageError("sim_time went backwards on topic '" + std::string(topic) + "'");
  }
  last_time_[std::string(topic)] = sim_time;

  auto& count = counts_[std::string(topic)];
  const Message msg{sim_time, count++, std::string(topic), std::move(payload)};

  // Snapshot: handlers may subscribe or publish while we iterate.
  std::vector<SubscriptionId> targets;
  for (const auto& s : subscribers_) {
    if (topic_matches(s.pattern, topic)) targets.push_back(s.id);
  }
  for (SubscriptionId id : targets) {
    auto it = std::find_if(subscribers_.begin(), subscribers_.end(),
                           [id](const Subscriber& s) { return s.id == id; });
    if (it == subscribers_.end()) continue;
    MessageHandler handler = it->handler;
    try {
      handler(msg);
    } catch (const std::exception& e) {
      failures_.push_back({msg.topic, msg.seq, id, e.what()});
    }
  }
  return msg.seq;
}

SubscriptionId Bus::subscribe(std::string_view pattern, MessageHandler handler) {
  if (!is_valid_pattern(pattern)) {
    throw UsageError("invalid topic pattern '" + std::string(pattern) + "'");
  }
  const SubscriptionId id = next_id_++;
  subscribers_.push_back({id, std::string(pattern), std::move(handler)});
  return id;
}

void Bus::unsubscribe(SubscriptionId id) {
  std::erase_if(subscribers_, [id](const Subscriber& s) { return s.id == id; });
}

void Bus::provide(std::string_view service, ServiceHandler handler) {
  if (service.empty()) throw UsageError("empty service name");
  if (!services_.emplace(std::string(service), std::move(handler)).second) {
    throw UsageError("service '" + std::string(service) + "' already has a provider");
  }
}

void Bus::withdraw(std::string_view service) {
  if (auto it = services_.find(service); it != services_.end()) services_.erase(it);
}

nlohmann::json Bus::call(std::string_view service, const nlohmann::json& request) {
  auto it = services_.find(service);
  if (it == services_.end()) {
    throw ServiceUnavailable("no provider for service '" + std::string(service) + "'");
  }
  ServiceHandler handler = it->second;
  try {
    return handler(request);
  } catch (const std::exception& e) {
    throw ServiceError("service '" + std::string(service) + "' failed: " + e.what());
  }
}

std::uint64_t Bus::published_count(std::string_view topic) const {
  auto it = counts_.find(topic);
  return it == counts_.end() ? 0 : it->second;
}

}  // namespace simlane
