#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simlane/messages.hpp"

namespace simlane {

/// `/`-separated segments of `[a-z0-9_]+`.
bool is_valid_topic(std::string_view topic);
/// As a topic, but `*` may stand for a whole segment.
bool is_valid_pattern(std::string_view pattern);
/// `*` matches exactly one segment.
bool topic_matches(std::string_view pattern, std::string_view topic);

using SubscriptionId = std::uint64_t;
using MessageHandler = std::function<void(const Message&)>;
using ServiceHandler = std::function<nlohmann::json(const nlohmann::json&)>;

/// Subscriber exception caught during fan-out.
struct DeliveryFailure {
  std::string topic;
  std::uint64_t seq = 0;
  SubscriptionId subscriber = 0;
  std::string what;
};

/// In-process publish/subscribe bus with request/response services.
///
/// Delivery is synchronous: `publish` returns after every matching
/// subscriber has seen the message. Handlers may publish re-entrantly. One
/// bus belongs to one run and is not thread-safe.
class Bus {
 public:
  Bus() = default;
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  /// Assigns the next per-topic seq and fans out. Returns the seq.
  /// Throws UsageError for an invalid topic or a sim_time going backwards.
  std::uint64_t publish(std::string_view topic, double sim_time, Payload payload);

  /// No replay: only messages published after this call are delivered.
  SubscriptionId subscribe(std::string_view pattern, MessageHandler handler);
  void unsubscribe(SubscriptionId id);

  /// Throws UsageError when a provider already exists.
  void provide(std::string_view service, ServiceHandler handler);
  void withdraw(std::string_view service);
  /// Throws ServiceUnavailable or ServiceError (provider message attached).
  nlohmann::json call(std::string_view service, const nlohmann::json& request);

  std::uint64_t published_count(std::string_view topic) const;
  /// Every topic published so far with its message count.
  const std::map<std::string, std::uint64_t, std::less<>>& topic_counts() const { return counts_; }
  const std::vector<DeliveryFailure>& failures() const { return failures_; }

 private:
  struct Subscriber {
    SubscriptionId id;
    std::string pattern;
    MessageHandler handler;
  };

  std::vector<Subscriber> subscribers_;
  std::map<std::string, std::uint64_t, std::less<>> counts_;
  std::map<std::string, double, std::less<>> last_time_;
  std::map<std::string, ServiceHandler, std::less<>> services_;
  std::vector<DeliveryFailure> failures_;
  SubscriptionId next_id_ = 1;
};

}  // namespace simlane
