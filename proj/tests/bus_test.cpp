#include <gtest/gtest.h>

#include <random>

#include "simlane/bus.hpp"
#include "simlane/error.hpp"
#include "simlane/runner.hpp"
#include "support.hpp"

using namespace simlane;

namespace {

Payload clock_at(std::int64_t tick, double t) { return Clock{tick, t}; }

}  // namespace

TEST(TopicGrammar, ValidAndInvalid) {
  EXPECT_TRUE(is_valid_topic("/sim/clock"));
  EXPECT_TRUE(is_valid_topic("/sensors/ego_1/scan"));
  EXPECT_TRUE(is_valid_topic("/a"));
  for (const char* bad : {"", "/", "sim/clock", "/sim//clock", "/sim/clock/", "/Sim/clock", "/sim/*", "/sim-x",
                          "/sim clock"}) {
    EXPECT_FALSE(is_valid_topic(bad)) << bad;
  }
  EXPECT_TRUE(is_valid_pattern("/sim/*"));
  EXPECT_TRUE(is_valid_pattern("/*/*/scan"));
  EXPECT_FALSE(is_valid_pattern("/sim/cl*"));
  EXPECT_FALSE(is_valid_pattern("/sim/**"));
}

TEST(TopicGrammar, WildcardMatchesExactlyOneSegment) {
  EXPECT_TRUE(topic_matches("/sensors/*/scan", "/sensors/ego/scan"));
  EXPECT_FALSE(topic_matches("/sensors/*/scan", "/sensors/ego/objects"));
  EXPECT_FALSE(topic_matches("/sensors/*/scan", "/sensors/scan"));
  EXPECT_FALSE(topic_matches("/sensors/*/scan", "/sensors/a/b/scan"));
  EXPECT_TRUE(topic_matches("/sim/*", "/sim/clock"));
  EXPECT_FALSE(topic_matches("/sim/*", "/sim"));
  EXPECT_FALSE(topic_matches("/sim/*", "/sim/a/b"));
  EXPECT_TRUE(topic_matches("/sim/clock", "/sim/clock"));
}

TEST(TopicGrammarProperty, WildcardSegmentSemantics) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words = {"a", "b", "sim", "x_1"};
  std::uniform_int_distribution<int> len(1, 4);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> t(len(rng)), p(len(rng));
    for (auto& s : t) s = words[pick(rng)];
    for (auto& s : p) s = coin(rng) == 0 ? "*" : words[pick(rng)];
    std::string topic, pattern;
    for (auto& s : t) topic += "/" + s;
    for (auto& s : p) pattern += "/" + s;
    bool expect = t.size() == p.size();
    for (std::size_t i = 0; expect && i < t.size(); ++i) expect = p[i] == "*" || p[i] == t[i];
    EXPECT_EQ(topic_matches(pattern, topic), expect) << pattern << " vs " << topic;
  }
}

TEST(Bus, DeliversOnceToMatchingSubscriber) {
  Bus bus;
  std::vector<Message> got;
  bus.subscribe("/sim/objects", [&](const Message& m) { got.push_back(m); });
  bus.publish("/sim/objects", 0.1, WorldSnapshot{1, 0.1, {}});
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].topic, "/sim/objects");
  EXPECT_EQ(got[0].seq, 0u);
  EXPECT_EQ(payload_kind(got[0].payload), "world_snapshot");
}

TEST(Bus, SeqAssignedWithoutSubscribers) {
  Bus bus;
  EXPECT_EQ(bus.publish("/sim/clock", 0.0, clock_at(0, 0)), 0u);
  EXPECT_EQ(bus.publish("/sim/clock", 0.1, clock_at(1, 0.1)), 1u);
  EXPECT_EQ(bus.published_count("/sim/clock"), 2u);
  EXPECT_EQ(bus.published_count("/sim/other"), 0u);
}

TEST(Bus, InOrderSeq) {
  Bus bus;
  std::vector<std::uint64_t> seqs;
  bus.subscribe("/sim/clock", [&](const Message& m) { seqs.push_back(m.seq); });
  for (int i = 0; i < 3; ++i) bus.publish("/sim/clock", i * 0.1, clock_at(i, i * 0.1));
  EXPECT_EQ(seqs, (std::vector<std::uint64_t>{0, 1, 2}));
}

TEST(Bus, NoReplayForLateSubscriber) {
  Bus bus;
  for (int i = 0; i < 5; ++i) bus.publish("/sim/clock", i, clock_at(i, i));
  std::vector<std::uint64_t> seqs;
  bus.subscribe("/sim/*", [&](const Message& m) { seqs.push_back(m.seq); });
  bus.publish("/sim/clock", 5, clock_at(5, 5));
  EXPECT_EQ(seqs, (std::vector<std::uint64_t>{5}));
}

TEST(Bus, InvalidTopicOrPatternIsUsageError) {
  Bus bus;
  EXPECT_THROW(bus.publish("sim/clock", 0, clock_at(0, 0)), UsageError);
  EXPECT_THROW(bus.publish("/sim/*", 0, clock_at(0, 0)), UsageError);
  EXPECT_THROW(bus.subscribe("/sim/c*", [](const Message&) {}), UsageError);
}

TEST(Bus, TimeGoingBackwardsIsUsageError) {
  Bus bus;
  bus.publish("/sim/clock", 1.0, clock_at(10, 1.0));
  bus.publish("/sim/clock", 1.0, clock_at(10, 1.0));
  EXPECT_THROW(bus.publish("/sim/clock", 0.5, clock_at(5, 0.5)), UsageError);
  // Per topic: another topic may start earlier.
  EXPECT_NO_THROW(bus.publish("/sim/other", 0.0, clock_at(0, 0)));
}

TEST(Bus, UnsubscribeStopsDelivery) {
  Bus bus;
  int n = 0;
  const auto id = bus.subscribe("/a", [&](const Message&) { ++n; });
  bus.publish("/a", 0, clock_at(0, 0));
  bus.unsubscribe(id);
  bus.publish("/a", 0, clock_at(0, 0));
  EXPECT_EQ(n, 1);
}

TEST(Bus, FailingSubscriberDoesNotBlockOthers) {
  Bus bus;
  int before = 0, after = 0;
  bus.subscribe("/a", [&](const Message&) { ++before; });
  const auto bad = bus.subscribe("/a", [](const Message&) { throw std::runtime_error("boom"); });
  bus.subscribe("/a", [&](const Message&) { ++after; });
  bus.publish("/a", 0, clock_at(0, 0));
  bus.publish("/a", 1, clock_at(1, 1));
  EXPECT_EQ(before, 2);
  EXPECT_EQ(after, 2);
  ASSERT_EQ(bus.failures().size(), 2u);
  EXPECT_EQ(bus.failures()[0].subscriber, bad);
  EXPECT_EQ(bus.failures()[1].seq, 1u);
  EXPECT_EQ(bus.failures()[0].what, "boom");
}

TEST(Bus, ReentrantPublishDeliversInOrder) {
  Bus bus;
  std::vector<std::string> log;
  bus.subscribe("/in", [&](const Message& m) {
    log.push_back("in" + std::to_string(m.seq));
    bus.publish("/out", m.sim_time, clock_at(0, m.sim_time));
  });
  bus.subscribe("/out", [&](const Message& m) { log.push_back("out" + std::to_string(m.seq)); });
  bus.publish("/in", 0, clock_at(0, 0));
  bus.publish("/in", 1, clock_at(1, 1));
  EXPECT_EQ(log, (std::vector<std::string>{"in0", "out0", "in1", "out1"}));
}

TEST(BusProperty, ExactlyOnceInOrderPerSubscriber) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> topics = {"/sim/clock", "/sim/objects", "/sensors/ego/scan", "/sensors/npc/scan"};
  const std::vector<std::string> patterns = {"/sim/*", "/sensors/*/scan", "/sim/clock", "/*/*", "/*/ego/scan"};
  for (int trial = 0; trial < 50; ++trial) {
    Bus bus;
    std::vector<std::map<std::string, std::vector<std::uint64_t>>> got(patterns.size());
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      bus.subscribe(patterns[k], [&got, k](const Message& m) { got[k][m.topic].push_back(m.seq); });
    }
    std::uniform_int_distribution<std::size_t> pick(0, topics.size() - 1);
    std::map<std::string, std::uint64_t> sent;
    for (int i = 0; i < 200; ++i) {
      const auto& t = topics[pick(rng)];
      bus.publish(t, i * 0.01, clock_at(i, i * 0.01));
      ++sent[t];
    }
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      for (const auto& t : topics) {
        std::vector<std::uint64_t> expect;
        if (topic_matches(patterns[k], t)) {
          for (std::uint64_t s = 0; s < sent[t]; ++s) expect.push_back(s);
        }
        EXPECT_EQ(got[k][t], expect) << patterns[k] << " " << t;
      }
    }
  }
}

TEST(BusServices, CallProviderAndErrors) {
  Bus bus;
  EXPECT_THROW(bus.call("nope", {}), ServiceUnavailable);
  int calls = 0;
  bus.provide("echo", [&](const nlohmann::json& req) {
    ++calls;
    return nlohmann::json{{"n", calls}, {"req", req}};
  });
  EXPECT_THROW(bus.provide("echo", [](const nlohmann::json&) { return nlohmann::json{}; }), UsageError);
  const auto a = bus.call("echo", {{"x", 1}});
  const auto b = bus.call("echo", {{"x", 2}});
  EXPECT_EQ(a["n"], 1);
  EXPECT_EQ(b["n"], 2);
  EXPECT_EQ(b["req"]["x"], 2);
  bus.provide("fail", [](const nlohmann::json&) -> nlohmann::json { throw std::runtime_error("provider broke"); });
  try {
    bus.call("fail", {});
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_NE(std::string(e.what()).find("provider broke"), std::string::npos);
  }
  bus.withdraw("echo");
  EXPECT_THROW(bus.call("echo", {}), ServiceUnavailable);
}

TEST(BusServices, ScenarioExecuteReturnsRunResult) {
  testsupport::TempDir tmp;
  const auto file = tmp / "s.json";
  testsupport::spit(file, testsupport::minimal_scenario("svc").dump());
  Bus bus;
  provide_scenario_service(bus);
  const auto r1 = bus.call(kExecuteService, {{"scenario", file.string()}, {"dt", 0.1}});
  EXPECT_EQ(r1["scenario_name"], "svc");
  EXPECT_EQ(r1["end_reason"], "timeout");
  EXPECT_EQ(r1["ticks"], 100);
  const auto r2 = bus.call(kExecuteService, {{"document", testsupport::minimal_scenario("inline")}, {"dt", 0.5}});
  EXPECT_EQ(r2["scenario_name"], "inline");
  EXPECT_EQ(r2["ticks"], 20);
  EXPECT_THROW(bus.call(kExecuteService, {{"scenario", (tmp / "missing.json").string()}}), ServiceError);
}
