#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "hiot/error.hpp"
#include "hiot/parser.hpp"
#include "hiot/sim.hpp"
#include "test_support.hpp"

using namespace hiot;
using sim::EventKind;
using sim::SimConfig;

namespace {

std::map<MoteId, std::vector<std::int64_t>> send_times(const sim::Trace& trace) {
  std::map<MoteId, std::vector<std::int64_t>> out;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::ClientSend) out[e.sender].push_back(e.time.count());
  }
  return out;
}

SimConfig ten_minute_config() {
  SimConfig c;
  c.seed = 42;
  c.duration = 600;
  c.benign_ids = {2, 3, 4, 5, 6, 7, 8, 9};
  c.malicious_ids = {10, 11};
  return c;
}

void expect_config_error(const SimConfig& c, const std::string& fragment) {
  try {
    c.validate();
    FAIL() << "expected a config error mentioning " << fragment;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Sim, IdenticalConfigGivesIdenticalTrace) {
  const auto a = sim::simulate(ten_minute_config());
  const auto b = sim::simulate(ten_minute_config());
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.truth, b.truth);
  auto other = ten_minute_config();
  other.seed = 43;
  EXPECT_NE(sim::simulate(other).events, a.events);
}

TEST(Sim, ZeroJitterBenignCountIsTenOrEleven) {
  auto c = ten_minute_config();
  c.benign_interval_jitter = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    c.seed = seed;
    const auto times = send_times(sim::simulate(c));
    for (MoteId id : c.benign_ids) {
      const auto& t = times.at(id);
      // closed form: sends at t0 + 60 s * k while <= 600 s
      const auto expected = static_cast<std::size_t>((600000 - t.front()) / 60000 + 1);
      EXPECT_EQ(t.size(), expected);
      EXPECT_TRUE(t.size() == 10 || t.size() == 11) << t.size();
    }
  }
}

TEST(Sim, NoAttackersMeansOnlyBenignLabelsAndLongGaps) {
  auto c = ten_minute_config();
  c.malicious_ids.clear();
  const auto trace = sim::simulate(c);
  for (const auto& [mote, label] : trace.truth) EXPECT_EQ(label, Label::Benign);
  EXPECT_EQ(trace.truth.size(), c.benign_ids.size());
  const auto min_gap = static_cast<std::int64_t>((c.benign_interval_mean - c.benign_interval_jitter) * 1000);
  for (const auto& [mote, t] : send_times(trace)) {
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GE(t[i] - t[i - 1], min_gap);
  }
}

TEST(Sim, BehaviorSeparationWithZeroJitter) {
  auto c = ten_minute_config();
  c.benign_interval_jitter = 0.0;
  c.attack_interval_jitter = 0.0;
  c.attack_start = 120.0;
  const auto trace = sim::simulate(c);
  for (const auto& [mote, t] : send_times(trace)) {
    const bool malicious = trace.truth.at(mote) == Label::Malicious;
    for (std::size_t i = 1; i < t.size(); ++i) {
      const auto gap = t[i] - t[i - 1];
      if (malicious && t[i - 1] >= 120000) {
        EXPECT_EQ(gap, 500);
      } else {
        EXPECT_EQ(gap, 60000);
      }
    }
  }
}

TEST(Sim, EventsSortedAndEverySendMirroredTwoMsLater) {
  const auto trace = sim::simulate(ten_minute_config());
  ASSERT_FALSE(trace.events.empty());
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    const auto& a = trace.events[i - 1];
    const auto& b = trace.events[i];
    EXPECT_TRUE(a.time < b.time || (a.time == b.time && (a.sender < b.sender ||
                                                         (a.sender == b.sender && a.kind <= b.kind))));
  }
  std::multiset<std::tuple<std::int64_t, MoteId, std::string>> sends;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::ClientSend) {
      sends.insert({e.time.count(), e.sender, e.payload});
    } else {
      auto it = sends.find({e.time.count() - 2, e.sender, e.payload});
      ASSERT_NE(it, sends.end()) << "recv without a matching send";
      sends.erase(it);
    }
  }
  EXPECT_TRUE(sends.empty());
}

TEST(Sim, GroundTruthCoversExactlyClientMotes) {
  const auto c = ten_minute_config();
  const auto trace = sim::simulate(c);
  EXPECT_EQ(trace.truth.size(), 10u);
  EXPECT_FALSE(trace.truth.contains(c.server_id));
  EXPECT_EQ(trace.truth.at(10), Label::Malicious);
  EXPECT_EQ(trace.truth.at(2), Label::Benign);
}

TEST(Sim, PayloadWithinSensorRanges) {
  const auto trace = sim::simulate(ten_minute_config());
  for (const auto& e : trace.events) {
    double temp = 0, hum = 0;
    ASSERT_EQ(std::sscanf(e.payload.c_str(), "temp=%lf,hum=%lf", &temp, &hum), 2) << e.payload;
    EXPECT_GE(temp, 18.0);
    EXPECT_LE(temp, 26.0);
    EXPECT_GE(hum, 30.0);
    EXPECT_LE(hum, 60.0);
  }
}

TEST(Sim, InvalidConfigsNameTheViolatedInvariant) {
  auto c = ten_minute_config();
  c.benign_ids.push_back(1);
  expect_config_error(c, "server_id");
  c = ten_minute_config();
  c.malicious_ids.push_back(3);
  expect_config_error(c, "not unique");
  c = ten_minute_config();
  c.benign_ids.push_back(0);
  expect_config_error(c, "positive");
  c = ten_minute_config();
  c.attack_interval_jitter = 0.5;
  expect_config_error(c, "attack_interval_jitter");
  c = ten_minute_config();
  c.benign_interval_mean = 0.4;
  c.benign_interval_jitter = 0.1;
  expect_config_error(c, "exceed");
  c = ten_minute_config();
  c.attack_start = 601;
  expect_config_error(c, "attack_start");
  c = ten_minute_config();
  c.benign_interval_jitter = -1;
  expect_config_error(c, "benign_interval_jitter");
  EXPECT_THROW(sim::simulate(c), Error);
}

TEST(Sim, TimestampFormatWrapsPastAnHour) {
  EXPECT_EQ(sim::format_timestamp(Millis{0}), "00:00.000");
  EXPECT_EQ(sim::format_timestamp(Millis{60000}), "01:00.000");
  EXPECT_EQ(sim::format_timestamp(Millis{73 * 60000 + 5120}), "73:05.120");
}

TEST(Sim, LogLineGrammar) {
  sim::TraceEvent send{Millis{65250}, 2, 1, EventKind::ClientSend, "temp=22.5,hum=45.2"};
  EXPECT_EQ(sim::format_event(send), "01:05.250\tID:2\tDATA send to 1 'temp=22.5,hum=45.2'");
  sim::TraceEvent recv{Millis{65252}, 2, 1, EventKind::ServerRecv, "temp=22.5,hum=45.2"};
  EXPECT_EQ(sim::format_event(recv), "01:05.252\tID:1\tDATA recv from 2 'temp=22.5,hum=45.2'");
}

TEST(Sim, TraceAndTruthFilesRoundTrip) {
  const auto dir = hiot::testing::temp_dir("sim_files");
  const auto trace = sim::simulate(ten_minute_config());
  sim::write_trace(trace.events, dir / "trace.log");
  sim::write_ground_truth(trace.truth, dir / "gt.csv");

  std::ifstream in(dir / "gt.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "mote_id,label");
  EXPECT_EQ(sim::read_ground_truth(dir / "gt.csv"), trace.truth);

  const auto parsed = parser::parse_trace_file(dir / "trace.log");
  ASSERT_EQ(parsed.records.size(), trace.events.size());
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    EXPECT_EQ(parsed.records[i].time, e.time);
    EXPECT_EQ(parsed.records[i].mote, e.kind == EventKind::ClientSend ? e.sender : e.receiver);
  }
}

TEST(Sim, WriteToMissingDirectoryIsIoError) {
  try {
    sim::write_ground_truth({}, "/nonexistent-dir/gt.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/gt.csv"), std::string::npos);
  }
}

TEST(Sim, ConfigJsonUsesFieldNamesExactly) {
  const auto j = nlohmann::json::parse(R"({"seed": 7, "duration": 120, "server_id": 1,
      "benign_ids": [2, 3], "malicious_ids": [4], "attack_start": 30,
      "sensor_ranges": {"temperature_min": 20, "temperature_max": 21, "humidity_min": 40, "humidity_max": 41}})");
  const auto c = sim::sim_config_from_json(j);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.benign_ids, (std::vector<MoteId>{2, 3}));
  EXPECT_DOUBLE_EQ(c.attack_start, 30.0);
  EXPECT_DOUBLE_EQ(c.benign_interval_mean, 60.0);
  EXPECT_DOUBLE_EQ(c.sensor_ranges.temperature_max, 21.0);
  EXPECT_EQ(sim::sim_config_from_json(sim::to_json(c)).benign_ids, c.benign_ids);

  EXPECT_THROW(sim::sim_config_from_json(nlohmann::json::parse(R"({"sed": 1})")), Error);
  EXPECT_THROW(sim::sim_config_from_json(nlohmann::json::parse(R"({"benign_ids": [-2]})")), Error);
  EXPECT_THROW(sim::sim_config_from_json(nlohmann::json::parse(R"({"duration": "long"})")), Error);
}
