#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiot/types.hpp"
#include "json.hpp"

namespace hiot::sim {

struct SensorRanges {
  double temperature_min = 18.0;
  double temperature_max = 26.0;
  double humidity_min = 30.0;
  double humidity_max = 60.0;
};

/// Scenario for one run of the traffic generator. All times in seconds.
struct SimConfig {
  std::uint64_t seed = 42;
  double duration = 3600.0;
  MoteId server_id = 1;
  std::vector<MoteId> benign_ids{2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<MoteId> malicious_ids{10, 11};
  double benign_interval_mean = 60.0;
  double benign_interval_jitter = 5.0;
  double attack_interval_mean = 0.5;
  double attack_interval_jitter = 0.2;
  double attack_start = 0.0;
  SensorRanges sensor_ranges;

  /// Throws Error(Config) naming the first violated invariant.
  void validate() const;
};

enum class EventKind : std::uint8_t { ClientSend = 0, ServerRecv = 1 };

struct TraceEvent {
  Millis time{0};
  MoteId sender = 0;
  MoteId receiver = 0;
  EventKind kind = EventKind::ClientSend;
  std::string payload;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  std::vector<TraceEvent> events;
  GroundTruth truth;
};

inline constexpr Millis kDeliveryDelay{2};

Trace simulate(const SimConfig& config);

/// One log line (no trailing newline) in the `MM:SS.mmm<TAB>ID:n<TAB>message` grammar.
std::string format_event(const TraceEvent& event);
std::string format_timestamp(Millis time);

void write_trace(std::span<const TraceEvent> events, const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& config);

}  // namespace hiot::sim
