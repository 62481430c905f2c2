#include "hiot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "hiot/error.hpp"
#include "hiot/seed.hpp"
#include "json_util.hpp"

namespace hiot::sim {
namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, what);
}

Millis to_millis(double seconds) { return Millis{std::llround(seconds * 1000.0)}; }

struct Cadence {
  double mean;
  double jitter;
};

Millis draw_gap(Rng& rng, Cadence c) {
  const double gap = uniform(rng, c.mean - c.jitter, c.mean + c.jitter);
  return std::max(Millis{1}, to_millis(gap));
}

std::string synth_payload(Rng& rng, const SensorRanges& r) {
  const double temp = uniform(rng, r.temperature_min, r.temperature_max);
  const double hum = uniform(rng, r.humidity_min, r.humidity_max);
  char buf[64];
  std::snprintf(buf, sizeof buf, "temp=%.1f,hum=%.1f", temp, hum);
  return buf;
}

void emit_mote(const SimConfig& config, MoteId mote, bool malicious, std::vector<TraceEvent>& out) {
  Rng rng(derive_seed(config.seed, "sim/mote/" + std::to_string(mote)));
  const Cadence benign{config.benign_interval_mean, config.benign_interval_jitter};
  const Cadence attack{config.attack_interval_mean, config.attack_interval_jitter};
  const Millis duration = to_millis(config.duration);
  const Millis attack_start = to_millis(config.attack_start);

  auto cadence_at = [&](Millis t) { return malicious && t >= attack_start ? attack : benign; };

  Millis t = to_millis(uniform(rng, 0.0, cadence_at(Millis{0}).mean));
  while (t <= duration) {
    std::string payload = synth_payload(rng, config.sensor_ranges);
    out.push_back({t, mote, config.server_id, EventKind::ClientSend, payload});
    out.push_back({t + kDeliveryDelay, mote, config.server_id, EventKind::ServerRecv,
                   std::move(payload)});
    t += draw_gap(rng, cadence_at(t));
  }
}

}  // namespace

void SimConfig::validate() const {
  check(std::isfinite(duration) && duration > 0.0, "duration must be positive");
  check(server_id >= 1, "server_id must be a positive mote id");
  std::set<MoteId> seen{server_id};
  for (const auto* ids : {&benign_ids, &malicious_ids}) {
    for (MoteId id : *ids) {
      check(id >= 1, "mote ids must be positive");
      check(id != server_id, "server_id " + std::to_string(server_id) + " appears in a node list");
      check(seen.insert(id).second, "mote id " + std::to_string(id) + " is not unique");
    }
  }
  check(!benign_ids.empty() || !malicious_ids.empty(), "at least one client mote is required");
  check(benign_interval_mean > 0.0, "benign_interval_mean must be > 0");
  check(attack_interval_mean > 0.0, "attack_interval_mean must be > 0");
  check(benign_interval_jitter >= 0.0 && benign_interval_jitter < benign_interval_mean,
        "benign_interval_jitter must satisfy 0 <= jitter < benign_interval_mean");
  check(attack_interval_jitter >= 0.0 && attack_interval_jitter < attack_interval_mean,
        "attack_interval_jitter must satisfy 0 <= jitter < attack_interval_mean");
  check(attack_start >= 0.0 && attack_start <= duration,
        "attack_start must satisfy 0 <= attack_start <= duration");
  check(benign_interval_mean > attack_interval_mean,
        "benign_interval_mean must exceed attack_interval_mean");
  const auto& r = sensor_ranges;
  check(r.temperature_min <= r.temperature_max, "sensor_ranges temperature_min > temperature_max");
  check(r.humidity_min <= r.humidity_max, "sensor_ranges humidity_min > humidity_max");
}

Trace simulate(const SimConfig& config) {
  config.validate();
  Trace trace;
  for (MoteId id : config.benign_ids) {
    emit_mote(config, id, false, trace.events);
    trace.truth[id] = Label::Benign;
  }
  for (MoteId id : config.malicious_ids) {
    emit_mote(config, id, true, trace.events);
    trace.truth[id] = Label::Malicious;
  }
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) {
                     if (a.time != b.time) return a.time < b.time;
                     if (a.sender != b.sender) return a.sender < b.sender;
                     return a.kind < b.kind;
                   });
  return trace;
}

std::string format_timestamp(Millis time) {
  const long long ms = time.count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld.%03lld", ms / 60000, (ms / 1000) % 60, ms % 1000);
  return buf;
}

std::string format_event(const TraceEvent& e) {
  std::string line = format_timestamp(e.time);
  if (e.kind == EventKind::ClientSend) {
    line += "\tID:" + std::to_string(e.sender) + "\tDATA send to " + std::to_string(e.receiver);
  } else {
    line += "\tID:" + std::to_string(e.receiver) + "\tDATA recv from " + std::to_string(e.sender);
  }
  line += " '" + e.payload + "'";
  return line;
}

void write_trace(std::span<const TraceEvent> events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  for (const auto& e : events) out << format_event(e) << '\n';
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "mote_id,label\n";
  for (const auto& [mote, label] : truth) {
    out << mote << ',' << static_cast<int>(label) << '\n';
  }
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "mote_id,label") {
    throw Error(ErrorKind::Data, path.string() + ": expected header 'mote_id,label'");
  }
  GroundTruth truth;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    unsigned long mote = 0;
    int label = -1;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lu,%d%c", &mote, &label, &tail) != 2 || mote == 0 ||
        (label != 0 && label != 1)) {
      throw Error(ErrorKind::Data,
                  path.string() + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
    }
    if (!truth.emplace(static_cast<MoteId>(mote), static_cast<Label>(label)).second) {
      throw Error(ErrorKind::Data, path.string() + ": duplicate mote " + std::to_string(mote));
    }
  }
  return truth;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  detail::require_object(j, "sim config");
  detail::reject_unknown_keys(
      j,
      {"seed", "duration", "server_id", "benign_ids", "malicious_ids", "benign_interval_mean",
       "benign_interval_jitter", "attack_interval_mean", "attack_interval_jitter", "attack_start",
       "sensor_ranges"},
      "sim config");
  SimConfig c;
  detail::read_field(j, "seed", c.seed);
  detail::read_field(j, "duration", c.duration);
  detail::read_field(j, "server_id", c.server_id);
  detail::read_field(j, "benign_ids", c.benign_ids);
  detail::read_field(j, "malicious_ids", c.malicious_ids);
  detail::read_field(j, "benign_interval_mean", c.benign_interval_mean);
  detail::read_field(j, "benign_interval_jitter", c.benign_interval_jitter);
  detail::read_field(j, "attack_interval_mean", c.attack_interval_mean);
  detail::read_field(j, "attack_interval_jitter", c.attack_interval_jitter);
  detail::read_field(j, "attack_start", c.attack_start);
  if (auto it = j.find("sensor_ranges"); it != j.end()) {
    detail::require_object(*it, "sensor_ranges");
    detail::reject_unknown_keys(
        *it, {"temperature_min", "temperature_max", "humidity_min", "humidity_max"},
        "sensor_ranges");
    detail::read_field(*it, "temperature_min", c.sensor_ranges.temperature_min);
    detail::read_field(*it, "temperature_max", c.sensor_ranges.temperature_max);
    detail::read_field(*it, "humidity_min", c.sensor_ranges.humidity_min);
    detail::read_field(*it, "humidity_max", c.sensor_ranges.humidity_max);
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const SimConfig& c) {
  return {
      {"seed", c.seed},
      {"duration", c.duration},
      {"server_id", c.server_id},
      {"benign_ids", c.benign_ids},
      {"malicious_ids", c.malicious_ids},
      {"benign_interval_mean", c.benign_interval_mean},
      {"benign_interval_jitter", c.benign_interval_jitter},
      {"attack_interval_mean", c.attack_interval_mean},
      {"attack_interval_jitter", c.attack_interval_jitter},
      {"attack_start", c.attack_start},
      {"sensor_ranges",
       {{"temperature_min", c.sensor_ranges.temperature_min},
        {"temperature_max", c.sensor_ranges.temperature_max},
        {"humidity_min", c.sensor_ranges.humidity_min},
        {"humidity_max", c.sensor_ranges.humidity_max}}},
  };
}

}  // namespace hiot::sim
