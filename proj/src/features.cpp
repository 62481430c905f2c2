#include "hiot/features.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>

#include "csv_util.hpp"
#include "hiot/error.hpp"

namespace hiot::features {
namespace {

constexpr std::string_view kHeader = "event_index,mote,time,interval,psi,avg_psi,previous_sender,label";

void require_ordered(double ts, double previous) {
  if (ts < previous) {
    throw Error(ErrorKind::Data, "send events out of order: " + std::to_string(ts) + " < " +
                                     std::to_string(previous));
  }
}

double ms_to_seconds(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

}  // namespace

std::array<double, kModelFeatures> model_inputs(const FeatureRow& row) {
  return {static_cast<double>(row.mote), row.interval, row.psi, row.avg_psi,
          static_cast<double>(row.previous_sender)};
}

double interval(double ts, double previous_send_time) {
  require_ordered(ts, previous_send_time);
  return ts - previous_send_time;
}

double psi_same_node(double ts, double pst_same_node) {
  require_ordered(ts, pst_same_node);
  return ts - pst_same_node;
}

double avg_psi_same_node(std::span<const double> psi_history) {
  if (psi_history.empty()) {
    throw Error(ErrorKind::Data, "avg_psi is undefined for an empty psi history");
  }
  double sum = 0.0;
  for (double v : psi_history) sum += v;
  return sum / static_cast<double>(psi_history.size());
}

MoteId previous_sender(std::span<const parser::LogRecord> send_events, std::size_t index) {
  if (index >= send_events.size()) {
    throw Error(ErrorKind::Data, "previous_sender index " + std::to_string(index) +
                                     " out of range for " + std::to_string(send_events.size()) +
                                     " events");
  }
  return index == 0 ? kNoSender : send_events[index - 1].mote;
}

std::vector<FeatureRow> extract_features(std::span<const parser::LogRecord> send_events,
                                         const GroundTruth& truth) {
  struct MoteState {
    std::int64_t last_ms = 0;
    std::int64_t psi_sum_ms = 0;
    std::int64_t count = 0;
  };
  std::unordered_map<MoteId, MoteState> state;
  std::vector<FeatureRow> rows;
  rows.reserve(send_events.size());

  for (std::size_t i = 0; i < send_events.size(); ++i) {
    const auto& ev = send_events[i];
    auto label = truth.find(ev.mote);
    if (label == truth.end()) {
      throw Error(ErrorKind::Data, "mote " + std::to_string(ev.mote) + " has no ground-truth label");
    }
    const std::int64_t now = ev.time.count();
    std::int64_t interval_ms = 0;
    if (i > 0) {
      const std::int64_t prev = send_events[i - 1].time.count();
      require_ordered(ms_to_seconds(now), ms_to_seconds(prev));
      interval_ms = now - prev;
    }
    auto& s = state[ev.mote];
    const std::int64_t psi_ms = s.count > 0 ? now - s.last_ms : 0;
    s.last_ms = now;
    s.psi_sum_ms += psi_ms;
    s.count += 1;

    FeatureRow row;
    row.event_index = i;
    row.mote = ev.mote;
    row.time = ms_to_seconds(now);
    row.interval = ms_to_seconds(interval_ms);
    row.psi = ms_to_seconds(psi_ms);
    row.avg_psi = ms_to_seconds(s.psi_sum_ms) / static_cast<double>(s.count);
    row.previous_sender = previous_sender(send_events, i);
    row.label = label->second;
    rows.push_back(row);
  }
  return rows;
}

GroupStats group_averages(std::span<const FeatureRow> rows, const GroundTruth& truth) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<MoteId, Acc> per_mote;
  Acc groups[2];
  for (const auto& r : rows) {
    auto it = truth.find(r.mote);
    if (it == truth.end()) {
      throw Error(ErrorKind::Data, "mote " + std::to_string(r.mote) + " has no ground-truth label");
    }
    auto& m = per_mote[r.mote];
    m.sum += r.psi;
    m.n += 1;
    auto& g = groups[static_cast<int>(it->second)];
    g.sum += r.psi;
    g.n += 1;
  }
  GroupStats stats;
  for (const auto& [mote, acc] : per_mote) {
    stats.per_mote_mean_psi[mote] = acc.sum / static_cast<double>(acc.n);
  }
  if (groups[0].n > 0) stats.avg_psi_benign = groups[0].sum / static_cast<double>(groups[0].n);
  if (groups[1].n > 0) stats.avg_psi_malicious = groups[1].sum / static_cast<double>(groups[1].n);
  return stats;
}

GroundTruth truth_from_rows(std::span<const FeatureRow> rows) {
  GroundTruth truth;
  for (const auto& r : rows) {
    auto [it, inserted] = truth.emplace(r.mote, r.label);
    if (!inserted && it->second != r.label) {
      throw Error(ErrorKind::Data, "mote " + std::to_string(r.mote) + " carries conflicting labels");
    }
  }
  return truth;
}

void write_features(std::span<const FeatureRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << kHeader << '\n';
  using detail::format_double;
  for (const auto& r : rows) {
    out << r.event_index << ',' << r.mote << ',' << format_double(r.time) << ','
        << format_double(r.interval) << ',' << format_double(r.psi) << ','
        << format_double(r.avg_psi) << ',' << r.previous_sender << ','
        << static_cast<int>(r.label) << '\n';
  }
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<FeatureRow> read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw Error(ErrorKind::Data, path.string() + ": missing feature CSV header");
  }
  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_commas(line);
    FeatureRow r;
    int label = -1;
    const bool ok = f.size() == 8 && detail::parse_field(f[0], r.event_index) &&
                    detail::parse_field(f[1], r.mote) && detail::parse_field(f[2], r.time) &&
                    detail::parse_field(f[3], r.interval) && detail::parse_field(f[4], r.psi) &&
                    detail::parse_field(f[5], r.avg_psi) &&
                    detail::parse_field(f[6], r.previous_sender) && detail::parse_field(f[7], label) &&
                    (label == 0 || label == 1);
    if (!ok) {
      throw Error(ErrorKind::Data,
                  path.string() + ":" + std::to_string(line_no) + ": bad feature row '" + line + "'");
    }
    r.label = static_cast<Label>(label);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hiot::features
