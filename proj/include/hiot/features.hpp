#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hiot/parser.hpp"
#include "hiot/types.hpp"

namespace hiot::features {

inline constexpr MoteId kNoSender = 0;
inline constexpr std::size_t kModelFeatures = 5;

/// Per-send-event features. Times and intervals in seconds.
struct FeatureRow {
  std::size_t event_index = 0;
  MoteId mote = 0;
  double time = 0.0;
  double interval = 0.0;  // since the previous send of any mote
  double psi = 0.0;       // since the previous send of the same mote
  double avg_psi = 0.0;   // causal mean of this mote's psi values
  MoteId previous_sender = kNoSender;
  Label label = Label::Benign;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// The five model inputs in fixed order: mote, interval, psi, avg_psi, previous_sender.
std::array<double, kModelFeatures> model_inputs(const FeatureRow& row);

// Scalar formulas. Throw Error(Data) when the stream is out of order.
double interval(double ts, double previous_send_time);
double psi_same_node(double ts, double pst_same_node);
double avg_psi_same_node(std::span<const double> psi_history);
MoteId previous_sender(std::span<const parser::LogRecord> send_events, std::size_t index);

/// Single causal pass over time-sorted send events. The first event of the
/// stream (resp. of a mote) gets interval (resp. psi) 0, and that 0 enters the
/// mote's avg_psi history. Throws Error(Data) for motes absent from `truth`.
std::vector<FeatureRow> extract_features(std::span<const parser::LogRecord> send_events,
                                         const GroundTruth& truth);

struct GroupStats {
  std::optional<double> avg_psi_benign;
  std::optional<double> avg_psi_malicious;
  std::map<MoteId, double> per_mote_mean_psi;
};

/// Event-weighted mean psi per label group. Diagnostic only.
GroupStats group_averages(std::span<const FeatureRow> rows, const GroundTruth& truth);

/// Labels as recorded on the rows themselves.
GroundTruth truth_from_rows(std::span<const FeatureRow> rows);

void write_features(std::span<const FeatureRow> rows, const std::filesystem::path& path);
std::vector<FeatureRow> read_features(const std::filesystem::path& path);

}  // namespace hiot::features
