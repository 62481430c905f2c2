#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiot/cnn.hpp"
#include "hiot/features.hpp"
#include "hiot/types.hpp"
#include "json.hpp"

namespace hiot::eval {

struct NodeVote {
  Label predicted = Label::Benign;
  std::size_t windows = 0;
  std::size_t malicious_votes = 0;

  double vote_fraction() const {
    return windows == 0 ? 0.0 : static_cast<double>(malicious_votes) / static_cast<double>(windows);
  }
};

/// Majority vote per mote; an exact tie counts as malicious.
std::map<MoteId, NodeVote> aggregate_node_predictions(std::span<const Label> window_preds,
                                                      std::span<const MoteId> sample_mote);

/// 100 * correct / total over motes present in both maps. Throws Error(Eval)
/// when no mote is evaluable.
double accuracy(const std::map<MoteId, Label>& node_preds, const GroundTruth& truth);
double error_rate(double accuracy_percent);

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
};

struct NodeResult {
  MoteId mote = 0;
  Label predicted = Label::Benign;
  Label truth = Label::Benign;
  std::size_t windows = 0;
  double vote_fraction = 0.0;
};

struct EvalReport {
  std::string method;
  std::vector<NodeResult> nodes;
  /// Ground-truth motes without any test window.
  std::vector<MoteId> excluded;
  double accuracy = 0.0;
  double error_rate = 0.0;
  Confusion confusion;
  std::optional<double> window_accuracy;
  std::optional<double> training_seconds;
  nlohmann::json config = nlohmann::json::object();

  std::optional<double> precision() const;
  std::optional<double> recall() const;
  std::optional<double> f1() const;
};

/// Node-level report from per-window predictions.
EvalReport build_report(std::span<const Label> window_preds, std::span<const Label> window_truth,
                        std::span<const MoteId> sample_mote, const GroundTruth& truth);

/// Flags a mote malicious iff the mean psi of its rows is below the threshold.
EvalReport baseline_interval_threshold(std::span<const features::FeatureRow> rows,
                                       const GroundTruth& truth, double threshold_seconds);

struct SweepRow {
  cnn::OutputActivation activation = cnn::OutputActivation::Sigmoid;
  double accuracy = 0.0;
  double error_rate = 0.0;
};

enum class ReportFormat { Text, Json };

nlohmann::json to_json(const EvalReport& report, bool include_timing = false);
std::string render_report(const EvalReport& report, ReportFormat format,
                          bool include_timing = false);
void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path);

std::string render_sweep(std::span<const SweepRow> rows, ReportFormat format);

}  // namespace hiot::eval
