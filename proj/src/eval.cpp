#include "hiot/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hiot/error.hpp"

namespace hiot::eval {
namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void finish(EvalReport& report, const GroundTruth& truth, const std::map<MoteId, Label>& preds) {
  for (const auto& [mote, label] : truth) {
    if (!preds.contains(mote)) report.excluded.push_back(mote);
  }
  report.accuracy = accuracy(preds, truth);
  report.error_rate = error_rate(report.accuracy);
  for (const auto& node : report.nodes) {
    const bool p = node.predicted == Label::Malicious;
    const bool t = node.truth == Label::Malicious;
    if (p && t) ++report.confusion.tp;
    else if (!p && !t) ++report.confusion.tn;
    else if (p) ++report.confusion.fp;
    else ++report.confusion.fn;
  }
}

}  // namespace

std::map<MoteId, NodeVote> aggregate_node_predictions(std::span<const Label> window_preds,
                                                      std::span<const MoteId> sample_mote) {
  if (window_preds.size() != sample_mote.size()) {
    throw Error(ErrorKind::Eval, "window predictions and sample motes differ in length");
  }
  std::map<MoteId, NodeVote> votes;
  for (std::size_t i = 0; i < window_preds.size(); ++i) {
    auto& v = votes[sample_mote[i]];
    v.windows += 1;
    if (window_preds[i] == Label::Malicious) v.malicious_votes += 1;
  }
  for (auto& [mote, v] : votes) {
    v.predicted = 2 * v.malicious_votes >= v.windows ? Label::Malicious : Label::Benign;
  }
  return votes;
}

double accuracy(const std::map<MoteId, Label>& node_preds, const GroundTruth& truth) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (const auto& [mote, predicted] : node_preds) {
    auto it = truth.find(mote);
    if (it == truth.end()) continue;
    ++total;
    if (it->second == predicted) ++correct;
  }
  if (total == 0) throw Error(ErrorKind::Eval, "no evaluable nodes");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

double error_rate(double accuracy_percent) { return 100.0 - accuracy_percent; }

std::optional<double> EvalReport::precision() const {
  const auto d = confusion.tp + confusion.fp;
  if (d == 0) return std::nullopt;
  return static_cast<double>(confusion.tp) / static_cast<double>(d);
}

std::optional<double> EvalReport::recall() const {
  const auto d = confusion.tp + confusion.fn;
  if (d == 0) return std::nullopt;
  return static_cast<double>(confusion.tp) / static_cast<double>(d);
}

std::optional<double> EvalReport::f1() const {
  const auto p = precision();
  const auto r = recall();
  if (!p || !r || *p + *r == 0.0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

EvalReport build_report(std::span<const Label> window_preds, std::span<const Label> window_truth,
                        std::span<const MoteId> sample_mote, const GroundTruth& truth) {
  if (window_truth.size() != window_preds.size()) {
    throw Error(ErrorKind::Eval, "window predictions and labels differ in length");
  }
  const auto votes = aggregate_node_predictions(window_preds, sample_mote);
  EvalReport report;
  report.method = "cnn";
  std::map<MoteId, Label> preds;
  for (const auto& [mote, vote] : votes) {
    auto it = truth.find(mote);
    if (it == truth.end()) continue;
    preds[mote] = vote.predicted;
    report.nodes.push_back({mote, vote.predicted, it->second, vote.windows, vote.vote_fraction()});
  }
  finish(report, truth, preds);
  if (!window_preds.empty()) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < window_preds.size(); ++i) hits += window_preds[i] == window_truth[i];
    report.window_accuracy =
        100.0 * static_cast<double>(hits) / static_cast<double>(window_preds.size());
  }
  return report;
}

EvalReport baseline_interval_threshold(std::span<const features::FeatureRow> rows,
                                       const GroundTruth& truth, double threshold_seconds) {
  const auto stats = features::group_averages(rows, truth);
  std::map<MoteId, std::size_t> counts;
  for (const auto& r : rows) counts[r.mote] += 1;

  EvalReport report;
  report.method = "interval-threshold";
  report.config = {{"threshold_seconds", threshold_seconds}};
  std::map<MoteId, Label> preds;
  for (const auto& [mote, mean_psi] : stats.per_mote_mean_psi) {
    const Label p = mean_psi < threshold_seconds ? Label::Malicious : Label::Benign;
    preds[mote] = p;
    report.nodes.push_back(
        {mote, p, truth.at(mote), counts[mote], p == Label::Malicious ? 1.0 : 0.0});
  }
  finish(report, truth, preds);
  return report;
}

nlohmann::json to_json(const EvalReport& r, bool include_timing) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"mote", n.mote},
                     {"truth", static_cast<int>(n.truth)},
                     {"predicted", static_cast<int>(n.predicted)},
                     {"windows", n.windows},
                     {"vote_fraction", n.vote_fraction}});
  }
  nlohmann::json j = {
      {"method", r.method},
      {"accuracy", r.accuracy},
      {"error_rate", r.error_rate},
      {"window_accuracy", optional_json(r.window_accuracy)},
      {"confusion",
       {{"tp", r.confusion.tp}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}}},
      {"precision", optional_json(r.precision())},
      {"recall", optional_json(r.recall())},
      {"f1", optional_json(r.f1())},
      {"nodes", nodes},
      {"excluded", r.excluded},
      {"config", r.config},
  };
  if (include_timing) j["training_seconds"] = optional_json(r.training_seconds);
  return j;
}

std::string render_report(const EvalReport& r, ReportFormat format, bool include_timing) {
  if (format == ReportFormat::Json) return to_json(r, include_timing).dump(2) + "\n";

  std::ostringstream out;
  std::string activation = "-";
  if (auto it = r.config.find("activation"); it != r.config.end() && it->is_string()) {
    activation = it->get<std::string>();
  }
  char line[160];
  out << "method: " << r.method << "\n";
  std::snprintf(line, sizeof line, "%-20s %14s %20s\n", "Activation Function", "Accuracy (%)",
                "Estimated Loss (%)");
  out << line;
  std::snprintf(line, sizeof line, "%-20s %14s %20s\n", activation.c_str(), fixed(r.accuracy).c_str(),
                fixed(r.error_rate).c_str());
  out << line;
  out << "nodes evaluated: " << r.nodes.size() << ", excluded:";
  if (r.excluded.empty()) out << " none";
  for (MoteId m : r.excluded) out << ' ' << m;
  out << "\n";
  out << "confusion: TP=" << r.confusion.tp << " TN=" << r.confusion.tn << " FP=" << r.confusion.fp
      << " FN=" << r.confusion.fn << "\n";
  if (r.window_accuracy) out << "window accuracy (%): " << fixed(*r.window_accuracy) << "\n";
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 4) : std::string("n/a"); };
  out << "precision: " << opt(r.precision()) << "  recall: " << opt(r.recall())
      << "  f1: " << opt(r.f1()) << "\n";
  if (include_timing && r.training_seconds) {
    out << "training seconds: " << fixed(*r.training_seconds, 3) << "\n";
  }
  std::snprintf(line, sizeof line, "%6s %6s %10s %8s %14s\n", "mote", "truth", "predicted", "windows",
                "vote_fraction");
  out << line;
  for (const auto& n : r.nodes) {
    std::snprintf(line, sizeof line, "%6u %6d %10d %8zu %14s\n", n.mote, static_cast<int>(n.truth),
                  static_cast<int>(n.predicted), n.windows, fixed(n.vote_fraction, 4).c_str());
    out << line;
  }
  return out.str();
}

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << render_report(report, format);
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string render_sweep(std::span<const SweepRow> rows, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      j.push_back({{"activation", std::string(cnn::to_string(r.activation))},
                   {"accuracy", r.accuracy},
                   {"error_rate", r.error_rate}});
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %14s %20s\n", "Activation Function", "Accuracy (%)",
                "Estimated Loss (%)");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-20s %14s %20s\n",
                  std::string(cnn::to_string(r.activation)).c_str(), fixed(r.accuracy).c_str(),
                  fixed(r.error_rate).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace hiot::eval
