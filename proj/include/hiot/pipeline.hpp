#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiot/cnn.hpp"
#include "hiot/dataset.hpp"
#include "hiot/eval.hpp"
#include "hiot/features.hpp"
#include "hiot/sim.hpp"
#include "json.hpp"

namespace hiot::pipeline {

/// Everything after simulation: split, windowing, training and scoring.
struct ModelConfig {
  cnn::TrainConfig train;
  std::size_t window = 10;
  std::size_t stride = 1;
  double train_frac = 0.7;
  double threshold = 0.5;
  cnn::OutputActivation activation = cnn::OutputActivation::Sigmoid;

  void validate() const;
};

/// One config file drives every stage. Sim fields live at the top level; the
/// optional "model" object holds ModelConfig fields. A missing model seed
/// defaults to the top-level seed.
struct RunConfig {
  sim::SimConfig sim;
  ModelConfig model;
  bool lenient_parse = false;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Split, window and normalize with train-only statistics.
struct Prepared {
  dataset::Split split;
  dataset::WindowedDataset train;
  dataset::WindowedDataset test;
  dataset::Scaler scaler;
  GroundTruth truth;
};

Prepared prepare(std::span<const features::FeatureRow> rows, const ModelConfig& config);

struct TrainOutcome {
  cnn::CnnModel model;
  std::vector<double> epoch_loss;
  double seconds = 0.0;
};

std::vector<features::FeatureRow> extract(const std::filesystem::path& trace_path,
                                          const std::filesystem::path& truth_path,
                                          bool lenient);
std::vector<features::FeatureRow> extract(const sim::Trace& trace);

TrainOutcome train_model(const Prepared& data, const ModelConfig& config);
TrainOutcome train_model(std::span<const features::FeatureRow> rows, const ModelConfig& config);

/// Test-split evaluation. The window length and activation come from the model.
eval::EvalReport evaluate_model(const cnn::CnnModel& model, const Prepared& data,
                                const ModelConfig& config);
eval::EvalReport evaluate_model(const cnn::CnnModel& model,
                                std::span<const features::FeatureRow> rows,
                                const ModelConfig& config);

/// One model per output activation on identical data and seed.
std::vector<eval::SweepRow> activation_sweep(std::span<const features::FeatureRow> rows,
                                             const ModelConfig& config);

std::string version_string();

struct FileDigest {
  std::filesystem::path path;
  std::string fnv1a64;  // hex digest of the file bytes
};

FileDigest digest_file(const std::filesystem::path& path);

/// Writes a run manifest: config snapshot, derived seeds, tool version and
/// content hashes of inputs and outputs. load_run_config accepts a manifest
/// in place of a config file.
void write_manifest(const std::filesystem::path& path, std::string_view command,
                    const RunConfig& config, std::span<const std::filesystem::path> inputs,
                    std::span<const std::filesystem::path> outputs);

}  // namespace hiot::pipeline
