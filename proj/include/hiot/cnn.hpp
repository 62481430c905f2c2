#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hiot/dataset.hpp"
#include "hiot/types.hpp"

namespace hiot::cnn {

using dataset::Tensor3;

enum class OutputActivation : std::uint8_t { Sigmoid = 0, Softmax = 1, Relu = 2, Tanh = 3 };

inline constexpr OutputActivation kAllActivations[] = {
    OutputActivation::Sigmoid, OutputActivation::Softmax, OutputActivation::Relu,
    OutputActivation::Tanh};

std::string_view to_string(OutputActivation kind) noexcept;
std::optional<OutputActivation> parse_activation(std::string_view name) noexcept;

struct Hyper {
  std::size_t window = 20;
  std::size_t in_features = 5;
  std::size_t filters = 32;
  std::size_t kernel = 3;
  std::size_t pool = 2;
  OutputActivation activation = OutputActivation::Sigmoid;

  std::size_t conv_steps() const { return window - kernel + 1; }
  std::size_t pooled_steps() const { return conv_steps() / pool; }
  std::size_t flattened_dim() const { return pooled_steps() * filters; }

  /// Throws Error(Config) for shapes the network cannot be built with.
  void validate() const;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

/// conv (filters x kernel x in_features) -> relu -> maxpool -> flatten -> dense(1) -> activation.
struct CnnModel {
  Hyper hyper;
  std::vector<double> conv_weights;   // [filter][k][channel]
  std::vector<double> conv_bias;      // [filter]
  std::vector<double> dense_weights;  // [pooled step * filters + filter]
  double dense_bias = 0.0;

  /// Glorot-uniform weights from `seed`, zero biases.
  static CnnModel initialize(const Hyper& hyper, std::uint64_t seed);
  static CnnModel zeros(const Hyper& hyper);

  std::size_t parameter_count() const;

  friend bool operator==(const CnnModel&, const CnnModel&) = default;
};

/// Same layout as the model parameters.
struct Gradients {
  std::vector<double> conv_weights;
  std::vector<double> conv_bias;
  std::vector<double> dense_weights;
  double dense_bias = 0.0;
  double loss = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;

  void validate() const;
};

// Layer primitives on (N, T, C) tensors.
Tensor3 conv1d_forward(const Tensor3& x, std::span<const double> weights,
                       std::span<const double> bias, std::size_t kernel);
Tensor3 relu(Tensor3 x);
Tensor3 maxpool1d(const Tensor3& x, std::size_t pool = 2);

/// Row-major (N, T*C) matrix, time-major then channel.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};
Matrix flatten(const Tensor3& x);

double output_activation(double z, OutputActivation kind);

/// Scores per sample. Throws Error(Data) on shape mismatch.
std::vector<double> forward(const CnnModel& model, const Tensor3& x);

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy with scores clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> scores, std::span<const Label> labels);

/// Exact gradients of bce_loss(forward(model, x), y). Maxpool routes to the
/// first maximal index; relu has zero slope at 0. Throws Error(Numeric).
Gradients backward(const CnnModel& model, const Tensor3& x, std::span<const Label> y);

/// Max relative error between central differences and backward over every
/// parameter: |fd - bp| / max(1e-8, |fd| + |bp|).
double grad_check(const CnnModel& model, const Tensor3& x, std::span<const Label> y,
                  double eps = 1e-5);

struct TrainResult {
  CnnModel model;
  std::vector<double> epoch_loss;
};

/// Mini-batch SGD with a seeded shuffle per epoch. Throws Error(Data) for an
/// empty dataset and Error(Numeric) when the loss diverges.
TrainResult train(CnnModel model, const dataset::WindowedDataset& train_set,
                  const TrainConfig& config);

/// 1 iff score > threshold.
std::vector<Label> predict(const CnnModel& model, const Tensor3& x, double threshold = 0.5);
std::vector<Label> threshold_scores(std::span<const double> scores, double threshold = 0.5);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace hiot::cnn
