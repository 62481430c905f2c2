#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "hiot/features.hpp"
#include "hiot/types.hpp"

namespace hiot::dataset {

/// Row-major (samples, timesteps, features) array.
struct Tensor3 {
  std::size_t samples = 0;
  std::size_t timesteps = 0;
  std::size_t features = 0;
  std::vector<double> values;

  Tensor3() = default;
  Tensor3(std::size_t n, std::size_t t, std::size_t f)
      : samples(n), timesteps(t), features(f), values(n * t * f, 0.0) {}

  double& at(std::size_t n, std::size_t t, std::size_t f) {
    return values[(n * timesteps + t) * features + f];
  }
  double at(std::size_t n, std::size_t t, std::size_t f) const {
    return values[(n * timesteps + t) * features + f];
  }
  std::size_t sample_size() const { return timesteps * features; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

/// Per-feature standardization statistics.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

struct WindowedDataset {
  Tensor3 x;
  std::vector<Label> y;
  std::vector<MoteId> sample_mote;
  /// Motes with fewer events than the window length.
  std::vector<MoteId> short_motes;
};

struct Split {
  std::vector<features::FeatureRow> train;
  std::vector<features::FeatureRow> test;
};

/// Train = first floor(train_frac * n) rows. Throws Error(Data) for n < 2.
Split sequential_split(std::span<const features::FeatureRow> rows, double train_frac = 0.7);

/// Per-mote windows of `length` consecutive events, ordered by mote id then
/// start index. Throws Error(Data) if no mote has `length` events.
WindowedDataset window(std::span<const features::FeatureRow> rows, std::size_t length = 20,
                       std::size_t stride = 1);

Scaler fit_scaler(const WindowedDataset& train);
WindowedDataset apply_scaler(WindowedDataset ds, const Scaler& scaler);

/// Three little-endian u64 dims followed by little-endian f64 values.
void write_tensor(const Tensor3& tensor, const std::filesystem::path& path);
Tensor3 read_tensor(const std::filesystem::path& path);

}  // namespace hiot::dataset
