#include "hiot/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "binary_io.hpp"
#include "hiot/error.hpp"

namespace hiot::dataset {

using features::FeatureRow;

Split sequential_split(std::span<const FeatureRow> rows, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorKind::Config, "train_frac must lie in (0, 1)");
  }
  if (rows.size() < 2) {
    throw Error(ErrorKind::Data, "need at least 2 rows to split, got " + std::to_string(rows.size()));
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(rows.size())));
  Split split;
  split.train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  return split;
}

WindowedDataset window(std::span<const FeatureRow> rows, std::size_t length, std::size_t stride) {
  if (length < 1) throw Error(ErrorKind::Config, "window length must be >= 1");
  if (stride < 1) throw Error(ErrorKind::Config, "window stride must be >= 1");

  std::map<MoteId, std::vector<const FeatureRow*>> by_mote;
  for (const auto& r : rows) by_mote[r.mote].push_back(&r);

  WindowedDataset ds;
  std::size_t samples = 0;
  for (const auto& [mote, events] : by_mote) {
    if (events.size() < length) {
      ds.short_motes.push_back(mote);
      continue;
    }
    samples += (events.size() - length) / stride + 1;
  }
  if (samples == 0) {
    throw Error(ErrorKind::Data, "no mote has " + std::to_string(length) +
                                     " events; window length exceeds every mote's event count");
  }

  ds.x = Tensor3(samples, length, features::kModelFeatures);
  ds.y.reserve(samples);
  ds.sample_mote.reserve(samples);
  std::size_t n = 0;
  for (const auto& [mote, events] : by_mote) {
    if (events.size() < length) continue;
    for (std::size_t start = 0; start + length <= events.size(); start += stride, ++n) {
      for (std::size_t t = 0; t < length; ++t) {
        const auto in = features::model_inputs(*events[start + t]);
        for (std::size_t f = 0; f < in.size(); ++f) ds.x.at(n, t, f) = in[f];
      }
      ds.y.push_back(events.front()->label);
      ds.sample_mote.push_back(mote);
    }
  }
  return ds;
}

Scaler fit_scaler(const WindowedDataset& train) {
  const Tensor3& x = train.x;
  if (x.samples == 0) throw Error(ErrorKind::Data, "cannot fit a scaler on an empty dataset");
  const std::size_t rows = x.samples * x.timesteps;
  Scaler s;
  s.mean.assign(x.features, 0.0);
  s.stddev.assign(x.features, 0.0);
  s.constant.assign(x.features, false);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t f = 0; f < x.features; ++f) s.mean[f] += x.values[i * x.features + f];
  }
  for (auto& m : s.mean) m /= static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t f = 0; f < x.features; ++f) {
      const double d = x.values[i * x.features + f] - s.mean[f];
      s.stddev[f] += d * d;
    }
  }
  for (std::size_t f = 0; f < x.features; ++f) {
    s.stddev[f] = std::sqrt(s.stddev[f] / static_cast<double>(rows));
    s.constant[f] = s.stddev[f] <= 1e-12 * std::max(1.0, std::abs(s.mean[f]));
  }
  return s;
}

WindowedDataset apply_scaler(WindowedDataset ds, const Scaler& scaler) {
  Tensor3& x = ds.x;
  if (scaler.mean.size() != x.features) {
    throw Error(ErrorKind::Data, "scaler has " + std::to_string(scaler.mean.size()) +
                                     " features, dataset has " + std::to_string(x.features));
  }
  const std::size_t rows = x.samples * x.timesteps;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t f = 0; f < x.features; ++f) {
      if (scaler.constant[f]) continue;
      double& v = x.values[i * x.features + f];
      v = (v - scaler.mean[f]) / scaler.stddev[f];
    }
  }
  return ds;
}

void write_tensor(const Tensor3& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  detail::write_u64(out, tensor.samples);
  detail::write_u64(out, tensor.timesteps);
  detail::write_u64(out, tensor.features);
  for (double v : tensor.values) detail::write_f64(out, v);
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const auto n = detail::read_u64(in);
  const auto t = detail::read_u64(in);
  const auto f = detail::read_u64(in);
  const auto payload = std::filesystem::file_size(path) - 3 * sizeof(std::uint64_t);
  const std::uint64_t count = payload / sizeof(double);
  const std::uint64_t row = t * f;
  const bool consistent = payload % sizeof(double) == 0 &&
                          (t == 0 || f == 0 || (row / t == f && count % row == 0 && count / row == n)) &&
                          ((t != 0 && f != 0) || count == 0);
  if (!consistent) {
    throw Error(ErrorKind::Data, path.string() + ": dims do not match payload size");
  }
  Tensor3 tensor(n, t, f);
  for (double& v : tensor.values) v = detail::read_f64(in);
  return tensor;
}

}  // namespace hiot::dataset
