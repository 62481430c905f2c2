#include "hiot/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "hiot/error.hpp"
#include "hiot/seed.hpp"

namespace hiot::cnn {
namespace {

constexpr char kMagic[5] = {'H', 'I', 'O', 'T', '1'};

std::string dims(std::size_t n, std::size_t t, std::size_t c) {
  return "(" + std::to_string(n) + ", " + std::to_string(t) + ", " + std::to_string(c) + ")";
}

void check_input(const CnnModel& model, const Tensor3& x) {
  const Hyper& h = model.hyper;
  if (x.timesteps != h.window || x.features != h.in_features) {
    throw Error(ErrorKind::Data, "input shape mismatch: expected " +
                                     dims(x.samples, h.window, h.in_features) + ", got " +
                                     dims(x.samples, x.timesteps, x.features));
  }
}

/// Activations of one sample kept for the backward pass.
struct SampleCache {
  std::vector<double> conv;          // pre-activation, [t][filter]
  std::vector<double> pooled;        // [p][filter]
  std::vector<std::size_t> argmax;   // conv time index feeding each pooled cell
  double z = 0.0;
  double score = 0.0;

  explicit SampleCache(const Hyper& h)
      : conv(h.conv_steps() * h.filters),
        pooled(h.flattened_dim()),
        argmax(h.flattened_dim()) {}
};

void forward_sample(const CnnModel& m, const double* xs, SampleCache& c) {
  const Hyper& h = m.hyper;
  const std::size_t steps = h.conv_steps();
  const std::size_t F = h.filters;
  const std::size_t K = h.kernel;
  const std::size_t C = h.in_features;

  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      double acc = m.conv_bias[f];
      const double* w = &m.conv_weights[f * K * C];
      const double* in = xs + t * C;
      for (std::size_t i = 0; i < K * C; ++i) acc += in[i] * w[i];
      if (!std::isfinite(acc)) throw Error(ErrorKind::Numeric, "non-finite value in conv1d layer");
      c.conv[t * F + f] = acc;
    }
  }
  for (std::size_t p = 0; p < h.pooled_steps(); ++p) {
    for (std::size_t f = 0; f < F; ++f) {
      std::size_t best_t = p * h.pool;
      double best = std::max(0.0, c.conv[best_t * F + f]);
      for (std::size_t j = 1; j < h.pool; ++j) {
        const std::size_t t = p * h.pool + j;
        const double v = std::max(0.0, c.conv[t * F + f]);
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      c.pooled[p * F + f] = best;
      c.argmax[p * F + f] = best_t;
    }
  }
  double z = m.dense_bias;
  for (std::size_t i = 0; i < c.pooled.size(); ++i) z += m.dense_weights[i] * c.pooled[i];
  if (!std::isfinite(z)) throw Error(ErrorKind::Numeric, "non-finite value in dense layer");
  c.z = z;
  c.score = output_activation(z, h.activation);
}

double clamp_score(double s) {
  return std::clamp(s, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double sample_loss(double score, double y) {
  const double p = clamp_score(score);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// d(loss)/d(score); zero where the clamp is active.
double loss_slope(double s, double y) {
  if (s < kProbabilityClamp || s > 1.0 - kProbabilityClamp) return 0.0;
  return -y / s + (1.0 - y) / (1.0 - s);
}

double activation_slope(double z, double s, OutputActivation kind) {
  switch (kind) {
    case OutputActivation::Sigmoid: return s * (1.0 - s);
    case OutputActivation::Softmax: return 0.0;
    case OutputActivation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case OutputActivation::Tanh: return 1.0 - s * s;
  }
  return 0.0;
}

Gradients zero_gradients(const Hyper& h) {
  Gradients g;
  g.conv_weights.assign(h.filters * h.kernel * h.in_features, 0.0);
  g.conv_bias.assign(h.filters, 0.0);
  g.dense_weights.assign(h.flattened_dim(), 0.0);
  return g;
}

// Adds scale * d(loss_i)/d(params) for each listed sample, and scale * loss_i to g.loss.
void accumulate(const CnnModel& m, const Tensor3& x, std::span<const Label> y,
                std::span<const std::size_t> indices, double scale, Gradients& g,
                SampleCache& cache) {
  const Hyper& h = m.hyper;
  const std::size_t F = h.filters;
  const std::size_t K = h.kernel;
  const std::size_t C = h.in_features;
  for (std::size_t n : indices) {
    const double* xs = &x.values[n * x.sample_size()];
    forward_sample(m, xs, cache);
    const double target = to_double(y[n]);
    g.loss += scale * sample_loss(cache.score, target);

    const double dz =
        scale * loss_slope(cache.score, target) * activation_slope(cache.z, cache.score, h.activation);
    if (dz == 0.0) continue;
    g.dense_bias += dz;
    for (std::size_t i = 0; i < cache.pooled.size(); ++i) {
      g.dense_weights[i] += dz * cache.pooled[i];
      const double dp = dz * m.dense_weights[i];
      const std::size_t f = i % F;
      const std::size_t t = cache.argmax[i];
      if (dp == 0.0 || !(cache.conv[t * F + f] > 0.0)) continue;
      g.conv_bias[f] += dp;
      double* gw = &g.conv_weights[f * K * C];
      const double* in = xs + t * C;
      for (std::size_t j = 0; j < K * C; ++j) gw[j] += dp * in[j];
    }
  }
  if (!std::isfinite(g.loss)) throw Error(ErrorKind::Numeric, "non-finite loss in output layer");
}

void check_labels(const Tensor3& x, std::span<const Label> y) {
  if (y.size() != x.samples) {
    throw Error(ErrorKind::Data, "label count " + std::to_string(y.size()) +
                                     " does not match sample count " + std::to_string(x.samples));
  }
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

std::string_view to_string(OutputActivation kind) noexcept {
  switch (kind) {
    case OutputActivation::Sigmoid: return "sigmoid";
    case OutputActivation::Softmax: return "softmax";
    case OutputActivation::Relu: return "relu";
    case OutputActivation::Tanh: return "tanh";
  }
  return "unknown";
}

std::optional<OutputActivation> parse_activation(std::string_view name) noexcept {
  for (auto kind : kAllActivations) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void Hyper::validate() const {
  if (kernel < 1 || filters < 1 || pool < 1 || in_features < 1) {
    throw Error(ErrorKind::Config, "kernel, filters, pool and in_features must be >= 1");
  }
  if (window < kernel) {
    throw Error(ErrorKind::Config, "window " + std::to_string(window) + " is shorter than kernel " +
                                       std::to_string(kernel));
  }
  if (pooled_steps() == 0) {
    throw Error(ErrorKind::Config, "window " + std::to_string(window) +
                                       " leaves nothing after pooling");
  }
}

CnnModel CnnModel::zeros(const Hyper& hyper) {
  hyper.validate();
  CnnModel m;
  m.hyper = hyper;
  m.conv_weights.assign(hyper.filters * hyper.kernel * hyper.in_features, 0.0);
  m.conv_bias.assign(hyper.filters, 0.0);
  m.dense_weights.assign(hyper.flattened_dim(), 0.0);
  return m;
}

CnnModel CnnModel::initialize(const Hyper& hyper, std::uint64_t seed) {
  CnnModel m = zeros(hyper);
  Rng rng(seed);
  const double conv_fan_in = static_cast<double>(hyper.kernel * hyper.in_features);
  const double conv_fan_out = static_cast<double>(hyper.kernel * hyper.filters);
  const double conv_limit = std::sqrt(6.0 / (conv_fan_in + conv_fan_out));
  for (double& w : m.conv_weights) w = uniform(rng, -conv_limit, conv_limit);
  const double dense_limit = std::sqrt(6.0 / (static_cast<double>(hyper.flattened_dim()) + 1.0));
  for (double& w : m.dense_weights) w = uniform(rng, -dense_limit, dense_limit);
  return m;
}

std::size_t CnnModel::parameter_count() const {
  return conv_weights.size() + conv_bias.size() + dense_weights.size() + 1;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::Config, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::Config, "learning_rate must be > 0");
  }
}

Tensor3 conv1d_forward(const Tensor3& x, std::span<const double> weights,
                       std::span<const double> bias, std::size_t kernel) {
  const std::size_t filters = bias.size();
  if (kernel < 1 || x.timesteps < kernel) {
    throw Error(ErrorKind::Data, "conv1d: " + std::to_string(x.timesteps) +
                                     " timesteps is shorter than kernel " + std::to_string(kernel));
  }
  if (weights.size() != filters * kernel * x.features) {
    throw Error(ErrorKind::Data, "conv1d: weight count does not match filters x kernel x channels");
  }
  const std::size_t steps = x.timesteps - kernel + 1;
  Tensor3 out(x.samples, steps, filters);
  for (std::size_t n = 0; n < x.samples; ++n) {
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t f = 0; f < filters; ++f) {
        double acc = bias[f];
        for (std::size_t k = 0; k < kernel; ++k) {
          for (std::size_t c = 0; c < x.features; ++c) {
            acc += x.at(n, t + k, c) * weights[(f * kernel + k) * x.features + c];
          }
        }
        out.at(n, t, f) = acc;
      }
    }
  }
  return out;
}

Tensor3 relu(Tensor3 x) {
  for (double& v : x.values) v = std::max(0.0, v);
  return x;
}

Tensor3 maxpool1d(const Tensor3& x, std::size_t pool) {
  if (pool < 1) throw Error(ErrorKind::Data, "maxpool1d: pool must be >= 1");
  Tensor3 out(x.samples, x.timesteps / pool, x.features);
  for (std::size_t n = 0; n < out.samples; ++n) {
    for (std::size_t p = 0; p < out.timesteps; ++p) {
      for (std::size_t c = 0; c < x.features; ++c) {
        double best = x.at(n, p * pool, c);
        for (std::size_t j = 1; j < pool; ++j) best = std::max(best, x.at(n, p * pool + j, c));
        out.at(n, p, c) = best;
      }
    }
  }
  return out;
}

Matrix flatten(const Tensor3& x) {
  return {x.samples, x.timesteps * x.features, x.values};
}

double output_activation(double z, OutputActivation kind) {
  switch (kind) {
    case OutputActivation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case OutputActivation::Softmax: {
      // Normalization over a single unit.
      const double e = std::exp(z - z);
      return e / e;
    }
    case OutputActivation::Relu: return std::max(0.0, z);
    case OutputActivation::Tanh: return std::tanh(z);
  }
  return 0.0;
}

std::vector<double> forward(const CnnModel& model, const Tensor3& x) {
  check_input(model, x);
  SampleCache cache(model.hyper);
  std::vector<double> scores(x.samples);
  for (std::size_t n = 0; n < x.samples; ++n) {
    forward_sample(model, &x.values[n * x.sample_size()], cache);
    scores[n] = cache.score;
  }
  return scores;
}

double bce_loss(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw Error(ErrorKind::Data, "bce_loss: scores and labels must be non-empty and equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += sample_loss(scores[i], to_double(labels[i]));
  return sum / static_cast<double>(scores.size());
}

Gradients backward(const CnnModel& model, const Tensor3& x, std::span<const Label> y) {
  check_input(model, x);
  check_labels(x, y);
  if (x.samples == 0) throw Error(ErrorKind::Data, "backward on an empty batch");
  Gradients g = zero_gradients(model.hyper);
  SampleCache cache(model.hyper);
  const auto idx = iota_indices(x.samples);
  accumulate(model, x, y, idx, 1.0 / static_cast<double>(x.samples), g, cache);
  return g;
}

double grad_check(const CnnModel& model, const Tensor3& x, std::span<const Label> y, double eps) {
  const Gradients analytic = backward(model, x, y);
  CnnModel probe = model;
  double worst = 0.0;

  auto probe_param = [&](double& param, double bp) {
    const double saved = param;
    param = saved + eps;
    const double up = bce_loss(forward(probe, x), y);
    param = saved - eps;
    const double down = bce_loss(forward(probe, x), y);
    param = saved;
    const double fd = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - bp) / std::max(1e-8, std::abs(fd) + std::abs(bp)));
  };
  for (std::size_t i = 0; i < probe.conv_weights.size(); ++i) {
    probe_param(probe.conv_weights[i], analytic.conv_weights[i]);
  }
  for (std::size_t i = 0; i < probe.conv_bias.size(); ++i) {
    probe_param(probe.conv_bias[i], analytic.conv_bias[i]);
  }
  for (std::size_t i = 0; i < probe.dense_weights.size(); ++i) {
    probe_param(probe.dense_weights[i], analytic.dense_weights[i]);
  }
  probe_param(probe.dense_bias, analytic.dense_bias);
  return worst;
}

TrainResult train(CnnModel model, const dataset::WindowedDataset& train_set,
                  const TrainConfig& config) {
  config.validate();
  const Tensor3& x = train_set.x;
  if (x.samples == 0) throw Error(ErrorKind::Data, "training set is empty");
  check_input(model, x);
  check_labels(x, train_set.y);

  Rng rng(derive_seed(config.seed, "cnn/shuffle"));
  auto order = iota_indices(x.samples);
  SampleCache cache(model.hyper);
  TrainResult result;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_index(rng, i + 1)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      Gradients g = zero_gradients(model.hyper);
      try {
        accumulate(model, x, train_set.y, batch, 1.0 / static_cast<double>(len), g, cache);
      } catch (const Error& e) {
        throw Error(ErrorKind::Numeric, "training diverged in epoch " + std::to_string(epoch) +
                                            ": " + e.what());
      }
      const double lr = config.learning_rate;
      for (std::size_t i = 0; i < g.conv_weights.size(); ++i) model.conv_weights[i] -= lr * g.conv_weights[i];
      for (std::size_t i = 0; i < g.conv_bias.size(); ++i) model.conv_bias[i] -= lr * g.conv_bias[i];
      for (std::size_t i = 0; i < g.dense_weights.size(); ++i) model.dense_weights[i] -= lr * g.dense_weights[i];
      model.dense_bias -= lr * g.dense_bias;
      epoch_loss += g.loss * static_cast<double>(len);
    }
    epoch_loss /= static_cast<double>(x.samples);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::Numeric, "training diverged in epoch " + std::to_string(epoch));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

std::vector<Label> threshold_scores(std::span<const double> scores, double threshold) {
  std::vector<Label> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    labels[i] = scores[i] > threshold ? Label::Malicious : Label::Benign;
  }
  return labels;
}

std::vector<Label> predict(const CnnModel& model, const Tensor3& x, double threshold) {
  return threshold_scores(forward(model, x), threshold);
}

void save_model(const CnnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const Hyper& h = model.hyper;
  out.write(kMagic, sizeof kMagic);
  for (std::uint64_t d : {std::uint64_t{h.window}, std::uint64_t{h.in_features},
                          std::uint64_t{h.filters}, std::uint64_t{h.kernel}, std::uint64_t{h.pool},
                          static_cast<std::uint64_t>(h.activation)}) {
    detail::write_u64(out, d);
  }
  for (double v : model.conv_weights) detail::write_f64(out, v);
  for (double v : model.conv_bias) detail::write_f64(out, v);
  for (double v : model.dense_weights) detail::write_f64(out, v);
  detail::write_f64(out, model.dense_bias);
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

CnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::Data, path.string() + ": not a HIOT1 model file");
  }
  Hyper h;
  constexpr std::uint64_t kLimit = 1u << 20;
  std::uint64_t d[6];
  for (auto& v : d) v = detail::read_u64(in);
  for (int i = 0; i < 5; ++i) {
    if (d[i] == 0 || d[i] > kLimit) throw Error(ErrorKind::Data, path.string() + ": implausible model dims");
  }
  if (d[5] > 3) throw Error(ErrorKind::Data, path.string() + ": unknown output activation");
  h.window = d[0];
  h.in_features = d[1];
  h.filters = d[2];
  h.kernel = d[3];
  h.pool = d[4];
  h.activation = static_cast<OutputActivation>(d[5]);
  try {
    h.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Data, path.string() + ": " + e.what());
  }
  CnnModel m = CnnModel::zeros(h);
  for (double& v : m.conv_weights) v = detail::read_f64(in);
  for (double& v : m.conv_bias) v = detail::read_f64(in);
  for (double& v : m.dense_weights) v = detail::read_f64(in);
  m.dense_bias = detail::read_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::Data, path.string() + ": trailing bytes after model parameters");
  }
  return m;
}

}  // namespace hiot::cnn
