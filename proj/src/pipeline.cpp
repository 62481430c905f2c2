#include "hiot/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hiot/error.hpp"
#include "hiot/parser.hpp"
#include "hiot/seed.hpp"
#include "json_util.hpp"

namespace hiot::pipeline {
namespace {

constexpr const char* kVersion = "1.0.0";

ModelConfig model_config_from_json(const nlohmann::json& j, std::uint64_t default_seed) {
  detail::require_object(j, "model config");
  detail::reject_unknown_keys(j,
                              {"epochs", "batch_size", "learning_rate", "seed", "window", "stride",
                               "train_frac", "threshold", "activation"},
                              "model config");
  ModelConfig c;
  c.train.seed = default_seed;
  detail::read_field(j, "epochs", c.train.epochs);
  detail::read_field(j, "batch_size", c.train.batch_size);
  detail::read_field(j, "learning_rate", c.train.learning_rate);
  detail::read_field(j, "seed", c.train.seed);
  detail::read_field(j, "window", c.window);
  detail::read_field(j, "stride", c.stride);
  detail::read_field(j, "train_frac", c.train_frac);
  detail::read_field(j, "threshold", c.threshold);
  if (auto it = j.find("activation"); it != j.end()) {
    const auto kind = it->is_string() ? cnn::parse_activation(it->get<std::string>()) : std::nullopt;
    if (!kind) throw Error(ErrorKind::Config, "activation must be one of sigmoid, softmax, relu, tanh");
    c.activation = *kind;
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.learning_rate},
          {"seed", c.train.seed},
          {"window", c.window},
          {"stride", c.stride},
          {"train_frac", c.train_frac},
          {"threshold", c.threshold},
          {"activation", std::string(cnn::to_string(c.activation))}};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json eval_echo(const ModelConfig& c) {
  return {{"window", c.window},
          {"stride", c.stride},
          {"train_frac", c.train_frac},
          {"threshold", c.threshold},
          {"activation", std::string(cnn::to_string(c.activation))}};
}

}  // namespace

void ModelConfig::validate() const {
  train.validate();
  if (stride < 1) throw Error(ErrorKind::Config, "stride must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(ErrorKind::Config, "train_frac must lie in (0, 1)");
  cnn::Hyper h;
  h.window = window;
  h.validate();
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::require_object(j, "config");
  // A run manifest carries its config snapshot under "config".
  if (j.contains("tool") && j.contains("config")) return run_config_from_json(j.at("config"));
  nlohmann::json sim_part = j;
  sim_part.erase("model");
  sim_part.erase("lenient_parse");
  RunConfig c;
  c.sim = sim::sim_config_from_json(sim_part);
  c.model = model_config_from_json(j.value("model", nlohmann::json::object()), c.sim.seed);
  detail::read_field(j, "lenient_parse", c.lenient_parse);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": invalid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = sim::to_json(c.sim);
  j["model"] = to_json(c.model);
  j["lenient_parse"] = c.lenient_parse;
  return j;
}

Prepared prepare(std::span<const features::FeatureRow> rows, const ModelConfig& config) {
  config.validate();
  Prepared p;
  p.truth = features::truth_from_rows(rows);
  p.split = dataset::sequential_split(rows, config.train_frac);
  auto train = dataset::window(p.split.train, config.window, config.stride);
  p.scaler = dataset::fit_scaler(train);
  p.train = dataset::apply_scaler(std::move(train), p.scaler);
  p.test = dataset::apply_scaler(dataset::window(p.split.test, config.window, config.stride), p.scaler);
  return p;
}

std::vector<features::FeatureRow> extract(const std::filesystem::path& trace_path,
                                          const std::filesystem::path& truth_path, bool lenient) {
  const auto parsed = parser::parse_trace_file(trace_path, {.lenient = lenient});
  const auto sends = parser::filter_send_events(parsed.records);
  return features::extract_features(sends, sim::read_ground_truth(truth_path));
}

std::vector<features::FeatureRow> extract(const sim::Trace& trace) {
  // Through the log grammar, so the in-memory path matches the file path exactly.
  std::vector<parser::LogRecord> records;
  records.reserve(trace.events.size());
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    records.push_back(parser::parse_line(sim::format_event(trace.events[i]), i + 1));
  }
  return features::extract_features(parser::filter_send_events(records), trace.truth);
}

TrainOutcome train_model(const Prepared& data, const ModelConfig& config) {
  cnn::Hyper hyper;
  hyper.window = config.window;
  hyper.activation = config.activation;
  auto model = cnn::CnnModel::initialize(hyper, derive_seed(config.train.seed, "cnn/init"));
  const auto start = std::chrono::steady_clock::now();
  auto result = cnn::train(std::move(model), data.train, config.train);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(result.model), std::move(result.epoch_loss), elapsed.count()};
}

TrainOutcome train_model(std::span<const features::FeatureRow> rows, const ModelConfig& config) {
  return train_model(prepare(rows, config), config);
}

eval::EvalReport evaluate_model(const cnn::CnnModel& model, const Prepared& data,
                                const ModelConfig& config) {
  const auto scores = cnn::forward(model, data.test.x);
  const auto preds = cnn::threshold_scores(scores, config.threshold);
  auto report = eval::build_report(preds, data.test.y, data.test.sample_mote, data.truth);
  ModelConfig echo = config;
  echo.window = model.hyper.window;
  echo.activation = model.hyper.activation;
  report.config = eval_echo(echo);
  return report;
}

eval::EvalReport evaluate_model(const cnn::CnnModel& model,
                                std::span<const features::FeatureRow> rows,
                                const ModelConfig& config) {
  ModelConfig c = config;
  c.window = model.hyper.window;
  c.activation = model.hyper.activation;
  return evaluate_model(model, prepare(rows, c), c);
}

std::vector<eval::SweepRow> activation_sweep(std::span<const features::FeatureRow> rows,
                                             const ModelConfig& config) {
  const Prepared data = prepare(rows, config);
  std::vector<eval::SweepRow> table;
  for (auto kind : cnn::kAllActivations) {
    ModelConfig c = config;
    c.activation = kind;
    try {
      const auto outcome = train_model(data, c);
      const auto report = evaluate_model(outcome.model, data, c);
      table.push_back({kind, report.accuracy, report.error_rate});
    } catch (const Error& e) {
      throw Error(e.kind(), "activation " + std::string(cnn::to_string(kind)) + ": " + e.what());
    }
  }
  return table;
}

std::string version_string() {
  return std::string("hiot ") + kVersion + " (model format HIOT" +
         std::to_string(cnn::kModelFormatVersion) + ")";
}

FileDigest digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return {path, hex64(fnv1a64(bytes))};
}

void write_manifest(const std::filesystem::path& path, std::string_view command,
                    const RunConfig& config, std::span<const std::filesystem::path> inputs,
                    std::span<const std::filesystem::path> outputs) {
  // Paths relative to the manifest keep a run directory relocatable.
  const auto base = std::filesystem::absolute(path).parent_path();
  auto digests = [&base](std::span<const std::filesystem::path> files) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : files) {
      const auto d = digest_file(f);
      const auto rel = std::filesystem::absolute(f).lexically_proximate(base);
      arr.push_back({{"path", rel.generic_string()}, {"fnv1a64", d.fnv1a64}});
    }
    return arr;
  };
  const std::uint64_t train_seed = config.model.train.seed;
  nlohmann::json j = {
      {"tool", "hiot"},
      {"version", kVersion},
      {"model_format", cnn::kModelFormatVersion},
      {"command", std::string(command)},
      {"config", to_json(config)},
      {"seeds",
       {{"sim", config.sim.seed},
        {"sim_derivation", "per mote: splitmix64(seed ^ fnv1a64(\"sim/mote/<id>\"))"},
        {"train", train_seed},
        {"cnn_init", derive_seed(train_seed, "cnn/init")},
        {"cnn_shuffle", derive_seed(train_seed, "cnn/shuffle")}}},
      {"inputs", digests(inputs)},
      {"outputs", digests(outputs)},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace hiot::pipeline
