#include "hiot/hiot.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "hiot/error.hpp"
#include "hiot/pipeline.hpp"

struct hiot_config {
  hiot::pipeline::RunConfig value;
};

struct hiot_features {
  std::vector<hiot::features::FeatureRow> rows;
};

struct hiot_model {
  hiot::cnn::CnnModel model;
  std::vector<double> epoch_loss;
  double seconds = 0.0;
};

struct hiot_report {
  hiot::eval::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

hiot_status fail(hiot_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
hiot_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HIOT_OK;
  } catch (const hiot::Error& e) {
    return fail(static_cast<hiot_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HIOT_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HIOT_ERROR_INTERNAL, e.what());
  }
}

bool any_null() { return false; }
template <typename T, typename... Rest>
bool any_null(const T* p, const Rest*... rest) {
  return p == nullptr || any_null(rest...);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hiot::eval::ReportFormat to_format(hiot_format f) {
  return f == HIOT_FORMAT_JSON ? hiot::eval::ReportFormat::Json : hiot::eval::ReportFormat::Text;
}

std::vector<std::filesystem::path> to_paths(const char* const* items, std::size_t n) {
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (items[i] == nullptr) throw hiot::Error(hiot::ErrorKind::Io, "null path in manifest file list");
    out.emplace_back(items[i]);
  }
  return out;
}

constexpr const char* kNullArgument = "null argument";

}  // namespace

extern "C" {

const char* hiot_version(void) {
  static const std::string version = hiot::pipeline::version_string();
  return version.c_str();
}

const char* hiot_last_error(void) { return g_last_error.c_str(); }

void hiot_string_free(char* s) { std::free(s); }

hiot_status hiot_config_default(hiot_config** out) {
  if (out == nullptr) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { *out = new hiot_config{}; });
}

hiot_status hiot_config_load(const char* path, hiot_config** out) {
  if (any_null(path, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { *out = new hiot_config{hiot::pipeline::load_run_config(path)}; });
}

hiot_status hiot_config_set_seed(hiot_config* config, uint64_t seed) {
  if (config == nullptr) return fail(HIOT_ERROR_USAGE, kNullArgument);
  config->value.sim.seed = seed;
  config->value.model.train.seed = seed;
  return HIOT_OK;
}

hiot_status hiot_config_set_window(hiot_config* config, size_t window) {
  if (config == nullptr) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    auto model = config->value.model;
    model.window = window;
    model.validate();
    config->value.model = model;
  });
}

hiot_status hiot_config_set_epochs(hiot_config* config, size_t epochs) {
  if (config == nullptr) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    auto model = config->value.model;
    model.train.epochs = epochs;
    model.validate();
    config->value.model = model;
  });
}

hiot_status hiot_config_set_lenient_parse(hiot_config* config, int lenient) {
  if (config == nullptr) return fail(HIOT_ERROR_USAGE, kNullArgument);
  config->value.lenient_parse = lenient != 0;
  return HIOT_OK;
}

hiot_status hiot_config_set_activation(hiot_config* config, const char* name) {
  if (any_null(config, name)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  const auto kind = hiot::cnn::parse_activation(name);
  if (!kind) return fail(HIOT_ERROR_CONFIG, std::string("unknown activation '") + name + "'");
  config->value.model.activation = *kind;
  return HIOT_OK;
}

hiot_status hiot_config_to_json(const hiot_config* config, char** out) {
  if (any_null(config, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { *out = copy_string(hiot::pipeline::to_json(config->value).dump(2) + "\n"); });
}

void hiot_config_free(hiot_config* config) { delete config; }

hiot_status hiot_simulate(const hiot_config* config, const char* trace_path, const char* truth_path,
                          size_t* event_count) {
  if (any_null(config, trace_path, truth_path)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    const auto trace = hiot::sim::simulate(config->value.sim);
    hiot::sim::write_trace(trace.events, trace_path);
    hiot::sim::write_ground_truth(trace.truth, truth_path);
    if (event_count != nullptr) *event_count = trace.events.size();
  });
}

hiot_status hiot_extract(const hiot_config* config, const char* trace_path, const char* truth_path,
                         hiot_features** out) {
  if (any_null(config, trace_path, truth_path, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    *out = new hiot_features{
        hiot::pipeline::extract(trace_path, truth_path, config->value.lenient_parse)};
  });
}

hiot_status hiot_features_load(const char* path, hiot_features** out) {
  if (any_null(path, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { *out = new hiot_features{hiot::features::read_features(path)}; });
}

hiot_status hiot_features_save(const hiot_features* features, const char* path) {
  if (any_null(features, path)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { hiot::features::write_features(features->rows, path); });
}

size_t hiot_features_count(const hiot_features* features) {
  return features == nullptr ? 0 : features->rows.size();
}

void hiot_features_free(hiot_features* features) { delete features; }

hiot_status hiot_train(const hiot_config* config, const hiot_features* features, hiot_model** out) {
  if (any_null(config, features, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    auto outcome = hiot::pipeline::train_model(features->rows, config->value.model);
    *out = new hiot_model{std::move(outcome.model), std::move(outcome.epoch_loss), outcome.seconds};
  });
}

size_t hiot_model_epoch_count(const hiot_model* model) {
  return model == nullptr ? 0 : model->epoch_loss.size();
}

double hiot_model_epoch_loss(const hiot_model* model, size_t epoch) {
  if (model == nullptr || epoch >= model->epoch_loss.size()) return 0.0;
  return model->epoch_loss[epoch];
}

double hiot_model_training_seconds(const hiot_model* model) {
  return model == nullptr ? 0.0 : model->seconds;
}

hiot_status hiot_model_save(const hiot_model* model, const char* path) {
  if (any_null(model, path)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { hiot::cnn::save_model(model->model, path); });
}

hiot_status hiot_model_load(const char* path, hiot_model** out) {
  if (any_null(path, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { *out = new hiot_model{hiot::cnn::load_model(path), {}, 0.0}; });
}

void hiot_model_free(hiot_model* model) { delete model; }

hiot_status hiot_evaluate(const hiot_config* config, const hiot_model* model,
                          const hiot_features* features, hiot_report** out) {
  if (any_null(config, model, features, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    auto report = hiot::pipeline::evaluate_model(model->model, features->rows, config->value.model);
    if (!model->epoch_loss.empty()) report.training_seconds = model->seconds;
    *out = new hiot_report{std::move(report)};
  });
}

hiot_status hiot_baseline(const hiot_config* config, const hiot_features* features,
                          double threshold_seconds, hiot_report** out) {
  if (any_null(config, features, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    const auto split = hiot::dataset::sequential_split(features->rows, config->value.model.train_frac);
    const auto truth = hiot::features::truth_from_rows(features->rows);
    *out = new hiot_report{hiot::eval::baseline_interval_threshold(split.test, truth, threshold_seconds)};
  });
}

double hiot_report_accuracy(const hiot_report* report) {
  return report == nullptr ? 0.0 : report->report.accuracy;
}

double hiot_report_error_rate(const hiot_report* report) {
  return report == nullptr ? 0.0 : report->report.error_rate;
}

hiot_status hiot_report_render(const hiot_report* report, hiot_format format, char** out) {
  if (any_null(report, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    *out = copy_string(hiot::eval::render_report(report->report, to_format(format), true));
  });
}

hiot_status hiot_report_save(const hiot_report* report, hiot_format format, const char* path) {
  if (any_null(report, path)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] { hiot::eval::emit_report(report->report, to_format(format), path); });
}

void hiot_report_free(hiot_report* report) { delete report; }

hiot_status hiot_activation_sweep(const hiot_config* config, const hiot_features* features,
                                  hiot_format format, char** out) {
  if (any_null(config, features, out)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  return guarded([&] {
    const auto table = hiot::pipeline::activation_sweep(features->rows, config->value.model);
    *out = copy_string(hiot::eval::render_sweep(table, to_format(format)));
  });
}

hiot_status hiot_write_manifest(const hiot_config* config, const char* path, const char* command,
                                const char* const* inputs, size_t input_count,
                                const char* const* outputs, size_t output_count) {
  if (any_null(config, path, command)) return fail(HIOT_ERROR_USAGE, kNullArgument);
  if ((input_count > 0 && inputs == nullptr) || (output_count > 0 && outputs == nullptr)) {
    return fail(HIOT_ERROR_USAGE, kNullArgument);
  }
  return guarded([&] {
    hiot::pipeline::write_manifest(path, command, config->value, to_paths(inputs, input_count),
                                   to_paths(outputs, output_count));
  });
}

}  // extern "C"
