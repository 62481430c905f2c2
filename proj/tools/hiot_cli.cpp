// hiot command-line tool. Every stage goes through the C API in libhiot.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hiot/hiot.h"

namespace fs = std::filesystem;

namespace {

struct Deleter {
  void operator()(hiot_config* p) const { hiot_config_free(p); }
  void operator()(hiot_features* p) const { hiot_features_free(p); }
  void operator()(hiot_model* p) const { hiot_model_free(p); }
  void operator()(hiot_report* p) const { hiot_report_free(p); }
  void operator()(char* p) const { hiot_string_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Deleter>;

/// Carries a failed status out of nested helpers to main's exit code.
struct Failure {
  hiot_status status;
};

void check(hiot_status status) {
  if (status != HIOT_OK) {
    std::fprintf(stderr, "hiot: %s\n", hiot_last_error());
    throw Failure{status};
  }
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<std::size_t> epochs;
  bool lenient_parse = false;
  std::string format = "json";

  hiot_format report_format() const { return format == "text" ? HIOT_FORMAT_TEXT : HIOT_FORMAT_JSON; }
  std::string report_ext() const { return format == "text" ? ".txt" : ".json"; }
};

Owned<hiot_config> load_config(const CommonOptions& opt) {
  hiot_config* raw = nullptr;
  check(opt.config.empty() ? hiot_config_default(&raw) : hiot_config_load(opt.config.c_str(), &raw));
  Owned<hiot_config> config(raw);
  if (opt.seed) check(hiot_config_set_seed(config.get(), *opt.seed));
  if (opt.window) check(hiot_config_set_window(config.get(), *opt.window));
  if (opt.epochs) check(hiot_config_set_epochs(config.get(), *opt.epochs));
  if (opt.lenient_parse) check(hiot_config_set_lenient_parse(config.get(), 1));
  return config;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "hiot: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
    throw Failure{HIOT_ERROR_IO};
  }
}

void manifest(const hiot_config* config, const fs::path& path, const char* command,
              const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  std::vector<const char*> in;
  std::vector<const char*> out;
  for (const auto& s : inputs) in.push_back(s.c_str());
  for (const auto& s : outputs) out.push_back(s.c_str());
  check(hiot_write_manifest(config, path.c_str(), command, in.data(), in.size(), out.data(),
                            out.size()));
}

void print_owned(char* text) {
  Owned<char> s(text);
  std::fputs(s.get(), stdout);
}

Owned<hiot_features> simulate_and_extract(const hiot_config* config, const fs::path& dir,
                                          std::vector<std::string>& outputs) {
  const auto trace = (dir / "trace.log").string();
  const auto truth = (dir / "ground_truth.csv").string();
  const auto csv = (dir / "features.csv").string();
  check(hiot_simulate(config, trace.c_str(), truth.c_str(), nullptr));
  hiot_features* raw = nullptr;
  check(hiot_extract(config, trace.c_str(), truth.c_str(), &raw));
  Owned<hiot_features> rows(raw);
  check(hiot_features_save(rows.get(), csv.c_str()));
  outputs.insert(outputs.end(), {trace, truth, csv});
  return rows;
}

void print_losses(const hiot_model* model) {
  for (std::size_t e = 0; e < hiot_model_epoch_count(model); ++e) {
    std::printf("epoch %zu/%zu loss %.6f\n", e + 1, hiot_model_epoch_count(model),
                hiot_model_epoch_loss(model, e));
  }
}

int cmd_simulate(const CommonOptions& opt, const fs::path& out_dir) {
  auto config = load_config(opt);
  ensure_dir(out_dir);
  const auto trace = (out_dir / "trace.log").string();
  const auto truth = (out_dir / "ground_truth.csv").string();
  std::size_t events = 0;
  check(hiot_simulate(config.get(), trace.c_str(), truth.c_str(), &events));
  manifest(config.get(), out_dir / "simulate.manifest.json", "simulate", {}, {trace, truth});
  std::printf("wrote %zu events to %s\n", events, trace.c_str());
  return 0;
}

int cmd_extract(const CommonOptions& opt, const std::string& trace, const std::string& truth,
                const std::string& out_csv) {
  auto config = load_config(opt);
  hiot_features* raw = nullptr;
  check(hiot_extract(config.get(), trace.c_str(), truth.c_str(), &raw));
  Owned<hiot_features> rows(raw);
  check(hiot_features_save(rows.get(), out_csv.c_str()));
  manifest(config.get(), out_csv + ".manifest.json", "extract", {trace, truth}, {out_csv});
  std::printf("wrote %zu feature rows to %s\n", hiot_features_count(rows.get()), out_csv.c_str());
  return 0;
}

int cmd_train(const CommonOptions& opt, const std::string& features, const std::string& model_out) {
  auto config = load_config(opt);
  hiot_features* raw_rows = nullptr;
  check(hiot_features_load(features.c_str(), &raw_rows));
  Owned<hiot_features> rows(raw_rows);
  hiot_model* raw_model = nullptr;
  check(hiot_train(config.get(), rows.get(), &raw_model));
  Owned<hiot_model> model(raw_model);
  print_losses(model.get());
  check(hiot_model_save(model.get(), model_out.c_str()));
  manifest(config.get(), model_out + ".manifest.json", "train", {features}, {model_out});
  std::printf("training seconds %.3f\nwrote %s\n", hiot_model_training_seconds(model.get()),
              model_out.c_str());
  return 0;
}

int cmd_eval(const CommonOptions& opt, const std::string& model_path, const std::string& features,
             const std::string& report_out) {
  auto config = load_config(opt);
  hiot_model* raw_model = nullptr;
  check(hiot_model_load(model_path.c_str(), &raw_model));
  Owned<hiot_model> model(raw_model);
  hiot_features* raw_rows = nullptr;
  check(hiot_features_load(features.c_str(), &raw_rows));
  Owned<hiot_features> rows(raw_rows);
  hiot_report* raw_report = nullptr;
  check(hiot_evaluate(config.get(), model.get(), rows.get(), &raw_report));
  Owned<hiot_report> report(raw_report);
  check(hiot_report_save(report.get(), opt.report_format(), report_out.c_str()));
  manifest(config.get(), report_out + ".manifest.json", "eval", {model_path, features}, {report_out});
  char* text = nullptr;
  check(hiot_report_render(report.get(), HIOT_FORMAT_TEXT, &text));
  print_owned(text);
  return 0;
}

int cmd_reproduce(const CommonOptions& opt, const fs::path& out_dir) {
  auto config = load_config(opt);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  auto rows = simulate_and_extract(config.get(), out_dir, outputs);

  hiot_model* raw_model = nullptr;
  check(hiot_train(config.get(), rows.get(), &raw_model));
  Owned<hiot_model> model(raw_model);
  print_losses(model.get());
  const auto model_path = (out_dir / "model.hiot").string();
  check(hiot_model_save(model.get(), model_path.c_str()));

  hiot_report* raw_report = nullptr;
  check(hiot_evaluate(config.get(), model.get(), rows.get(), &raw_report));
  Owned<hiot_report> report(raw_report);
  const auto report_path = (out_dir / ("report" + opt.report_ext())).string();
  check(hiot_report_save(report.get(), opt.report_format(), report_path.c_str()));

  hiot_report* raw_baseline = nullptr;
  check(hiot_baseline(config.get(), rows.get(), 10.0, &raw_baseline));
  Owned<hiot_report> baseline(raw_baseline);
  const auto baseline_path = (out_dir / ("baseline" + opt.report_ext())).string();
  check(hiot_report_save(baseline.get(), opt.report_format(), baseline_path.c_str()));

  outputs.insert(outputs.end(), {model_path, report_path, baseline_path});
  manifest(config.get(), out_dir / "reproduce.manifest.json", "reproduce", {}, outputs);

  char* text = nullptr;
  check(hiot_report_render(report.get(), HIOT_FORMAT_TEXT, &text));
  print_owned(text);
  std::printf("baseline (mean psi < 10 s) accuracy (%%): %.2f\n", hiot_report_accuracy(baseline.get()));
  return 0;
}

int cmd_activation_sweep(const CommonOptions& opt, const fs::path& out_dir) {
  auto config = load_config(opt);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  auto rows = simulate_and_extract(config.get(), out_dir, outputs);

  char* table = nullptr;
  check(hiot_activation_sweep(config.get(), rows.get(), opt.report_format(), &table));
  Owned<char> owned(table);
  const auto table_path = (out_dir / ("activation_sweep" + opt.report_ext())).string();
  if (std::FILE* f = std::fopen(table_path.c_str(), "wb")) {
    const bool ok = std::fputs(owned.get(), f) >= 0;
    if (std::fclose(f) != 0 || !ok) throw Failure{HIOT_ERROR_IO};
  } else {
    std::fprintf(stderr, "hiot: cannot write %s\n", table_path.c_str());
    throw Failure{HIOT_ERROR_IO};
  }
  outputs.push_back(table_path);
  manifest(config.get(), out_dir / "activation_sweep.manifest.json", "activation-sweep", {}, outputs);

  if (opt.format == "text") {
    std::fputs(owned.get(), stdout);
  } else {
    char* text = nullptr;
    check(hiot_activation_sweep(config.get(), rows.get(), HIOT_FORMAT_TEXT, &text));
    print_owned(text);
  }
  return 0;
}

void add_config(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config, "Run config JSON (or a run manifest)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "Override the run seed (simulation and training)");
}

void add_model_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--window", opt.window, "Events per window (timesteps)");
  cmd->add_option("--epochs", opt.epochs, "Training epochs");
}

void add_format(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--format", opt.format, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Healthcare-IoT DDoS detection: simulate, extract, train, evaluate"};
  app.set_version_flag("--version", std::string(hiot_version()));
  app.require_subcommand(1);

  CommonOptions opt;
  std::string out;
  std::string trace;
  std::string truth;
  std::string features;
  std::string model;

  auto* simulate = app.add_subcommand("simulate", "Generate a trace and ground truth");
  add_config(simulate, opt);
  simulate->add_option("--out", out, "Output directory")->required();

  auto* extract = app.add_subcommand("extract", "Parse a trace and compute feature rows");
  extract->add_option("trace", trace, "Trace log")->required()->check(CLI::ExistingFile);
  extract->add_option("truth", truth, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
  add_config(extract, opt);
  extract->add_flag("--lenient-parse", opt.lenient_parse, "Skip malformed log lines instead of failing");
  extract->add_option("--out", out, "Feature CSV to write")->required();

  auto* train = app.add_subcommand("train", "Split, window, normalize and train the CNN");
  train->add_option("features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  add_config(train, opt);
  add_model_flags(train, opt);
  train->add_option("--out", out, "Model file to write")->required();

  auto* evaluate = app.add_subcommand("eval", "Evaluate a model on the test split");
  evaluate->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  add_config(evaluate, opt);
  add_format(evaluate, opt);
  evaluate->add_option("--out", out, "Report file to write")->required();

  auto* reproduce = app.add_subcommand("reproduce", "simulate -> extract -> train -> eval");
  add_config(reproduce, opt);
  add_model_flags(reproduce, opt);
  add_format(reproduce, opt);
  reproduce->add_flag("--lenient-parse", opt.lenient_parse, "Skip malformed log lines instead of failing");
  reproduce->add_option("--out", out, "Output directory")->required();

  auto* sweep = app.add_subcommand("activation-sweep", "Compare output activations on one dataset");
  add_config(sweep, opt);
  add_model_flags(sweep, opt);
  add_format(sweep, opt);
  sweep->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : HIOT_ERROR_USAGE;
  }

  try {
    if (*simulate) return cmd_simulate(opt, out);
    if (*extract) return cmd_extract(opt, trace, truth, out);
    if (*train) return cmd_train(opt, features, out);
    if (*evaluate) return cmd_eval(opt, model, features, out);
    if (*reproduce) return cmd_reproduce(opt, out);
    if (*sweep) return cmd_activation_sweep(opt, out);
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  }
  return HIOT_ERROR_USAGE;
}
