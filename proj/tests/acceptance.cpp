// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "hiot/cnn.hpp"
#include "hiot/dataset.hpp"
#include "hiot/error.hpp"
#include "hiot/eval.hpp"
#include "hiot/features.hpp"
#include "hiot/parser.hpp"
#include "hiot/pipeline.hpp"
#include "hiot/sim.hpp"
#include "test_support.hpp"

using namespace hiot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool rows_bitwise_equal(const features::FeatureRow& a, const features::FeatureRow& b) {
  return a.event_index == b.event_index && a.mote == b.mote && same_bits(a.time, b.time) &&
         same_bits(a.interval, b.interval) && same_bits(a.psi, b.psi) && same_bits(a.avg_psi, b.avg_psi) &&
         a.previous_sender == b.previous_sender && a.label == b.label;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(20240101);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    cnn::Hyper h;
    h.window = 8;
    h.activation = cnn::kAllActivations[static_cast<std::size_t>(i) % 4];
    const auto m = cnn::CnnModel::initialize(h, rng());
    const auto x = hiot::testing::random_tensor(4, 8, 5, rng);
    const auto y = hiot::testing::random_labels(4, rng);
    worst = std::max(worst, cnn::grad_check(m, x, y));
  }
  bool softmax_zero = true;
  for (int i = 0; i < 20; ++i) {
    cnn::Hyper h;
    h.window = 8;
    h.activation = cnn::OutputActivation::Softmax;
    const auto m = hiot::testing::random_model(h, rng);
    const auto g = cnn::backward(m, hiot::testing::random_tensor(4, 8, 5, rng), hiot::testing::random_labels(4, rng));
    for (double v : g.conv_weights) softmax_zero &= v == 0.0;
    for (double v : g.conv_bias) softmax_zero &= v == 0.0;
    for (double v : g.dense_weights) softmax_zero &= v == 0.0;
    softmax_zero &= g.dense_bias == 0.0;
  }
  return {worst < 1e-5 && softmax_zero,
          fmt("max relative error %.3g over 20 pairs; softmax-head gradients all zero: %s", worst,
              softmax_zero ? "yes" : "no")};
}

Outcome feature_oracle() {
  std::mt19937_64 rng(777);
  std::size_t total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto trace = sim::simulate(hiot::testing::random_sim_config(rng));
    const auto sends = hiot::testing::send_records(trace, 250);  // 250 sends + 250 receptions
    const auto fast = features::extract_features(sends, trace.truth);
    const auto slow = hiot::testing::brute_force_features(sends, trace.truth);
    if (fast.size() != slow.size()) return {false, fmt("trace %d: %zu rows vs %zu", trial, fast.size(), slow.size())};
    for (std::size_t i = 0; i < fast.size(); ++i) {
      if (!rows_bitwise_equal(fast[i], slow[i])) return {false, fmt("trace %d row %zu differs", trial, i)};
    }
    total += fast.size();
  }
  return {true, fmt("50 traces, %zu rows bitwise equal to the brute-force oracle", total)};
}

Outcome split_no_leakage() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> count(2, 1000);
  std::uniform_real_distribution<double> frac_dist(0.01, 0.99);
  std::uniform_real_distribution<double> value(0.0, 100.0);
  std::size_t scaler_checks = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = count(rng);
    const double frac = frac_dist(rng);
    std::vector<features::FeatureRow> rows(n);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      t += std::floor(value(rng)) / 10.0;  // ties allowed
      rows[i].event_index = i;
      rows[i].mote = 2;
      rows[i].time = t;
      rows[i].interval = value(rng);
      rows[i].psi = value(rng);
      rows[i].avg_psi = value(rng);
      rows[i].previous_sender = 2;
    }
    const auto split = dataset::sequential_split(rows, frac);
    const long double exact = static_cast<long double>(frac) * static_cast<long double>(n);
    const auto k = split.train.size();
    if (!(static_cast<long double>(k) <= exact && exact < static_cast<long double>(k + 1)) ||
        k + split.test.size() != n) {
      return {false, fmt("n=%zu frac=%.6f gave train size %zu", n, frac, k)};
    }
    if (!split.train.empty() && !split.test.empty() && split.train.back().time > split.test.front().time) {
      return {false, fmt("n=%zu: train time exceeds test time", n)};
    }
    for (const auto& r : split.test) {
      if (!split.train.empty() && r.time < split.train.back().time) return {false, "test row precedes train"};
    }

    if (k < 2 || split.test.empty()) continue;
    const auto base = dataset::fit_scaler(dataset::window(split.train, 2, 1));
    auto perturbed_test = rows;
    for (std::size_t i = k; i < n; ++i) perturbed_test[i].psi += 1000.0;
    const auto same = dataset::fit_scaler(dataset::window(dataset::sequential_split(perturbed_test, frac).train, 2, 1));
    if (same.mean != base.mean || same.stddev != base.stddev) {
      return {false, fmt("n=%zu: scaler changed when only test rows changed", n)};
    }
    auto perturbed_train = rows;
    perturbed_train[0].psi += 1000.0;
    const auto moved = dataset::fit_scaler(dataset::window(dataset::sequential_split(perturbed_train, frac).train, 2, 1));
    if (moved.mean == base.mean) return {false, fmt("n=%zu: scaler ignored a train row change", n)};
    ++scaler_checks;
  }
  return {true, fmt("300 random (n, frac) splits; %zu scaler isolation checks", scaler_checks)};
}

pipeline::RunConfig default_run(std::uint64_t seed) {
  pipeline::RunConfig c;
  c.sim.seed = seed;
  c.model.train.seed = seed;
  return c;
}

Outcome reproduction() {
  std::size_t passing = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = default_run(seed);
    const auto rows = pipeline::extract(sim::simulate(c.sim));
    const auto data = pipeline::prepare(rows, c.model);
    const auto trained = pipeline::train_model(data, c.model);
    const auto report = pipeline::evaluate_model(trained.model, data, c.model);
    passing += report.accuracy >= 90.0;
    per_seed += fmt("%sseed %llu: %.1f%% (%zu nodes)", seed == 1 ? "" : ", ",
                    static_cast<unsigned long long>(seed), report.accuracy, report.nodes.size());
  }
  return {passing >= 4, fmt("%zu/5 seeds >= 90%%; ", passing) + per_seed};
}

Outcome table_properties() {
  const auto c = default_run(42);
  const auto rows = pipeline::extract(sim::simulate(c.sim));
  const auto data = pipeline::prepare(rows, c.model);

  auto run = [&](cnn::OutputActivation act) {
    auto m = c.model;
    m.activation = act;
    return pipeline::evaluate_model(pipeline::train_model(data, m).model, data, m);
  };
  const auto softmax = run(cnn::OutputActivation::Softmax);
  const auto sigmoid = run(cnn::OutputActivation::Sigmoid);

  std::size_t positives = 0;
  for (const auto& n : softmax.nodes) positives += n.truth == Label::Malicious;
  const double nodes = static_cast<double>(softmax.nodes.size());
  const double prevalence = 100.0 * static_cast<double>(positives) / nodes;
  const bool a = std::abs(softmax.accuracy - prevalence) <= 100.0 / nodes + 1e-9;
  const bool b = sigmoid.accuracy > softmax.accuracy;

  bool c_ok = eval::error_rate(92.0) == 8.0 && eval::error_rate(47.0) == 53.0;
  for (double acc : {sigmoid.accuracy, softmax.accuracy}) c_ok &= eval::error_rate(acc) == 100.0 - acc;
  c_ok &= sigmoid.error_rate == 100.0 - sigmoid.accuracy && softmax.error_rate == 100.0 - softmax.accuracy;

  return {a && b && c_ok,
          fmt("(a) softmax %.1f%% vs prevalence %.1f%%: %s; (b) sigmoid %.1f%% > softmax: %s; (c) %s",
              softmax.accuracy, prevalence, a ? "ok" : "FAIL", sigmoid.accuracy, b ? "ok" : "FAIL",
              c_ok ? "ok" : "FAIL")};
}

Outcome parser_round_trip() {
  const auto dir = hiot::testing::temp_dir("acceptance_parser");
  std::mt19937_64 rng(4242);
  std::size_t lines = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto trace = sim::simulate(hiot::testing::random_sim_config(rng));
    sim::write_trace(trace.events, dir / "t.log");
    const auto parsed = parser::parse_trace_file(dir / "t.log");
    if (parsed.records.size() != trace.events.size() || parsed.skipped != 0) {
      return {false, fmt("trace %d: %zu records for %zu events", trial, parsed.records.size(), trace.events.size())};
    }
    for (std::size_t i = 0; i < parsed.records.size(); ++i) {
      const auto& e = trace.events[i];
      const auto& r = parsed.records[i];
      const MoteId logger = e.kind == sim::EventKind::ClientSend ? e.sender : e.receiver;
      if (r.time != e.time || r.mote != logger || parser::format_record(r) != sim::format_event(e)) {
        return {false, fmt("trace %d line %zu does not round-trip", trial, i + 1)};
      }
    }
    lines += parsed.records.size();
  }

  const std::vector<std::string> malformed{
      "",
      "00:01.000",
      "00:01.000\tID:2",
      "00:01.000\tID:2\t",
      "0:01.000\tID:2\tDATA send to 1 'x'",
      "00:61.000\tID:2\tDATA send to 1 'x'",
      "00:01.00\tID:2\tDATA send to 1 'x'",
      "00:01.000\tID:0\tDATA send to 1 'x'",
      "00:01.000\tNODE:2\tDATA send to 1 'x'",
      "00:01.000 ID:2 DATA send to 1 'x'",
  };
  const std::string good = "00:00.500\tID:3\tDATA send to 1 'temp=20.0,hum=40.0'";
  std::size_t named = 0;
  for (std::size_t i = 0; i < malformed.size(); ++i) {
    std::istringstream in(good + "\n" + good + "\n" + malformed[i] + "\n" + good + "\n");
    try {
      parser::parse_trace(in);
    } catch (const ParseError& e) {
      if (e.line_number() == 3 && std::string(e.what()).find("line 3") != std::string::npos) ++named;
      continue;
    } catch (const Error&) {
    }
  }
  return {named == malformed.size(),
          fmt("100 traces (%zu lines) round-trip; %zu/10 malformed lines rejected with their line number",
              lines, named)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HIOT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto dir = hiot::testing::temp_dir("acceptance_determinism");
  for (const char* run : {"a", "b"}) {
    const int rc = run_cli("reproduce --out " + (dir / run).string());
    if (rc != 0) return {false, fmt("reproduce exited with %d", rc)};
  }
  std::string differing;
  for (const char* name : {"trace.log", "ground_truth.csv", "features.csv", "model.hiot", "report.json",
                           "baseline.json", "reproduce.manifest.json"}) {
    if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) differing += std::string(" ") + name;
  }
  if (!differing.empty()) return {false, "files differ:" + differing};
  return {true, "two reproduce runs produced byte-identical model, reports, trace and manifest"};
}

Outcome baseline_oracle() {
  const auto c = default_run(42);
  const auto trace = sim::simulate(c.sim);
  const auto rows = pipeline::extract(trace);
  const auto full = eval::baseline_interval_threshold(rows, trace.truth, 10.0);
  const auto test_rows = dataset::sequential_split(rows, c.model.train_frac).test;
  const auto held_out = eval::baseline_interval_threshold(test_rows, trace.truth, 10.0);
  return {full.accuracy == 100.0 && held_out.accuracy == 100.0,
          fmt("mean-psi < 10 s classifier: %.1f%% over %zu nodes (full trace), %.1f%% over %zu nodes (test split)",
              full.accuracy, full.nodes.size(), held_out.accuracy, held_out.nodes.size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;  // 0 means no runtime bound
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"1 gradient correctness", 10.0, gradient_correctness},
      {"2 feature oracle equivalence", 30.0, feature_oracle},
      {"3 split and no-leakage", 10.0, split_no_leakage},
      {"4 end-to-end synthetic reproduction", 300.0, reproduction},
      {"5 activation table properties", 0.0, table_properties},
      {"6 parser round trip", 5.0, parser_round_trip},
      {"7 determinism", 0.0, determinism},
      {"8 baseline oracle", 0.0, baseline_oracle},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds >= c.budget_seconds) {
      out.pass = false;
      out.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    failures += !out.pass;
    std::printf("%s criterion %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
