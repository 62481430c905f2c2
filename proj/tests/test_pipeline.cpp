#include <gtest/gtest.h>

#include <fstream>

#include "hiot/error.hpp"
#include "hiot/pipeline.hpp"
#include "test_support.hpp"

using namespace hiot;

namespace {

pipeline::RunConfig small_config(std::uint64_t seed = 7) {
  pipeline::RunConfig c;
  c.sim.seed = seed;
  c.sim.duration = 900.0;
  c.model.train.seed = seed;
  c.model.train.epochs = 2;
  return c;
}

}  // namespace

TEST(Pipeline, ConfigDefaultsAndSeedInheritance) {
  const auto c = pipeline::run_config_from_json(nlohmann::json{{"seed", 9u}});
  EXPECT_EQ(c.sim.seed, 9u);
  EXPECT_EQ(c.model.train.seed, 9u);
  EXPECT_EQ(c.model.window, 10u);
  EXPECT_FALSE(c.lenient_parse);
  const auto d = pipeline::run_config_from_json(
      nlohmann::json{{"seed", 9u}, {"model", {{"seed", 3u}, {"activation", "tanh"}}}});
  EXPECT_EQ(d.model.train.seed, 3u);
  EXPECT_EQ(d.model.activation, cnn::OutputActivation::Tanh);
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  auto c = small_config();
  c.model.activation = cnn::OutputActivation::Relu;
  c.lenient_parse = true;
  const auto back = pipeline::run_config_from_json(pipeline::to_json(c));
  EXPECT_EQ(pipeline::to_json(back), pipeline::to_json(c));
}

TEST(Pipeline, ConfigErrorsAreConfigKind) {
  const std::vector<nlohmann::json> bad{
      {{"sede", 1}},
      {{"model", {{"activation", "gelu"}}}},
      {{"model", {{"window", 1}}}},
      {{"model", {{"train_frac", 1.0}}}},
      {{"model", {{"epochs", -1}}}},
      {{"duration", "long"}},
  };
  for (const auto& j : bad) {
    try {
      pipeline::run_config_from_json(j);
      ADD_FAILURE() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << j.dump() << " -> " << e.what();
    }
  }
}

TEST(Pipeline, LoadRunConfigErrors) {
  const auto dir = hiot::testing::temp_dir("pipe_cfg");
  std::ofstream(dir / "bad.json") << "{ not json";
  try {
    pipeline::load_run_config(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  try {
    pipeline::load_run_config(dir / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Pipeline, ManifestIsAcceptedAsConfig) {
  const auto dir = hiot::testing::temp_dir("pipe_manifest");
  auto c = small_config(11);
  c.model.activation = cnn::OutputActivation::Tanh;
  std::ofstream(dir / "in.txt") << "abc";
  const std::vector<std::filesystem::path> inputs{dir / "in.txt"};
  pipeline::write_manifest(dir / "m.json", "test", c, inputs, {});
  const auto back = pipeline::load_run_config(dir / "m.json");
  EXPECT_EQ(pipeline::to_json(back), pipeline::to_json(c));

  std::ifstream in(dir / "m.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("command"), "test");
  EXPECT_EQ(j.at("inputs").at(0).at("fnv1a64"), pipeline::digest_file(dir / "in.txt").fnv1a64);
}

TEST(Pipeline, DigestMatchesKnownFnvVector) {
  const auto dir = hiot::testing::temp_dir("pipe_digest");
  std::ofstream(dir / "a.txt", std::ios::binary) << "a";
  EXPECT_EQ(pipeline::digest_file(dir / "a.txt").fnv1a64, "af63dc4c8601ec8c");
}

TEST(Pipeline, StagedFilesMatchInMemoryExtraction) {
  const auto dir = hiot::testing::temp_dir("pipe_staged");
  const auto c = small_config();
  const auto trace = sim::simulate(c.sim);
  sim::write_trace(trace.events, dir / "trace.log");
  sim::write_ground_truth(trace.truth, dir / "truth.csv");
  const auto from_files = pipeline::extract(dir / "trace.log", dir / "truth.csv", false);
  const auto in_memory = pipeline::extract(trace);
  EXPECT_EQ(from_files, in_memory);
  features::write_features(from_files, dir / "f.csv");
  EXPECT_EQ(features::read_features(dir / "f.csv"), in_memory);
}

TEST(Pipeline, PrepareUsesTrainOnlyStatistics) {
  const auto c = small_config();
  const auto rows = pipeline::extract(sim::simulate(c.sim));
  const auto p = pipeline::prepare(rows, c.model);
  EXPECT_EQ(p.split.train.size() + p.split.test.size(), rows.size());
  const auto refit = dataset::fit_scaler(dataset::window(p.split.train, c.model.window, 1));
  EXPECT_EQ(refit.mean, p.scaler.mean);
  EXPECT_EQ(refit.stddev, p.scaler.stddev);
}

TEST(Pipeline, TrainEvaluateIsDeterministic) {
  const auto c = small_config();
  const auto rows = pipeline::extract(sim::simulate(c.sim));
  const auto a = pipeline::train_model(rows, c.model);
  const auto b = pipeline::train_model(rows, c.model);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.epoch_loss.size(), 2u);
  const auto ra = pipeline::evaluate_model(a.model, rows, c.model);
  const auto rb = pipeline::evaluate_model(b.model, rows, c.model);
  EXPECT_EQ(eval::to_json(ra).dump(), eval::to_json(rb).dump());
  EXPECT_EQ(ra.config.at("window"), 10);
}

TEST(Pipeline, SweepCoversAllActivations) {
  const auto c = small_config();
  const auto rows = pipeline::extract(sim::simulate(c.sim));
  auto model_cfg = c.model;
  model_cfg.train.epochs = 1;
  const auto sweep = pipeline::activation_sweep(rows, model_cfg);
  ASSERT_EQ(sweep.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(sweep[i].activation, cnn::kAllActivations[i]);
    EXPECT_NEAR(sweep[i].accuracy + sweep[i].error_rate, 100.0, 1e-12);
  }
}

TEST(Pipeline, VersionString) {
  EXPECT_NE(pipeline::version_string().find("HIOT1"), std::string::npos);
}
