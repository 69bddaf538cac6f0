// Copyright 2026 The TJF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"
#include "tjf/synthetic.hpp"
#include "tjf/trainer.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <cstring>
#include <unistd.h>

namespace
{
using namespace tjf;
namespace fs = std::filesystem;

ModelConfig tiny_config()
{
  ModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_encoder_layers = 1;
  c.n_anchors = 4;
  c.k_modes = 3;
  c.max_neighbors = 4;
  c.map_query.max_segments = 8;
  return c;
}

std::vector<Scenario> corpus(std::size_t n, std::uint64_t seed)
{
  SynthConfig cfg;
  cfg.n_scenarios = n;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

std::string read_bytes(const fs::path & p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class TempDir
{
public:
  TempDir()
  {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tjf_trainer_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string & name) const { return path_ / name; }

private:
  fs::path path_;
};

template <typename F>
Error capture(F && f)
{
  try {
    f();
  } catch (const Error & e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::IoError, "none");
}

TEST(MakeBatch, SingleScenarioEqualsUnbatchedFeatures)
{
  const ModelConfig cfg = tiny_config();
  const Scenario s = corpus(1, 1).front();
  const Batch b = make_batch({s}, cfg);
  const FeatureBundle ref = build_focal_bundle(s, cfg);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.items[0].history_rows, ref.history_rows);
  EXPECT_EQ(b.items[0].interaction_rows, ref.interaction_rows);
  EXPECT_EQ(b.items[0].lane_rows, ref.lane_rows);
  EXPECT_EQ(b.items[0].agent_mask, ref.agent_mask);
  EXPECT_EQ(b.items[0].gt_future, ref.gt_future);
}

TEST(MakeBatch, PadsAgentAxisWithMask)
{
  const ModelConfig cfg = tiny_config();
  const Scenario one =
    test::single_agent_scenario(test::straight_track("a", ObjectType::Vehicle, 0, 0, 0, 5));
  Scenario three = one;
  three.scenario_id = "three";
  three.tracks.push_back(test::straight_track("b", ObjectType::Vehicle, 5, 3, 0, 5));
  three.tracks.push_back(test::straight_track("c", ObjectType::Cyclist, -5, -3, 0, 4));
  const Batch b = make_batch({one, three}, cfg);
  EXPECT_EQ(b.n_agents, 3u);
  EXPECT_EQ(b.items[0].agent_mask, (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(b.items[1].agent_mask, (std::vector<std::uint8_t>{1, 1, 1}));
  const FeatureBundle ref = build_focal_bundle(one, cfg);
  const std::size_t w = ref.history * kHistoryFeatureWidth;
  for (std::size_t i = 0; i < w; ++i) EXPECT_EQ(b.items[0].history_rows.data[i], ref.history_rows.data[i]);
  for (std::size_t i = w; i < 3 * w; ++i) EXPECT_EQ(b.items[0].history_rows.data[i], 0.0f);
}

TEST(MakeBatch, MixedHorizonsThrow)
{
  const ModelConfig cfg = tiny_config();
  std::vector<Scenario> s = corpus(2, 2);
  s[1].horizon.history = 10;
  EXPECT_EQ(capture([&] { make_batch(s, cfg); }).code(), ErrorCode::MixedHorizons);
}

TEST(MakeBatch, BatchedForwardMatchesPerScenario)
{
  const ModelConfig cfg = tiny_config();
  nn::ParameterStore store;
  init_forecaster_parameters(store, cfg, 3);
  const Forecaster net(cfg, store);
  const std::vector<Scenario> data = corpus(6, 3);
  const Batch b = make_batch(data, cfg);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ForecastOutput alone = net.predict(build_focal_bundle(data[i], cfg));
    const ForecastOutput batched = net.predict(b.items[i]);
    for (std::size_t j = 0; j < alone.trajectories.size(); ++j) {
      EXPECT_NEAR(alone.trajectories.data[j], batched.trajectories.data[j], 1e-5);
    }
    for (std::size_t j = 0; j < alone.probabilities.size(); ++j) {
      EXPECT_NEAR(alone.probabilities[j], batched.probabilities[j], 1e-5);
    }
  }
}

TEST(BatchLoss, EqualsMeanOfPerScenarioLosses)
{
  const ModelConfig cfg = tiny_config();
  nn::ParameterStore store;
  init_forecaster_parameters(store, cfg, 4);
  const Forecaster net(cfg, store);
  const std::vector<Scenario> data = corpus(5, 4);
  const Batch b = make_batch(data, cfg);
  double mean_alone = 0, mean_padded = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    nn::Tape t1, t2;
    mean_alone += t1.value(forecaster_loss(t1, net, build_focal_bundle(data[i], cfg), LossWeights{}))[0];
    mean_padded += t2.value(forecaster_loss(t2, net, b.items[i], LossWeights{}))[0];
  }
  mean_alone /= static_cast<double>(data.size());
  mean_padded /= static_cast<double>(data.size());
  nn::Tape tape;
  const double batched = tape.value(batch_loss(tape, net, b, LossWeights{}))[0];
  EXPECT_NEAR(batched, mean_alone, 1e-5 * std::max(1.0, mean_alone));
  EXPECT_NEAR(mean_padded, mean_alone, 1e-5 * std::max(1.0, mean_alone));
}

TEST(Train, EmptyDatasetThrows)
{
  EXPECT_EQ(capture([] { train({}, tiny_config(), TrainConfig{}); }).code(), ErrorCode::EmptyDataset);
}

TEST(Train, NonFiniteLossReportsStep)
{
  AgentTrack t = test::straight_track("a", ObjectType::Vehicle, 0, 0, 0, 5);
  for (std::size_t i = 15; i < t.states.size(); ++i) t.states[i].pose.x = 1e25;
  TrainConfig tc;
  tc.epochs = 1;
  const Error e = capture([&] { train({test::single_agent_scenario(t)}, tiny_config(), tc); });
  EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
  EXPECT_NE(e.detail().find("step 0"), std::string::npos) << e.detail();
}

TEST(Train, LogHasOneTabSeparatedLinePerEpoch)
{
  TrainConfig tc;
  tc.epochs = 3;
  std::vector<std::string> lines;
  const TrainResult r = train(corpus(4, 5), tiny_config(), tc, [&](const EpochLog & e) {
    lines.push_back(format_epoch_log(e));
  });
  ASSERT_EQ(lines.size(), 3u);
  ASSERT_EQ(r.log.size(), 3u);
  const std::regex num("-?[0-9]+\\.[0-9]{6}");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> f;
    std::stringstream ss(lines[i]);
    for (std::string tok; std::getline(ss, tok, '\t');) f.push_back(tok);
    ASSERT_EQ(f.size(), 6u) << lines[i];
    EXPECT_EQ(f[0], std::to_string(i + 1));
    for (std::size_t k = 1; k < 6; ++k) EXPECT_TRUE(std::regex_match(f[k], num)) << f[k];
    const EpochLog & e = r.log[i];
    EXPECT_NEAR(e.mean.total, e.mean.anchor_reg + e.mean.anchor_cls + e.mean.pred_reg + e.mean.pred_cls,
                1e-4 * e.mean.total);
  }
}

TEST(Train, SameSeedGivesByteIdenticalCheckpoints)
{
  TempDir dir;
  const std::vector<Scenario> data = corpus(5, 6);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 2;
  tc.seed = 9;
  save_checkpoint(train(data, tiny_config(), tc).store, tiny_config(), dir / "a.ckpt");
  save_checkpoint(train(data, tiny_config(), tc).store, tiny_config(), dir / "b.ckpt");
  EXPECT_EQ(read_bytes(dir / "a.ckpt"), read_bytes(dir / "b.ckpt"));
  tc.seed = 10;
  save_checkpoint(train(data, tiny_config(), tc).store, tiny_config(), dir / "c.ckpt");
  EXPECT_NE(read_bytes(dir / "a.ckpt"), read_bytes(dir / "c.ckpt"));
}

TEST(Train, OverfitsSingleScenario)
{
  TrainConfig tc;
  tc.epochs = 200;
  const TrainResult r = train(corpus(1, 7), tiny_config(), tc);
  ASSERT_EQ(r.log.size(), 200u);
  EXPECT_LT(r.log.back().mean.total, r.log.front().mean.total);
  for (std::size_t e = 10; e < r.log.size(); ++e) {
    EXPECT_LE(r.log[e].mean.total, r.log[e - 1].mean.total) << "epoch " << e + 1;
  }
}

TEST(Checkpoint, SaveLoadIsBitExact)
{
  TempDir dir;
  const ModelConfig cfg = tiny_config();
  nn::ParameterStore store;
  init_forecaster_parameters(store, cfg, 11);
  save_checkpoint(store, cfg, dir / "m.ckpt");
  const LoadedModel m = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(m.config, cfg);
  ASSERT_EQ(m.store.size(), store.size());
  for (const auto & [name, p] : store.params()) {
    const auto & q = m.store.get(name).value;
    ASSERT_EQ(q.shape, p.value.shape);
    EXPECT_EQ(std::memcmp(q.data.data(), p.value.data.data(), p.value.data.size() * sizeof(float)), 0);
  }
}

TEST(Checkpoint, TruncatedFileIsCorrupt)
{
  TempDir dir;
  const ModelConfig cfg = tiny_config();
  nn::ParameterStore store;
  init_forecaster_parameters(store, cfg, 12);
  save_checkpoint(store, cfg, dir / "m.ckpt");
  const std::string bytes = read_bytes(dir / "m.ckpt");
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    write_text_file(dir / "t.ckpt", bytes.substr(0, cut));
    EXPECT_EQ(capture([&] { load_checkpoint(dir / "t.ckpt"); }).code(), ErrorCode::CorruptCheckpoint) << cut;
  }
}

TEST(Checkpoint, HeaderMismatchNamesField)
{
  TempDir dir;
  const ModelConfig cfg = tiny_config();
  nn::ParameterStore store;
  init_forecaster_parameters(store, cfg, 13);
  save_checkpoint(store, cfg, dir / "m.ckpt");
  EXPECT_NO_THROW(load_checkpoint(dir / "m.ckpt", cfg));
  ModelConfig other = cfg;
  other.k_modes = 2;
  Error e = capture([&] { load_checkpoint(dir / "m.ckpt", other); });
  EXPECT_EQ(e.code(), ErrorCode::CorruptCheckpoint);
  EXPECT_EQ(e.detail(), "k_modes");
  other = cfg;
  other.d_model = 32;
  e = capture([&] { load_checkpoint(dir / "m.ckpt", other); });
  EXPECT_EQ(e.detail(), "d_model");
}

TEST(Checkpoint, ParameterShapeMismatchIsCorrupt)
{
  TempDir dir;
  const ModelConfig cfg = tiny_config();
  ModelConfig bigger = cfg;
  bigger.d_model = 32;
  nn::ParameterStore store;
  init_forecaster_parameters(store, bigger, 14);
  save_checkpoint_file(store, cfg.to_config().fields(), dir / "m.ckpt");
  EXPECT_EQ(capture([&] { load_checkpoint(dir / "m.ckpt"); }).code(), ErrorCode::CorruptCheckpoint);
}

TEST(TrainConfig, ParsesAndValidates)
{
  KeyValueConfig c;
  c.set("epochs", "7");
  c.set("lr", "0.01");
  c.set("batch_size", "4");
  const TrainConfig t = TrainConfig::from_config(c);
  EXPECT_EQ(t.epochs, 7u);
  EXPECT_EQ(t.batch_size, 4u);
  EXPECT_DOUBLE_EQ(t.lr, 0.01);
  EXPECT_EQ(TrainConfig{}.batch_size, 12u);
  c.set("lr", "0");
  EXPECT_EQ(capture([&] { TrainConfig::from_config(c); }).code(), ErrorCode::InvalidConfig);
  KeyValueConfig u;
  u.set("epoch", "3");
  EXPECT_THROW(TrainConfig::from_config(u), Error);
}

}  // namespace
