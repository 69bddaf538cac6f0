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

#ifndef TJF__TRAINER_HPP_
#define TJF__TRAINER_HPP_

#include "tjf/config.hpp"
#include "tjf/error.hpp"
#include "tjf/features.hpp"
#include "tjf/forecaster.hpp"
#include "tjf/nn/checkpoint.hpp"
#include "tjf/nn/tape.hpp"
#include "tjf/nn/tensor.hpp"
#include "tjf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace tjf
{

struct TrainConfig
{
  std::size_t batch_size{12};
  std::size_t epochs{100};
  double lr{1e-3};
  std::uint64_t seed{0};
  LossWeights loss_weights;
  double clip_norm{0.0};  //!< 0 disables gradient clipping
  bool all_agents{false};  //!< supervise every scored agent, not only the focal track

  void validate() const
  {
    if (batch_size < 1) {
      throw Error(ErrorCode::InvalidConfig, "batch_size: must be >= 1");
    }
    if (!(lr > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "lr: must be > 0");
    }
    if (clip_norm < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "clip_norm: must be >= 0");
    }
  }

  static TrainConfig from_config(const KeyValueConfig & c)
  {
    TrainConfig t;
    t.batch_size = c.get_size("batch_size", t.batch_size);
    t.epochs = c.get_size("epochs", t.epochs);
    t.lr = c.get_double("lr", t.lr);
    t.seed = c.get_u64("seed", t.seed);
    t.loss_weights.anchor_reg = c.get_double("w_anchor_reg", t.loss_weights.anchor_reg);
    t.loss_weights.anchor_cls = c.get_double("w_anchor_cls", t.loss_weights.anchor_cls);
    t.loss_weights.pred_reg = c.get_double("w_pred_reg", t.loss_weights.pred_reg);
    t.loss_weights.pred_cls = c.get_double("w_pred_cls", t.loss_weights.pred_cls);
    t.clip_norm = c.get_double("clip_norm", t.clip_norm);
    t.all_agents = c.get_bool("all_agents", t.all_agents);
    c.reject_unknown();
    t.validate();
    return t;
  }
};

/// Feature bundles padded to common agent / neighbor / segment slot counts.
struct Batch
{
  std::vector<FeatureBundle> items;
  std::size_t n_agents{0};
  std::size_t n_neighbors{0};
  std::size_t n_segments{0};

  std::size_t size() const noexcept { return items.size(); }
};

inline Batch pad_batch(const std::vector<FeatureBundle> & bundles)
{
  Batch batch;
  for (const FeatureBundle & b : bundles) {
    batch.n_agents = std::max(batch.n_agents, b.n_agents);
    batch.n_neighbors = std::max(batch.n_neighbors, b.n_neighbors);
    batch.n_segments = std::max(batch.n_segments, b.n_segments);
  }
  batch.items.reserve(bundles.size());
  for (const FeatureBundle & b : bundles) {
    batch.items.push_back(pad_bundle(b, batch.n_agents, batch.n_neighbors, batch.n_segments));
  }
  return batch;
}

/// Focal-agent bundles for each scenario, in input order, padded together.
inline Batch make_batch(const std::vector<Scenario> & scenarios, const ModelConfig & cfg)
{
  std::vector<FeatureBundle> bundles;
  bundles.reserve(scenarios.size());
  for (const Scenario & s : scenarios) {
    if (s.horizon != scenarios.front().horizon) {
      throw Error(ErrorCode::MixedHorizons, "scenario " + s.scenario_id + " differs in H/T");
    }
    bundles.push_back(build_focal_bundle(s, cfg));
  }
  return pad_batch(bundles);
}

/// Agents supervised in a scenario: the focal track, or every agent with a reference state and a valid future step.
inline std::vector<std::string> scored_agents(const Scenario & s, bool all_agents)
{
  if (!all_agents) {
    return {s.focal_agent_id};
  }
  std::vector<std::string> ids{s.focal_agent_id};
  const std::size_t H = s.horizon.history;
  for (const AgentTrack & t : s.tracks) {
    if (t.agent_id == s.focal_agent_id || !t.states[H - 1].valid) {
      continue;
    }
    const bool any_future = std::any_of(
      t.states.begin() + static_cast<std::ptrdiff_t>(H), t.states.end(),
      [](const AgentState & st) { return st.valid; });
    if (any_future) {
      ids.push_back(t.agent_id);
    }
  }
  return ids;
}

/**
 * @brief Mean weighted loss over a batch, recorded on `tape`.
 *
 * Trailing padding is trimmed before the forward pass; masks make padded
 * slots inert, so this changes cost only.
 */
template <typename T>
nn::Var batch_loss(
  nn::BasicTape<T> & tape, const BasicForecaster<T> & model, const Batch & batch,
  const LossWeights & w, LossBreakdown * mean_breakdown = nullptr)
{
  if (batch.items.empty()) {
    throw Error(ErrorCode::EmptyDataset, "empty batch");
  }
  const T inv = T(1) / static_cast<T>(batch.items.size());
  nn::Var total{};
  LossBreakdown acc;
  for (std::size_t i = 0; i < batch.items.size(); ++i) {
    LossBreakdown lb;
    nn::Var l = forecaster_loss(tape, model, trim_bundle(batch.items[i]), w, &lb);
    total = i == 0 ? tape.scale(l, inv) : tape.add(total, tape.scale(l, inv));
    acc.anchor_reg += lb.anchor_reg;
    acc.anchor_cls += lb.anchor_cls;
    acc.pred_reg += lb.pred_reg;
    acc.pred_cls += lb.pred_cls;
    acc.total += lb.total;
  }
  if (mean_breakdown) {
    const double n = static_cast<double>(batch.items.size());
    *mean_breakdown = {acc.anchor_reg / n, acc.anchor_cls / n, acc.pred_reg / n, acc.pred_cls / n,
                       acc.total / n};
  }
  return total;
}

struct EpochLog
{
  std::size_t epoch{0};  //!< 1-based
  LossBreakdown mean;
};

inline std::string format_epoch_log(const EpochLog & e)
{
  char buf[256];
  std::snprintf(
    buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f", e.epoch, e.mean.anchor_reg,
    e.mean.anchor_cls, e.mean.pred_reg, e.mean.pred_cls, e.mean.total);
  return buf;
}

struct TrainResult
{
  nn::ParameterStore store;
  std::vector<EpochLog> log;
};

/**
 * @brief Seeded mini-batch training with Adam.
 *
 * Each epoch shuffles the sample order with a stream derived from
 * (seed, epoch); the last partial batch is kept. Every epoch emits one log
 * line through `on_epoch` if given.
 */
inline TrainResult train(
  const std::vector<Scenario> & dataset, const ModelConfig & model_cfg,
  const TrainConfig & train_cfg, const std::function<void(const EpochLog &)> & on_epoch = {})
{
  if (dataset.empty()) {
    throw Error(ErrorCode::EmptyDataset, "training dataset is empty");
  }
  model_cfg.validate();
  train_cfg.validate();

  std::vector<FeatureBundle> samples;
  for (const Scenario & s : dataset) {
    const SegmentIndex index(split_map(s.map, model_cfg.segment_points));
    for (const std::string & id : scored_agents(s, train_cfg.all_agents)) {
      samples.push_back(build_bundle(s, id, model_cfg, &index));
    }
  }

  TrainResult result;
  init_forecaster_parameters(result.store, model_cfg, train_cfg.seed);
  const Forecaster model(model_cfg, result.store);
  const nn::AdamConfig adam{train_cfg.lr, 0.9, 0.999, 1e-8};

  std::vector<std::size_t> order(samples.size());
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    nn::SplitMix64 rng(train_cfg.seed * 0x9E3779B97F4A7C15ull + epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    LossBreakdown sum;
    for (std::size_t begin = 0; begin < order.size(); begin += train_cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + train_cfg.batch_size);
      std::vector<FeatureBundle> chunk;
      for (std::size_t i = begin; i < end; ++i) {
        chunk.push_back(samples[order[i]]);
      }
      const Batch batch = pad_batch(chunk);
      nn::Tape tape;
      LossBreakdown mean;
      const nn::Var loss = batch_loss(tape, model, batch, train_cfg.loss_weights, &mean);
      if (!std::isfinite(tape.value(loss)[0])) {
        throw Error(ErrorCode::NonFiniteLoss, "non-finite loss at step " + std::to_string(step));
      }
      tape.backward(loss);
      if (train_cfg.clip_norm > 0.0) {
        const double norm = result.store.grad_norm();
        if (norm > train_cfg.clip_norm) {
          result.store.scale_grad(train_cfg.clip_norm / norm);
        }
      }
      result.store.adam_step(adam);
      const double n = static_cast<double>(end - begin);
      sum.anchor_reg += mean.anchor_reg * n;
      sum.anchor_cls += mean.anchor_cls * n;
      sum.pred_reg += mean.pred_reg * n;
      sum.pred_cls += mean.pred_cls * n;
      sum.total += mean.total * n;
      ++step;
    }
    const double n = static_cast<double>(samples.size());
    EpochLog e{epoch, {sum.anchor_reg / n, sum.anchor_cls / n, sum.pred_reg / n,
                       sum.pred_cls / n, sum.total / n}};
    result.log.push_back(e);
    if (on_epoch) {
      on_epoch(e);
    }
  }
  return result;
}

// ------------------------------------------------------------- checkpoints

inline void save_checkpoint(
  const nn::ParameterStore & store, const ModelConfig & cfg, const std::string & path)
{
  save_checkpoint_file(store, cfg.to_config().fields(), path);
}

struct LoadedModel
{
  ModelConfig config;
  nn::ParameterStore store;
};

/// Verifies that the stored parameters are exactly the set a model of `cfg` declares.
inline void check_parameters_match(const nn::ParameterStore & store, const ModelConfig & cfg)
{
  nn::ParameterStore reference;
  init_forecaster_parameters(reference, cfg, 0);
  for (const auto & [name, p] : reference.params()) {
    if (!store.contains(name)) {
      throw Error(ErrorCode::CorruptCheckpoint, "missing parameter " + name);
    }
    if (store.get(name).value.shape != p.value.shape) {
      throw Error(
        ErrorCode::CorruptCheckpoint, "shape mismatch for " + name + ": " +
                                        nn::shape_string(store.get(name).value.shape) + " vs " +
                                        nn::shape_string(p.value.shape));
    }
  }
  if (store.size() != reference.size()) {
    for (const auto & [name, p] : store.params()) {
      if (!reference.contains(name)) {
        throw Error(ErrorCode::CorruptCheckpoint, "unexpected parameter " + name);
      }
    }
  }
}

inline LoadedModel load_checkpoint(const std::string & path)
{
  nn::Checkpoint ck = nn::load_checkpoint_file(path);
  LoadedModel m;
  try {
    m.config = ModelConfig::from_config(KeyValueConfig(ck.header));
  } catch (const Error & e) {
    throw Error(ErrorCode::CorruptCheckpoint, "header " + e.detail());
  }
  check_parameters_match(ck.store, m.config);
  m.store = std::move(ck.store);
  return m;
}

/// Loads and checks every header field against `expected`; the error names the first differing field.
inline LoadedModel load_checkpoint(const std::string & path, const ModelConfig & expected)
{
  LoadedModel m = load_checkpoint(path);
  const auto got = m.config.to_config().fields();
  const auto want = expected.to_config().fields();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (got[i] != want[i]) {
      throw Error(ErrorCode::CorruptCheckpoint, want[i].first);
    }
  }
  return m;
}

}  // namespace tjf

#endif  // TJF__TRAINER_HPP_
