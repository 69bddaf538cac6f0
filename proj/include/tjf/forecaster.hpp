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

#ifndef TJF__FORECASTER_HPP_
#define TJF__FORECASTER_HPP_

#include "tjf/error.hpp"
#include "tjf/features.hpp"
#include "tjf/nn/layers.hpp"
#include "tjf/nn/tape.hpp"
#include "tjf/nn/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace tjf
{

/// Position and velocity channels are multiplied by this before embedding.
inline constexpr double kInputScale = 0.1;

/// All values in the target agent's frame.
struct ForecastOutput
{
  nn::Tensor trajectories;          //!< [K, T, 2]
  std::vector<float> probabilities;  //!< [K]
  nn::Tensor anchors;               //!< [N, T / stride, 2]
  std::vector<float> anchor_logits;  //!< [N]
  nn::Tensor proposals;             //!< [K, T, 2]
};

struct LossBreakdown
{
  double anchor_reg{0.0};
  double anchor_cls{0.0};
  double pred_reg{0.0};
  double pred_cls{0.0};
  double total{0.0};
};

struct LossWeights
{
  double anchor_reg{1.0};
  double anchor_cls{1.0};
  double pred_reg{1.0};
  double pred_cls{1.0};
};

/// Tape handles produced by one forward pass.
struct ForwardVars
{
  nn::Var context;            //!< [A + S, d]
  nn::Var focal_token;        //!< [1, d]
  nn::Var anchor_embeddings;  //!< [N, d]
  nn::Var anchor_waypoints;   //!< [N, W * 2]
  nn::Var anchor_logits;      //!< [1, N]
  nn::Var proposals;          //!< [K, T * 2]
  nn::Var trajectories;       //!< [K, T * 2]
  nn::Var mode_logits;        //!< [1, K]
  nn::Var probabilities;      //!< [1, K]
};

struct LossVars
{
  nn::Var reg;
  nn::Var cls;
  std::size_t best{0};
};

/**
 * @brief Registers every model parameter.
 *
 * Each parameter stream depends only on (seed, name), so initialization is
 * independent of registration order.
 */
template <typename T>
void init_forecaster_parameters(
  nn::BasicParameterStore<T> & store, const ModelConfig & cfg, std::uint64_t seed)
{
  cfg.validate();
  const std::size_t d = cfg.d_model;
  const std::size_t H = cfg.history;
  const std::size_t T2 = cfg.future * 2;
  const double emb = 1.0 / std::sqrt(static_cast<double>(d));

  nn::add_linear(store, "hist.in", kHistoryFeatureWidth, d, seed);
  store.add_uniform("hist.time", {H, d}, emb, seed);
  nn::add_linear(store, "hist.out", d, d, seed);

  nn::add_linear(store, "inter.in", H * kInteractionFeatureWidth, d, seed);
  nn::add_linear(store, "inter.out", d, d, seed);
  nn::add_attention(store, "inter.attn", d, seed);
  nn::add_linear(store, "pose", 4, d, seed);
  nn::add_layer_norm(store, "agent.ln", d);

  nn::add_linear(store, "lane.in", cfg.segment_points * kLaneFeatureWidth, d, seed);
  nn::add_linear(store, "lane.out", d, d, seed);

  for (std::size_t l = 0; l < cfg.n_encoder_layers; ++l) {
    nn::add_transformer_block(store, "enc." + std::to_string(l), d, seed);
  }

  store.add_uniform("anchor.query", {cfg.n_anchors, d}, 1.0, seed);
  nn::add_transformer_block(store, "anchor.dec", d, seed);
  nn::add_linear(store, "anchor.reg", d, cfg.anchor_waypoints() * 2, seed);
  nn::add_linear(store, "anchor.cls", d, 1, seed);

  nn::add_linear(store, "prop.fc1", d, d, seed);
  nn::add_linear(store, "prop.fc2", d, cfg.k_modes * T2, seed);

  nn::add_linear(store, "pred.query", T2, d, seed);
  nn::add_transformer_block(store, "pred.dec", d, seed);
  nn::add_linear(store, "pred.reg", d, T2, seed);
  nn::add_linear(store, "pred.cls", d, 1, seed);
}

/**
 * @brief History/interaction/lane encoders, anchor decoder, proposal head and
 * prediction decoder over a ParameterStore.
 *
 * The store is only read by forward; gradients land in it through the tape.
 */
template <typename T>
class BasicForecaster
{
public:
  using Tape = nn::BasicTape<T>;
  using Store = nn::BasicParameterStore<T>;
  using TensorT = nn::BasicTensor<T>;

  BasicForecaster(ModelConfig cfg, Store & store) : cfg_(std::move(cfg)), store_(store)
  {
    cfg_.validate();
  }

  const ModelConfig & config() const noexcept { return cfg_; }
  Store & store() noexcept { return store_; }

  nn::AttentionConfig attention_config() const { return {cfg_.d_model, cfg_.n_heads}; }

  /// Context tokens [A + S, d] after the encoder stack, plus their key mask.
  nn::Var encode_social_context(
    Tape & tape, const FeatureBundle & b, std::vector<std::uint8_t> & context_mask) const
  {
    check_bundle(b);
    const std::size_t A = b.n_agents;
    const std::size_t H = b.history;
    const std::size_t Nn = b.n_neighbors;
    const std::size_t S = b.n_segments;
    const auto acfg = attention_config();

    // History: shared per-step embedding + time embedding, masked max over time.
    TensorT hist = scaled(b.history_rows, {0, 1, 2, 3}, kHistoryFeatureWidth);
    hist.shape = {A * H, kHistoryFeatureWidth};
    std::vector<std::uint8_t> step_mask(A * H, 0);
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < H; ++t) {
        step_mask[a * H + t] =
          b.agent_mask[a] && b.history_rows[(a * H + t) * kHistoryFeatureWidth + 11] > 0.5f;
      }
    }
    nn::Var h = linear("hist.in", tape, tape.constant(std::move(hist)));
    h = tape.relu(tape.add_tiled(h, param(tape, "hist.time")));
    h = linear("hist.out", tape, h);
    nn::Var agent = tape.group_max(h, H, step_mask);  // [A, d]

    // Pose of every agent in the target frame.
    TensorT pose = scaled(b.agent_pose, {0, 1}, 4);
    agent = tape.add(agent, linear("pose", tape, tape.constant(std::move(pose))));

    // Interaction: neighbor sequences become tokens, each agent attends to its own.
    if (Nn > 0) {
      TensorT inter = scaled(b.interaction_rows, {0, 1, 2, 3}, kInteractionFeatureWidth);
      inter.shape = {A * Nn, H * kInteractionFeatureWidth};
      nn::Var tok = linear("inter.in", tape, tape.constant(std::move(inter)));
      tok = linear("inter.out", tape, tape.relu(tok));
      std::vector<std::uint8_t> allowed(A * A * Nn, 0);
      for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t n = 0; n < Nn; ++n) {
          allowed[a * A * Nn + a * Nn + n] = b.neighbor_mask[a * Nn + n];
        }
      }
      agent = tape.add(agent, nn::multi_head_attention(tape, store_, "inter.attn", agent, tok, allowed, acfg));
    }
    agent = nn::layer_norm(tape, store_, "agent.ln", agent);

    context_mask = b.agent_mask;
    nn::Var context = agent;
    if (S > 0) {
      TensorT lanes = scaled(b.lane_rows, {0, 1}, kLaneFeatureWidth);
      lanes.shape = {S, b.segment_points * kLaneFeatureWidth};
      nn::Var lane = linear("lane.in", tape, tape.constant(std::move(lanes)));
      lane = linear("lane.out", tape, tape.relu(lane));
      context = tape.concat_rows({agent, lane});
      context_mask.insert(context_mask.end(), b.lane_mask.begin(), b.lane_mask.end());
    }

    const auto allowed = nn::key_padding_mask(context_mask.size(), context_mask);
    for (std::size_t l = 0; l < cfg_.n_encoder_layers; ++l) {
      context = nn::transformer_block(
        tape, store_, "enc." + std::to_string(l), context, context, allowed, acfg);
    }
    return context;
  }

  /// Returns (embeddings [N, d], waypoints [N, W * 2], logits [1, N]).
  void decode_anchors(
    Tape & tape, nn::Var context, const std::vector<std::uint8_t> & context_mask,
    nn::Var focal_token, ForwardVars & out) const
  {
    const std::size_t N = cfg_.n_anchors;
    nn::Var q = tape.add_row(param(tape, "anchor.query"), focal_token);
    out.anchor_embeddings = nn::transformer_block(
      tape, store_, "anchor.dec", q, context, nn::key_padding_mask(N, context_mask),
      attention_config());
    out.anchor_waypoints =
      tape.scale(linear("anchor.reg", tape, out.anchor_embeddings), static_cast<T>(cfg_.output_scale));
    out.anchor_logits = tape.reshape(linear("anchor.cls", tape, out.anchor_embeddings), {1, N});
  }

  /// Feed-forward head: focal token [1, d] -> proposals [K, T * 2].
  nn::Var decode_proposals(Tape & tape, nn::Var focal_token) const
  {
    nn::Var h = tape.relu(linear("prop.fc1", tape, focal_token));
    nn::Var p = tape.scale(linear("prop.fc2", tape, h), static_cast<T>(cfg_.output_scale));
    return tape.reshape(p, {cfg_.k_modes, cfg_.future * 2});
  }

  /// Mode queries from proposals attend over anchors + context; residual offsets on proposals.
  void decode_predictions(
    Tape & tape, nn::Var anchor_embeddings, nn::Var proposals, nn::Var context,
    const std::vector<std::uint8_t> & context_mask, nn::Var focal_token, ForwardVars & out) const
  {
    const std::size_t K = cfg_.k_modes;
    const T inv_scale = static_cast<T>(1.0 / cfg_.output_scale);
    nn::Var q = linear("pred.query", tape, tape.scale(proposals, inv_scale));
    q = tape.add_row(q, focal_token);
    nn::Var memory = tape.concat_rows({anchor_embeddings, context});
    std::vector<std::uint8_t> mem_mask(cfg_.n_anchors, 1);
    mem_mask.insert(mem_mask.end(), context_mask.begin(), context_mask.end());
    nn::Var modes = nn::transformer_block(
      tape, store_, "pred.dec", q, memory, nn::key_padding_mask(K, mem_mask), attention_config());
    nn::Var offsets =
      tape.scale(linear("pred.reg", tape, modes), static_cast<T>(cfg_.output_scale));
    out.trajectories = tape.add(proposals, offsets);
    out.mode_logits = tape.reshape(linear("pred.cls", tape, modes), {1, K});
    out.probabilities = tape.softmax(out.mode_logits);
  }

  ForwardVars forward(Tape & tape, const FeatureBundle & b) const
  {
    ForwardVars out;
    std::vector<std::uint8_t> context_mask;
    out.context = encode_social_context(tape, b, context_mask);
    out.focal_token = tape.slice_rows(out.context, 0, 1);
    decode_anchors(tape, out.context, context_mask, out.focal_token, out);
    out.proposals = decode_proposals(tape, out.focal_token);
    decode_predictions(
      tape, out.anchor_embeddings, out.proposals, out.context, context_mask, out.focal_token, out);
    return out;
  }

  ForecastOutput predict(const FeatureBundle & b) const
  {
    Tape tape;
    const ForwardVars v = forward(tape, b);
    return to_output(tape, v);
  }

  ForecastOutput to_output(const Tape & tape, const ForwardVars & v) const
  {
    const std::size_t K = cfg_.k_modes;
    const std::size_t Tn = cfg_.future;
    ForecastOutput o;
    o.trajectories = to_float(tape.value(v.trajectories), {K, Tn, 2});
    o.proposals = to_float(tape.value(v.proposals), {K, Tn, 2});
    o.anchors = to_float(tape.value(v.anchor_waypoints), {cfg_.n_anchors, cfg_.anchor_waypoints(), 2});
    const auto & p = tape.value(v.probabilities).data;
    o.probabilities.assign(p.begin(), p.end());
    const auto & l = tape.value(v.anchor_logits).data;
    o.anchor_logits.assign(l.begin(), l.end());
    return o;
  }

private:
  nn::Var param(Tape & tape, const std::string & name) const { return tape.parameter(store_, name); }

  nn::Var linear(const std::string & name, Tape & tape, nn::Var x) const
  {
    return nn::linear(tape, store_, name, x);
  }

  static TensorT scaled(
    const nn::Tensor & src, std::initializer_list<std::size_t> channels, std::size_t width)
  {
    TensorT out = src.template cast<T>();
    for (std::size_t r = 0; r < out.size() / width; ++r) {
      for (std::size_t c : channels) {
        out.data[r * width + c] *= static_cast<T>(kInputScale);
      }
    }
    return out;
  }

  static nn::Tensor to_float(const TensorT & t, nn::Shape shape)
  {
    nn::Tensor out = t.template cast<float>();
    out.shape = std::move(shape);
    return out;
  }

  void check_bundle(const FeatureBundle & b) const
  {
    const bool ok =
      b.history == cfg_.history && b.segment_points == cfg_.segment_points && b.n_agents >= 1 &&
      b.agent_mask.size() == b.n_agents && b.agent_mask[0] == 1 &&
      b.history_rows.size() == b.n_agents * b.history * kHistoryFeatureWidth &&
      b.agent_pose.size() == b.n_agents * 4 &&
      b.interaction_rows.size() ==
        b.n_agents * b.n_neighbors * b.history * kInteractionFeatureWidth &&
      b.neighbor_mask.size() == b.n_agents * b.n_neighbors &&
      b.lane_rows.size() == b.n_segments * b.segment_points * kLaneFeatureWidth &&
      b.lane_mask.size() == b.n_segments;
    if (!ok) {
      throw Error(ErrorCode::ShapeMismatch, "feature bundle does not match model config");
    }
  }

  ModelConfig cfg_;
  Store & store_;
};

using Forecaster = BasicForecaster<float>;

// ------------------------------------------------------------------ losses

/**
 * @brief Winner-take-all regression + candidate classification.
 *
 * candidates: [C, steps * 2]; logits: [1, C] (raw logits, log-softmaxed here);
 * gt / gt_mask index the sampled steps `step_index`. The best candidate is the
 * lowest mean squared displacement over valid steps (ties to the lowest index);
 * reg is that candidate's mean squared displacement, cls is -log p(best).
 */
template <typename T>
LossVars winner_take_all_loss(
  nn::BasicTape<T> & tape, nn::Var candidates, nn::Var logits, const nn::Tensor & gt,
  const std::vector<std::uint8_t> & gt_mask, const std::vector<std::size_t> & step_index)
{
  const auto & cv = tape.value(candidates);
  const std::size_t n_steps = step_index.size();
  const std::size_t C = cv.rows();
  if (cv.cols() != n_steps * 2 || tape.value(logits).size() != C) {
    throw Error(ErrorCode::ShapeMismatch, "loss: candidate/logit shapes disagree");
  }
  std::vector<T> target(n_steps * 2, T(0));
  std::vector<T> weight(n_steps * 2, T(0));
  std::size_t n_valid = 0;
  for (std::size_t j = 0; j < n_steps; ++j) {
    if (gt_mask.at(step_index[j])) {
      ++n_valid;
    }
  }
  if (n_valid == 0) {
    throw Error(ErrorCode::NoValidFuture, "no valid ground-truth step");
  }
  for (std::size_t j = 0; j < n_steps; ++j) {
    const std::size_t s = step_index[j];
    if (gt_mask[s]) {
      target[2 * j] = static_cast<T>(gt.at(s, 0));
      target[2 * j + 1] = static_cast<T>(gt.at(s, 1));
      weight[2 * j] = weight[2 * j + 1] = T(1) / static_cast<T>(n_valid);
    }
  }
  std::size_t best = 0;
  T best_err = std::numeric_limits<T>::infinity();
  for (std::size_t c = 0; c < C; ++c) {
    T err = 0;
    for (std::size_t i = 0; i < n_steps * 2; ++i) {
      const T diff = cv.data[c * n_steps * 2 + i] - target[i];
      err += weight[i] * diff * diff;
    }
    if (err < best_err) {
      best_err = err;
      best = c;
    }
  }
  LossVars out;
  out.best = best;
  nn::Var diff = tape.sub(
    tape.slice_rows(candidates, best, 1),
    tape.constant(nn::BasicTensor<T>({1, n_steps * 2}, std::move(target))));
  out.reg = tape.weighted_sum(tape.square(diff), std::move(weight));
  out.cls = tape.scale(tape.pick(tape.log_softmax(logits), best), T(-1));
  return out;
}

/// Sparse-waypoint loss over anchors; waypoint j sits at future step (j+1)*stride-1.
template <typename T>
LossVars anchor_loss(
  nn::BasicTape<T> & tape, nn::Var waypoints, nn::Var logits, const nn::Tensor & gt,
  const std::vector<std::uint8_t> & gt_mask, std::size_t stride)
{
  std::vector<std::size_t> steps;
  for (std::size_t s = stride; s <= gt.rows(); s += stride) {
    steps.push_back(s - 1);
  }
  return winner_take_all_loss(tape, waypoints, logits, gt, gt_mask, steps);
}

/// Dense loss over all future steps and the K modes. `logits` are mode logits.
template <typename T>
LossVars prediction_loss(
  nn::BasicTape<T> & tape, nn::Var trajectories, nn::Var logits, const nn::Tensor & gt,
  const std::vector<std::uint8_t> & gt_mask)
{
  std::vector<std::size_t> steps(gt.rows());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    steps[s] = s;
  }
  return winner_take_all_loss(tape, trajectories, logits, gt, gt_mask, steps);
}

/// Weighted total loss var for one bundle, filling the breakdown with values.
template <typename T>
nn::Var forecaster_loss(
  nn::BasicTape<T> & tape, const BasicForecaster<T> & model, const FeatureBundle & b,
  const LossWeights & w, LossBreakdown * breakdown = nullptr)
{
  const ForwardVars v = model.forward(tape, b);
  const LossVars a = anchor_loss(
    tape, v.anchor_waypoints, v.anchor_logits, b.gt_future, b.gt_mask,
    model.config().anchor_waypoint_stride);
  const LossVars p = prediction_loss(tape, v.trajectories, v.mode_logits, b.gt_future, b.gt_mask);
  nn::Var total = tape.add(
    tape.add(tape.scale(a.reg, static_cast<T>(w.anchor_reg)), tape.scale(a.cls, static_cast<T>(w.anchor_cls))),
    tape.add(tape.scale(p.reg, static_cast<T>(w.pred_reg)), tape.scale(p.cls, static_cast<T>(w.pred_cls))));
  if (breakdown) {
    breakdown->anchor_reg = tape.value(a.reg)[0];
    breakdown->anchor_cls = tape.value(a.cls)[0];
    breakdown->pred_reg = tape.value(p.reg)[0];
    breakdown->pred_cls = tape.value(p.cls)[0];
    breakdown->total = tape.value(total)[0];
  }
  return total;
}

}  // namespace tjf

#endif  // TJF__FORECASTER_HPP_
