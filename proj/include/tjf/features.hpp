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

#ifndef TJF__FEATURES_HPP_
#define TJF__FEATURES_HPP_

#include "tjf/config.hpp"
#include "tjf/error.hpp"
#include "tjf/map.hpp"
#include "tjf/nn/tensor.hpp"
#include "tjf/scenario.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tjf
{

struct ModelConfig
{
  std::size_t d_model{128};
  std::size_t n_heads{4};
  std::size_t n_encoder_layers{2};
  std::size_t n_anchors{16};  //!< N
  std::size_t k_modes{6};     //!< K
  std::size_t future{60};     //!< T
  std::size_t history{15};    //!< H
  std::size_t anchor_waypoint_stride{10};
  double output_scale{10.0};  //!< meters per unit of regression-head output
  std::size_t max_neighbors{32};
  double neighbor_radius{50.0};
  std::size_t segment_points{10};  //!< P_max
  MapQueryConfig map_query;

  std::size_t anchor_waypoints() const noexcept { return future / anchor_waypoint_stride; }

  void validate() const
  {
    auto bad = [](const std::string & field, const std::string & why) {
      throw Error(ErrorCode::InvalidConfig, field + ": " + why);
    };
    if (d_model == 0) bad("d_model", "must be > 0");
    if (n_heads == 0 || d_model % n_heads != 0) bad("n_heads", "must divide d_model");
    if (n_anchors == 0) bad("n_anchors", "must be > 0");
    if (k_modes == 0 || k_modes > n_anchors) bad("k_modes", "must be in [1, n_anchors]");
    if (history == 0) bad("history", "must be > 0");
    if (future == 0) bad("future", "must be > 0");
    if (anchor_waypoint_stride == 0 || future % anchor_waypoint_stride != 0) {
      bad("anchor_waypoint_stride", "must divide future");
    }
    if (!(output_scale > 0.0)) bad("output_scale", "must be > 0");
    if (!(neighbor_radius > 0.0)) bad("neighbor_radius", "must be > 0");
    if (segment_points < 2) bad("segment_points", "must be >= 2");
    map_query.validate();
  }

  KeyValueConfig to_config() const
  {
    KeyValueConfig c;
    c.set("d_model", std::to_string(d_model));
    c.set("n_heads", std::to_string(n_heads));
    c.set("n_encoder_layers", std::to_string(n_encoder_layers));
    c.set("n_anchors", std::to_string(n_anchors));
    c.set("k_modes", std::to_string(k_modes));
    c.set("future", std::to_string(future));
    c.set("history", std::to_string(history));
    c.set("anchor_waypoint_stride", std::to_string(anchor_waypoint_stride));
    c.set("output_scale", format_config_number(output_scale));
    c.set("max_neighbors", std::to_string(max_neighbors));
    c.set("neighbor_radius", format_config_number(neighbor_radius));
    c.set("segment_points", std::to_string(segment_points));
    c.set("max_segments", std::to_string(map_query.max_segments));
    for (ObjectType t : kAllObjectTypes) {
      c.set("radius_" + std::string(to_string(t)), format_config_number(map_query.radius(t)));
    }
    return c;
  }

  static ModelConfig from_config(const KeyValueConfig & c)
  {
    ModelConfig m;
    m.d_model = c.get_size("d_model", m.d_model);
    m.n_heads = c.get_size("n_heads", m.n_heads);
    m.n_encoder_layers = c.get_size("n_encoder_layers", m.n_encoder_layers);
    m.n_anchors = c.get_size("n_anchors", m.n_anchors);
    m.k_modes = c.get_size("k_modes", m.k_modes);
    m.future = c.get_size("future", m.future);
    m.history = c.get_size("history", m.history);
    m.anchor_waypoint_stride = c.get_size("anchor_waypoint_stride", m.anchor_waypoint_stride);
    m.output_scale = c.get_double("output_scale", m.output_scale);
    m.max_neighbors = c.get_size("max_neighbors", m.max_neighbors);
    m.neighbor_radius = c.get_double("neighbor_radius", m.neighbor_radius);
    m.segment_points = c.get_size("segment_points", m.segment_points);
    m.map_query.max_segments = c.get_size("max_segments", m.map_query.max_segments);
    for (ObjectType t : kAllObjectTypes) {
      double & r = m.map_query.radius_by_type[index_of(t)];
      r = c.get_double("radius_" + std::string(to_string(t)), r);
    }
    c.reject_unknown();
    m.validate();
    return m;
  }

  bool operator==(const ModelConfig & o) const
  {
    return to_config().fields() == o.to_config().fields();
  }
};

/**
 * @brief Model input for one target agent, everything in the target's frame.
 *
 * Agent slot 0 is the target. Slots past the real counts are padding and
 * carry mask 0; padded tensor entries are zero.
 */
struct FeatureBundle
{
  std::string scenario_id;
  std::string agent_id;
  ObjectType object_type{ObjectType::Vehicle};
  Pose2 reference;  //!< world pose of the target at step H-1

  std::size_t n_agents{0};     //!< A (slots)
  std::size_t n_neighbors{0};  //!< Nn (slots per agent)
  std::size_t n_segments{0};   //!< S (slots)
  std::size_t history{0};
  std::size_t segment_points{0};

  nn::Tensor history_rows;                //!< [A, H, 12]
  nn::Tensor agent_pose;                  //!< [A, 4]: x, y, cos, sin of each agent at H-1
  std::vector<std::uint8_t> agent_mask;   //!< [A]
  nn::Tensor interaction_rows;            //!< [A, Nn, H, 7]
  std::vector<std::uint8_t> neighbor_mask;  //!< [A * Nn]
  nn::Tensor lane_rows;                   //!< [S, P, 5]
  std::vector<std::uint8_t> lane_mask;    //!< [S]

  nn::Tensor gt_future;                 //!< [T, 2]
  std::vector<std::uint8_t> gt_mask;    //!< [T]

  std::size_t real_agents() const
  {
    return static_cast<std::size_t>(std::count(agent_mask.begin(), agent_mask.end(), 1));
  }
  std::size_t real_segments() const
  {
    return static_cast<std::size_t>(std::count(lane_mask.begin(), lane_mask.end(), 1));
  }
};

/// Agents considered for a target: the target plus its interaction neighbors.
inline FeatureBundle build_bundle(
  const Scenario & s, const std::string & agent_id, const ModelConfig & cfg,
  const SegmentIndex * index = nullptr)
{
  if (s.horizon.history != cfg.history || s.horizon.future != cfg.future) {
    throw Error(
      ErrorCode::MixedHorizons, "scenario " + s.scenario_id + " horizon " +
                                  std::to_string(s.horizon.history) + "," +
                                  std::to_string(s.horizon.future) + " vs model " +
                                  std::to_string(cfg.history) + "," + std::to_string(cfg.future));
  }
  const std::size_t H = cfg.history;
  const std::size_t T = cfg.future;
  const AgentTrack & target = get_track(s, agent_id);
  const Pose2 ref = reference_pose(target, H);
  const InteractionConfig icfg{cfg.max_neighbors, cfg.neighbor_radius};

  FeatureBundle b;
  b.scenario_id = s.scenario_id;
  b.agent_id = agent_id;
  b.object_type = target.object_type;
  b.reference = ref;
  b.history = H;
  b.segment_points = cfg.segment_points;

  std::vector<const AgentTrack *> agents{&target};
  const InteractionFeature target_inter = build_interaction_features(s, agent_id, icfg);
  for (const std::string & id : target_inter.neighbor_ids) {
    agents.push_back(&get_track(s, id));
  }
  std::vector<InteractionFeature> inter;
  inter.reserve(agents.size());
  std::size_t nn_max = 0;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    inter.push_back(a == 0 ? target_inter : build_interaction_features(s, agents[a]->agent_id, icfg));
    nn_max = std::max(nn_max, inter.back().size());
  }

  const std::size_t A = agents.size();
  b.n_agents = A;
  b.n_neighbors = nn_max;
  b.history_rows = nn::Tensor({A, H, kHistoryFeatureWidth});
  b.agent_pose = nn::Tensor({A, 4});
  b.agent_mask.assign(A, 1);
  b.interaction_rows = nn::Tensor({A, nn_max, H, kInteractionFeatureWidth});
  b.neighbor_mask.assign(A * nn_max, 0);
  for (std::size_t a = 0; a < A; ++a) {
    const HistoryFeature hf = history_features_of(*agents[a], H);
    std::copy(hf.rows.data.begin(), hf.rows.data.end(),
              b.history_rows.data.begin() + a * H * kHistoryFeatureWidth);
    const Pose2 p = to_agent_frame(agents[a]->states[H - 1].pose, ref);
    b.agent_pose.at(a, 0) = static_cast<float>(p.x);
    b.agent_pose.at(a, 1) = static_cast<float>(p.y);
    b.agent_pose.at(a, 2) = static_cast<float>(std::cos(p.heading));
    b.agent_pose.at(a, 3) = static_cast<float>(std::sin(p.heading));
    const std::size_t stride = H * kInteractionFeatureWidth;
    std::copy(inter[a].rows.data.begin(), inter[a].rows.data.end(),
              b.interaction_rows.data.begin() + a * nn_max * stride);
    for (std::size_t n = 0; n < inter[a].size(); ++n) {
      b.neighbor_mask[a * nn_max + n] = 1;
    }
  }

  std::vector<LaneSegment> segments;
  if (index) {
    segments = query_segments(*index, ref.position(), target.object_type, cfg.map_query);
  } else {
    const SegmentIndex local(split_map(s.map, cfg.segment_points));
    segments = query_segments(local, ref.position(), target.object_type, cfg.map_query);
  }
  const std::vector<LaneFeature> lanes = lane_features(segments, ref, cfg.segment_points);
  const std::size_t S = lanes.size();
  b.n_segments = S;
  b.lane_rows = nn::Tensor({S, cfg.segment_points, kLaneFeatureWidth});
  b.lane_mask.assign(S, 1);
  for (std::size_t i = 0; i < S; ++i) {
    std::copy(lanes[i].rows.data.begin(), lanes[i].rows.data.end(),
              b.lane_rows.data.begin() + i * cfg.segment_points * kLaneFeatureWidth);
  }

  b.gt_future = nn::Tensor({T, 2});
  b.gt_mask.assign(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    const AgentState & st = target.states[H + t];
    if (!st.valid) {
      continue;
    }
    const Point2 p = to_agent_frame(st.pose.position(), ref);
    b.gt_future.at(t, 0) = static_cast<float>(p.x);
    b.gt_future.at(t, 1) = static_cast<float>(p.y);
    b.gt_mask[t] = 1;
  }
  return b;
}

inline FeatureBundle build_focal_bundle(const Scenario & s, const ModelConfig & cfg)
{
  return build_bundle(s, s.focal_agent_id, cfg);
}

/// Pads agent/neighbor/segment slots up to the given counts (never shrinks).
inline FeatureBundle pad_bundle(
  const FeatureBundle & b, std::size_t n_agents, std::size_t n_neighbors, std::size_t n_segments)
{
  if (n_agents < b.n_agents || n_neighbors < b.n_neighbors || n_segments < b.n_segments) {
    throw Error(ErrorCode::ShapeMismatch, "pad_bundle cannot shrink");
  }
  const std::size_t H = b.history;
  const std::size_t P = b.segment_points;
  FeatureBundle out = b;
  out.n_agents = n_agents;
  out.n_neighbors = n_neighbors;
  out.n_segments = n_segments;
  out.history_rows = nn::Tensor({n_agents, H, kHistoryFeatureWidth});
  std::copy(b.history_rows.data.begin(), b.history_rows.data.end(), out.history_rows.data.begin());
  out.agent_pose = nn::Tensor({n_agents, 4});
  std::copy(b.agent_pose.data.begin(), b.agent_pose.data.end(), out.agent_pose.data.begin());
  out.agent_mask.assign(n_agents, 0);
  std::copy(b.agent_mask.begin(), b.agent_mask.end(), out.agent_mask.begin());

  const std::size_t stride = H * kInteractionFeatureWidth;
  out.interaction_rows = nn::Tensor({n_agents, n_neighbors, H, kInteractionFeatureWidth});
  out.neighbor_mask.assign(n_agents * n_neighbors, 0);
  for (std::size_t a = 0; a < b.n_agents; ++a) {
    for (std::size_t n = 0; n < b.n_neighbors; ++n) {
      std::copy_n(
        b.interaction_rows.data.begin() + (a * b.n_neighbors + n) * stride, stride,
        out.interaction_rows.data.begin() + (a * n_neighbors + n) * stride);
      out.neighbor_mask[a * n_neighbors + n] = b.neighbor_mask[a * b.n_neighbors + n];
    }
  }
  out.lane_rows = nn::Tensor({n_segments, P, kLaneFeatureWidth});
  std::copy(b.lane_rows.data.begin(), b.lane_rows.data.end(), out.lane_rows.data.begin());
  out.lane_mask.assign(n_segments, 0);
  std::copy(b.lane_mask.begin(), b.lane_mask.end(), out.lane_mask.begin());
  return out;
}

/// Drops trailing padded slots; inverse of pad_bundle for bundles with prefix masks.
inline FeatureBundle trim_bundle(const FeatureBundle & b)
{
  std::size_t A = b.n_agents;
  while (A > 0 && !b.agent_mask[A - 1]) --A;
  std::size_t Nn = 0;
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t n = b.n_neighbors; n > Nn; --n) {
      if (b.neighbor_mask[a * b.n_neighbors + n - 1]) {
        Nn = n;
        break;
      }
    }
  }
  std::size_t S = b.n_segments;
  while (S > 0 && !b.lane_mask[S - 1]) --S;
  if (A == b.n_agents && Nn == b.n_neighbors && S == b.n_segments) {
    return b;
  }
  const std::size_t H = b.history;
  const std::size_t P = b.segment_points;
  FeatureBundle out = b;
  out.n_agents = A;
  out.n_neighbors = Nn;
  out.n_segments = S;
  out.history_rows = nn::Tensor(
    {A, H, kHistoryFeatureWidth},
    std::vector<float>(b.history_rows.data.begin(), b.history_rows.data.begin() + A * H * kHistoryFeatureWidth));
  out.agent_pose = nn::Tensor(
    {A, 4}, std::vector<float>(b.agent_pose.data.begin(), b.agent_pose.data.begin() + A * 4));
  out.agent_mask.resize(A);
  const std::size_t stride = H * kInteractionFeatureWidth;
  out.interaction_rows = nn::Tensor({A, Nn, H, kInteractionFeatureWidth});
  out.neighbor_mask.assign(A * Nn, 0);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t n = 0; n < Nn; ++n) {
      std::copy_n(
        b.interaction_rows.data.begin() + (a * b.n_neighbors + n) * stride, stride,
        out.interaction_rows.data.begin() + (a * Nn + n) * stride);
      out.neighbor_mask[a * Nn + n] = b.neighbor_mask[a * b.n_neighbors + n];
    }
  }
  out.lane_rows = nn::Tensor(
    {S, P, kLaneFeatureWidth},
    std::vector<float>(b.lane_rows.data.begin(), b.lane_rows.data.begin() + S * P * kLaneFeatureWidth));
  out.lane_mask.resize(S);
  return out;
}

}  // namespace tjf

#endif  // TJF__FEATURES_HPP_
