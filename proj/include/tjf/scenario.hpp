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

#ifndef TJF__SCENARIO_HPP_
#define TJF__SCENARIO_HPP_

#include "tjf/error.hpp"
#include "tjf/geometry.hpp"
#include "tjf/map.hpp"
#include "tjf/nn/tensor.hpp"
#include "tjf/object_type.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace tjf
{

inline constexpr double kTimeStep = 0.1;  //!< seconds between states (10 Hz)

struct AgentState
{
  Pose2 pose;
  double vx{0.0};
  double vy{0.0};
  bool valid{false};  //!< false implies every numeric field is exactly 0

  bool operator==(const AgentState &) const = default;
};

struct AgentTrack
{
  std::string agent_id;
  ObjectType object_type{ObjectType::Vehicle};
  std::vector<AgentState> states;  //!< H + T entries

  bool operator==(const AgentTrack &) const = default;
};

struct HorizonConfig
{
  std::size_t history{15};  //!< H
  std::size_t future{60};   //!< T

  std::size_t total() const noexcept { return history + future; }

  bool operator==(const HorizonConfig &) const = default;
};

struct Scenario
{
  std::string scenario_id;
  std::string focal_agent_id;
  std::vector<AgentTrack> tracks;
  VectorMap map;
  HorizonConfig horizon;

  bool operator==(const Scenario &) const = default;
};

inline const AgentTrack * find_track(const Scenario & s, const std::string & agent_id)
{
  for (const AgentTrack & t : s.tracks) {
    if (t.agent_id == agent_id) {
      return &t;
    }
  }
  return nullptr;
}

inline const AgentTrack & get_track(const Scenario & s, const std::string & agent_id)
{
  const AgentTrack * t = find_track(s, agent_id);
  if (!t) {
    throw Error(ErrorCode::UnknownAgent, agent_id);
  }
  return *t;
}

inline const AgentTrack & focal_track(const Scenario & s) { return get_track(s, s.focal_agent_id); }

/// Characters reserved by the scenario file grammar.
inline bool is_valid_identifier(const std::string & id)
{
  if (id.empty()) {
    return false;
  }
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == '|' || c == ';' || c == ',' || c == ' ' || c == '\n' || c == '\r' || c == '\t';
  });
}

/// Throws InvariantViolation naming the first failed check.
inline void validate_scenario(const Scenario & s)
{
  auto fail = [](const std::string & what) { throw Error(ErrorCode::InvariantViolation, what); };
  if (!is_valid_identifier(s.scenario_id)) {
    fail("scenario_id");
  }
  if (s.horizon.history == 0 || s.horizon.future == 0) {
    fail("horizon");
  }
  std::vector<std::string> ids;
  for (const AgentTrack & t : s.tracks) {
    if (!is_valid_identifier(t.agent_id)) {
      fail("agent_id");
    }
    ids.push_back(t.agent_id);
    if (t.states.size() != s.horizon.total()) {
      fail("states length");
    }
    for (const AgentState & st : t.states) {
      const bool finite = std::isfinite(st.pose.x) && std::isfinite(st.pose.y) &&
                          std::isfinite(st.pose.heading) && std::isfinite(st.vx) &&
                          std::isfinite(st.vy);
      if (!finite) {
        fail("finite state");
      }
      if (!st.valid && !(st == AgentState{})) {
        fail("invalid state sentinel");
      }
      if (st.pose.heading <= -std::numbers::pi || st.pose.heading > std::numbers::pi) {
        fail("heading range");
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail("duplicate agent_id");
  }
  const AgentTrack * focal = find_track(s, s.focal_agent_id);
  if (!focal) {
    fail("focal_agent_id");
  }
  for (std::size_t t = 0; t < s.horizon.history; ++t) {
    if (!focal->states[t].valid) {
      fail("focal history");
    }
  }
  std::vector<std::string> lane_ids;
  for (const Lane & lane : s.map.lanes) {
    if (!is_valid_identifier(lane.id)) {
      fail("lane_id");
    }
    lane_ids.push_back(lane.id);
    if (lane.points.size() < 2) {
      fail("lane points");
    }
    for (std::size_t i = 0; i < lane.points.size(); ++i) {
      if (!std::isfinite(lane.points[i].x) || !std::isfinite(lane.points[i].y)) {
        fail("finite lane point");
      }
      if (i > 0 && lane.points[i] == lane.points[i - 1]) {
        fail("lane consecutive points");
      }
    }
  }
  std::sort(lane_ids.begin(), lane_ids.end());
  if (std::adjacent_find(lane_ids.begin(), lane_ids.end()) != lane_ids.end()) {
    fail("duplicate lane_id");
  }
}

/// Pose at timestep history-1, the origin of the agent-centric frame.
inline Pose2 reference_pose(const AgentTrack & track, std::size_t history)
{
  if (history == 0 || history > track.states.size() || !track.states[history - 1].valid) {
    throw Error(
      ErrorCode::MissingReferenceState, "agent " + track.agent_id + " has no valid state at step " +
                                          std::to_string(history - 1));
  }
  return track.states[history - 1].pose;
}

inline AgentState state_to_frame(const AgentState & st, const Pose2 & ref)
{
  if (!st.valid) {
    return AgentState{};
  }
  AgentState out;
  out.valid = true;
  out.pose = to_agent_frame(st.pose, ref);
  const Point2 v = rotate_to_agent_frame({st.vx, st.vy}, ref);
  out.vx = v.x;
  out.vy = v.y;
  return out;
}

/// Re-expresses the whole track in the frame of its own pose at step history-1.
inline AgentTrack standardize_track(const AgentTrack & track, std::size_t history)
{
  const Pose2 ref = reference_pose(track, history);
  AgentTrack out = track;
  for (AgentState & st : out.states) {
    st = state_to_frame(st, ref);
  }
  return out;
}

inline constexpr std::size_t kHistoryFeatureWidth = 12;
inline constexpr std::size_t kInteractionFeatureWidth = 7;

/// [H, 12] rows: x, y, vx, vy, cos, sin, one-hot type (5), valid.
struct HistoryFeature
{
  nn::Tensor rows;
};

/// [n_neighbors, H, 7] rows: rel_x, rel_y, rel_vx, rel_vy, cos, sin, valid.
struct InteractionFeature
{
  nn::Tensor rows;
  std::vector<std::string> neighbor_ids;
  std::vector<double> distances;  //!< at step H-1, non-decreasing

  std::size_t size() const noexcept { return neighbor_ids.size(); }
};

struct InteractionConfig
{
  std::size_t max_neighbors{32};
  double radius{50.0};
};

inline HistoryFeature history_features_of(const AgentTrack & track, std::size_t history)
{
  const AgentTrack local = standardize_track(track, history);
  HistoryFeature f{nn::Tensor({history, kHistoryFeatureWidth})};
  for (std::size_t t = 0; t < history; ++t) {
    const AgentState & st = local.states[t];
    if (!st.valid) {
      continue;
    }
    f.rows.at(t, 0) = static_cast<float>(st.pose.x);
    f.rows.at(t, 1) = static_cast<float>(st.pose.y);
    f.rows.at(t, 2) = static_cast<float>(st.vx);
    f.rows.at(t, 3) = static_cast<float>(st.vy);
    f.rows.at(t, 4) = static_cast<float>(std::cos(st.pose.heading));
    f.rows.at(t, 5) = static_cast<float>(std::sin(st.pose.heading));
    f.rows.at(t, 6 + index_of(track.object_type)) = 1.0f;
    f.rows.at(t, 11) = 1.0f;
  }
  return f;
}

inline HistoryFeature build_history_features(const Scenario & s, const std::string & agent_id)
{
  return history_features_of(get_track(s, agent_id), s.horizon.history);
}

inline InteractionFeature build_interaction_features(
  const Scenario & s, const std::string & agent_id, const InteractionConfig & cfg = {})
{
  const AgentTrack & target = get_track(s, agent_id);
  const std::size_t history = s.horizon.history;
  const Pose2 ref = reference_pose(target, history);

  struct Candidate
  {
    const AgentTrack * track;
    double dist;
    std::size_t order;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < s.tracks.size(); ++i) {
    const AgentTrack & other = s.tracks[i];
    if (other.agent_id == agent_id || !other.states[history - 1].valid) {
      continue;
    }
    const double d = distance(other.states[history - 1].pose.position(), ref.position());
    if (d <= cfg.radius) {
      candidates.push_back({&other, d, i});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto & a, const auto & b) {
    return a.dist < b.dist;
  });
  if (candidates.size() > cfg.max_neighbors) {
    candidates.resize(cfg.max_neighbors);
  }

  InteractionFeature f;
  f.rows = nn::Tensor({candidates.size(), history, kInteractionFeatureWidth});
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    f.neighbor_ids.push_back(candidates[n].track->agent_id);
    f.distances.push_back(candidates[n].dist);
    for (std::size_t t = 0; t < history; ++t) {
      const AgentState & a = target.states[t];
      const AgentState & b = candidates[n].track->states[t];
      if (!a.valid || !b.valid) {
        continue;
      }
      const AgentState la = state_to_frame(a, ref);
      const AgentState lb = state_to_frame(b, ref);
      const double rel_heading = normalize_angle(lb.pose.heading - la.pose.heading);
      float * row = f.rows.data.data() + (n * history + t) * kInteractionFeatureWidth;
      row[0] = static_cast<float>(lb.pose.x - la.pose.x);
      row[1] = static_cast<float>(lb.pose.y - la.pose.y);
      row[2] = static_cast<float>(lb.vx - la.vx);
      row[3] = static_cast<float>(lb.vy - la.vy);
      row[4] = static_cast<float>(std::cos(rel_heading));
      row[5] = static_cast<float>(std::sin(rel_heading));
      row[6] = 1.0f;
    }
  }
  return f;
}

}  // namespace tjf

#endif  // TJF__SCENARIO_HPP_
