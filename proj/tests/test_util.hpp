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

#ifndef TJF__TESTS__TEST_UTIL_HPP_
#define TJF__TESTS__TEST_UTIL_HPP_

#include "tjf/decimal.hpp"
#include "tjf/dataio.hpp"
#include "tjf/scenario.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace tjf::test
{

/// Straight constant-speed track; states before `first_valid` are invalid.
inline AgentTrack straight_track(
  const std::string & id, ObjectType type, double x0, double y0, double heading, double speed,
  std::size_t total = 75, std::size_t first_valid = 0)
{
  AgentTrack t{id, type, {}};
  for (std::size_t i = 0; i < total; ++i) {
    if (i < first_valid) {
      t.states.push_back(AgentState{});
      continue;
    }
    const double d = speed * kTimeStep * static_cast<double>(i);
    AgentState st;
    st.pose = {x0 + d * std::cos(heading), y0 + d * std::sin(heading), normalize_angle(heading)};
    st.vx = speed * std::cos(heading);
    st.vy = speed * std::sin(heading);
    st.valid = true;
    t.states.push_back(st);
  }
  return t;
}

inline Scenario single_agent_scenario(const AgentTrack & focal, HorizonConfig h = {})
{
  Scenario s;
  s.scenario_id = "test";
  s.focal_agent_id = focal.agent_id;
  s.tracks = {focal};
  s.horizon = h;
  return s;
}

/// Rounds every numeric field to float32 so text round trips are exact.
inline Scenario quantized(Scenario s)
{
  for (AgentTrack & t : s.tracks) {
    for (AgentState & st : t.states) {
      st.pose.x = quantize(st.pose.x);
      st.pose.y = quantize(st.pose.y);
      st.pose.heading = quantize_heading(st.pose.heading);
      st.vx = quantize(st.vx);
      st.vy = quantize(st.vy);
    }
  }
  for (Lane & l : s.map.lanes) {
    for (Point2 & p : l.points) {
      p = {quantize(p.x), quantize(p.y)};
    }
  }
  return s;
}

}  // namespace tjf::test

#endif  // TJF__TESTS__TEST_UTIL_HPP_
