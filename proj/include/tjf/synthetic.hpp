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

#ifndef TJF__SYNTHETIC_HPP_
#define TJF__SYNTHETIC_HPP_

#include "tjf/config.hpp"
#include "tjf/dataio.hpp"
#include "tjf/error.hpp"
#include "tjf/geometry.hpp"
#include "tjf/nn/tensor.hpp"
#include "tjf/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace tjf
{

struct SynthConfig
{
  std::size_t n_scenarios{100};
  std::size_t min_agents{3};  //!< including the focal agent
  std::size_t max_agents{8};
  std::size_t min_extra_lanes{0};  //!< parallel lanes added to the base layout
  std::size_t max_extra_lanes{1};
  std::array<double, kNumObjectTypes> type_weights{0.6, 0.1, 0.1, 0.1, 0.1};
  double position_noise{0.05};  //!< m, std-dev
  double velocity_noise{0.1};   //!< m/s, std-dev
  double heading_noise{0.01};   //!< rad, std-dev
  double max_accel{1.0};        //!< m/s^2, uniform in [-max, max]
  double static_prob{0.1};
  double junction_prob{0.7};
  std::size_t history{15};
  std::size_t future{60};
  std::uint64_t seed{0};

  void validate() const
  {
    auto bad = [](const std::string & f, const std::string & why) {
      throw Error(ErrorCode::InvalidConfig, f + ": " + why);
    };
    if (min_agents < 1 || max_agents < min_agents) bad("min_agents", "need 1 <= min_agents <= max_agents");
    if (max_extra_lanes < min_extra_lanes) bad("max_extra_lanes", "must be >= min_extra_lanes");
    double sum = 0.0;
    for (std::size_t i = 0; i < kNumObjectTypes; ++i) {
      if (!(type_weights[i] >= 0.0)) {
        bad("weight_" + std::string(to_string(kAllObjectTypes[i])), "must be >= 0");
      }
      sum += type_weights[i];
    }
    if (!(sum > 0.0)) bad("weight_vehicle", "type weights must sum to > 0");
    if (!(position_noise >= 0.0)) bad("position_noise", "must be >= 0");
    if (!(velocity_noise >= 0.0)) bad("velocity_noise", "must be >= 0");
    if (!(heading_noise >= 0.0)) bad("heading_noise", "must be >= 0");
    if (!(max_accel >= 0.0)) bad("max_accel", "must be >= 0");
    if (!(static_prob >= 0.0 && static_prob <= 1.0)) bad("static_prob", "must be in [0, 1]");
    if (!(junction_prob >= 0.0 && junction_prob <= 1.0)) bad("junction_prob", "must be in [0, 1]");
    if (history == 0) bad("history", "must be > 0");
    if (future == 0) bad("future", "must be > 0");
  }

  static SynthConfig from_config(const KeyValueConfig & c)
  {
    SynthConfig s;
    s.n_scenarios = c.get_size("n_scenarios", s.n_scenarios);
    s.min_agents = c.get_size("min_agents", s.min_agents);
    s.max_agents = c.get_size("max_agents", s.max_agents);
    s.min_extra_lanes = c.get_size("min_extra_lanes", s.min_extra_lanes);
    s.max_extra_lanes = c.get_size("max_extra_lanes", s.max_extra_lanes);
    for (std::size_t i = 0; i < kNumObjectTypes; ++i) {
      s.type_weights[i] =
        c.get_double("weight_" + std::string(to_string(kAllObjectTypes[i])), s.type_weights[i]);
    }
    s.position_noise = c.get_double("position_noise", s.position_noise);
    s.velocity_noise = c.get_double("velocity_noise", s.velocity_noise);
    s.heading_noise = c.get_double("heading_noise", s.heading_noise);
    s.max_accel = c.get_double("max_accel", s.max_accel);
    s.static_prob = c.get_double("static_prob", s.static_prob);
    s.junction_prob = c.get_double("junction_prob", s.junction_prob);
    s.history = c.get_size("history", s.history);
    s.future = c.get_size("future", s.future);
    s.seed = c.get_u64("seed", s.seed);
    c.reject_unknown();
    s.validate();
    return s;
  }
};

namespace synth
{

/// Arc-length parameterized polyline, extrapolated linearly past both ends.
class Path
{
public:
  explicit Path(std::vector<Point2> pts) : pts_(std::move(pts))
  {
    cum_.push_back(0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      cum_.push_back(cum_.back() + distance(pts_[i - 1], pts_[i]));
    }
  }

  double length() const { return cum_.back(); }

  /// Position and tangent heading at arc length s.
  Pose2 at(double s) const
  {
    std::size_t i = 0;
    if (s >= cum_.back()) {
      i = pts_.size() - 2;
    } else if (s > 0.0) {
      i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin()) - 1;
    }
    const Point2 & a = pts_[i];
    const Point2 & b = pts_[i + 1];
    const double seg = cum_[i + 1] - cum_[i];
    const double u = (s - cum_[i]) / seg;
    return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), std::atan2(b.y - a.y, b.x - a.x)};
  }

private:
  std::vector<Point2> pts_;
  std::vector<double> cum_;
};

inline std::vector<Point2> straight(Point2 from, Point2 to, double spacing = 2.0)
{
  const double len = distance(from, to);
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
  std::vector<Point2> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    out.push_back({from.x + u * (to.x - from.x), from.y + u * (to.y - from.y)});
  }
  return out;
}

/// Quarter turn starting at `start` heading +x: left (turn > 0) or right, then a straight tail.
inline std::vector<Point2> turn(Point2 start, double radius, int direction, double tail)
{
  std::vector<Point2> out;
  const double cy = start.y + direction * radius;
  const std::size_t n = 12;
  for (std::size_t i = 0; i <= n; ++i) {
    const double phi = (std::numbers::pi / 2.0) * static_cast<double>(i) / static_cast<double>(n);
    out.push_back({start.x + radius * std::sin(phi), cy - direction * radius * std::cos(phi)});
  }
  const Point2 end = out.back();
  const auto rest = straight(end, {end.x, end.y + direction * tail});
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

inline std::vector<Point2> concat(std::vector<Point2> a, const std::vector<Point2> & b)
{
  a.insert(a.end(), b.begin() + 1, b.end());
  return a;
}

inline std::vector<Point2> offset(const std::vector<Point2> & pts, double d)
{
  std::vector<Point2> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2 & a = pts[i == 0 ? 0 : i - 1];
    const Point2 & b = pts[i == 0 ? 1 : i];
    const double h = std::atan2(b.y - a.y, b.x - a.x);
    out.push_back({pts[i].x - d * std::sin(h), pts[i].y + d * std::cos(h)});
  }
  return out;
}

inline ObjectType sample_type(nn::SplitMix64 & rng, const std::array<double, kNumObjectTypes> & w)
{
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < kNumObjectTypes; ++i) {
    if (u < w[i] || i + 1 == kNumObjectTypes) {
      if (w[i] > 0.0) return kAllObjectTypes[i];
    }
    u -= w[i];
  }
  for (std::size_t i = kNumObjectTypes; i-- > 0;) {
    if (w[i] > 0.0) return kAllObjectTypes[i];
  }
  return ObjectType::Vehicle;
}

inline void speed_range(ObjectType t, double & lo, double & hi)
{
  switch (t) {
    case ObjectType::Vehicle: lo = 3.0; hi = 14.0; break;
    case ObjectType::Bus: lo = 3.0; hi = 11.0; break;
    case ObjectType::Motorcyclist: lo = 4.0; hi = 15.0; break;
    case ObjectType::Cyclist: lo = 2.0; hi = 7.0; break;
    case ObjectType::Pedestrian: lo = 0.6; hi = 1.8; break;
  }
}

struct Motion
{
  double s0, v0, accel;

  /// Arc length travelled and speed at time t; speed is floored at zero.
  void at(double t, double & s, double & v) const
  {
    if (accel < 0.0 && v0 + accel * t < 0.0) {
      const double ts = -v0 / accel;
      s = s0 + v0 * ts + 0.5 * accel * ts * ts;
      v = 0.0;
      return;
    }
    s = s0 + v0 * t + 0.5 * accel * t * t;
    v = v0 + accel * t;
  }
};

}  // namespace synth

/**
 * @brief Seeded lane-following scenarios on straight or junction layouts.
 *
 * Output depends only on `cfg`. Every scenario passes validate_scenario and
 * stores float32-representable values so it round-trips through the file
 * format exactly.
 */
inline std::vector<Scenario> generate_synthetic(const SynthConfig & cfg)
{
  using synth::Path;
  cfg.validate();
  nn::SplitMix64 rng(cfg.seed * 0xD1B54A32D192ED03ull + 0x5EED);
  const std::size_t H = cfg.history;
  const std::size_t T = cfg.future;
  std::vector<Scenario> out;
  out.reserve(cfg.n_scenarios);

  for (std::size_t n = 0; n < cfg.n_scenarios; ++n) {
    Scenario s;
    s.scenario_id = "synth_" + std::to_string(cfg.seed) + "_" + std::to_string(n);
    s.horizon = {H, T};

    // Layout in a local frame; the approach lane ends at the origin heading +x.
    const double l_in = rng.uniform(50.0, 90.0);
    const double l_out = rng.uniform(50.0, 90.0);
    const bool junction = rng.uniform() < cfg.junction_prob;
    std::vector<std::vector<Point2>> lanes;
    std::vector<std::vector<Point2>> routes;  // focal candidates first
    const auto approach = synth::straight({-l_in, 0.0}, {0.0, 0.0});
    const auto through = synth::straight({0.0, 0.0}, {l_out, 0.0});
    lanes.push_back(approach);
    lanes.push_back(through);
    routes.push_back(synth::concat(approach, through));
    if (junction) {
      const double radius = rng.uniform(8.0, 20.0);
      const bool has_left = rng.uniform() < 0.75;
      const bool has_right = !has_left || rng.uniform() < 0.75;
      if (has_left) {
        const auto left = synth::turn({0.0, 0.0}, radius, 1, rng.uniform(20.0, 50.0));
        lanes.push_back(left);
        routes.push_back(synth::concat(approach, left));
      }
      if (has_right) {
        const auto right = synth::turn({0.0, 0.0}, radius, -1, rng.uniform(20.0, 50.0));
        lanes.push_back(right);
        routes.push_back(synth::concat(approach, right));
      }
    }
    const std::size_t n_focal_routes = routes.size();
    const auto opposite = synth::straight({l_out, 3.5}, {-l_in, 3.5});
    lanes.push_back(opposite);
    routes.push_back(opposite);
    const std::size_t extra =
      cfg.min_extra_lanes + rng.index(cfg.max_extra_lanes - cfg.min_extra_lanes + 1);
    for (std::size_t e = 0; e < extra; ++e) {
      const double y = -3.5 * static_cast<double>(e + 1);
      const auto lane = synth::straight({-l_in, y}, {l_out, y});
      lanes.push_back(lane);
      routes.push_back(lane);
    }

    // World placement.
    const Pose2 world{rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0),
                      rng.uniform(-std::numbers::pi, std::numbers::pi)};
    auto place = [&](const Point2 & p) {
      const Point2 w = from_agent_frame(p, world);
      return Point2{quantize(w.x), quantize(w.y)};
    };
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      Lane lane;
      lane.id = "lane_" + std::to_string(i);
      for (const Point2 & p : lanes[i]) {
        lane.points.push_back(place(p));
      }
      s.map.lanes.push_back(std::move(lane));
    }

    const std::size_t n_agents =
      cfg.min_agents + rng.index(cfg.max_agents - cfg.min_agents + 1);
    for (std::size_t a = 0; a < n_agents; ++a) {
      const bool focal = a == 0;
      AgentTrack track;
      track.agent_id = focal ? "focal" : "agent_" + std::to_string(a);
      track.object_type = synth::sample_type(rng, cfg.type_weights);
      const std::size_t route_idx = focal ? rng.index(n_focal_routes) : rng.index(routes.size());
      std::vector<Point2> route = routes[route_idx];
      if (track.object_type == ObjectType::Pedestrian) {
        route = synth::offset(route, -4.0);
      }
      const Path path(route);

      double vlo = 0.0, vhi = 0.0;
      synth::speed_range(track.object_type, vlo, vhi);
      const bool is_static = rng.uniform() < cfg.static_prob;
      synth::Motion m{};
      m.v0 = is_static ? 0.0 : rng.uniform(vlo, vhi);
      m.accel = is_static ? 0.0 : rng.uniform(-cfg.max_accel, cfg.max_accel);
      // Focal agents reach step H-1 shortly before the junction.
      const double s_ref = focal ? l_in - rng.uniform(0.0, 25.0) : rng.uniform(0.0, path.length());
      const double t_ref = static_cast<double>(H - 1) * kTimeStep;
      m.s0 = s_ref - m.v0 * t_ref - 0.5 * m.accel * t_ref * t_ref;
      if (m.accel < 0.0 && m.v0 + m.accel * t_ref < 0.0) {
        m.accel = 0.0;
        m.s0 = s_ref - m.v0 * t_ref;
      }

      std::size_t first_valid = 0;
      std::size_t last_valid = H + T - 1;
      if (!focal) {
        const double u = rng.uniform();
        if (u < 0.2) {
          first_valid = 1 + rng.index(H - 1 > 0 ? H - 1 : 1);
        } else if (u < 0.3) {
          last_valid = H + rng.index(T);
        } else if (u < 0.35) {
          first_valid = H + rng.index(T);
        }
      }

      for (std::size_t k = 0; k < H + T; ++k) {
        AgentState st;
        if (k >= first_valid && k <= last_valid) {
          double dist = 0.0, speed = 0.0;
          m.at(static_cast<double>(k) * kTimeStep, dist, speed);
          const Pose2 local = path.at(dist);
          const Pose2 noisy{
            local.x + cfg.position_noise * rng.normal(), local.y + cfg.position_noise * rng.normal(),
            local.heading + cfg.heading_noise * rng.normal()};
          const Pose2 w = from_agent_frame(noisy, world);
          const Point2 v = rotate_from_agent_frame(
            {speed * std::cos(local.heading) + cfg.velocity_noise * rng.normal(),
             speed * std::sin(local.heading) + cfg.velocity_noise * rng.normal()},
            world);
          st.valid = true;
          st.pose = {quantize(w.x), quantize(w.y), quantize_heading(w.heading)};
          st.vx = quantize(v.x);
          st.vy = quantize(v.y);
        }
        track.states.push_back(st);
      }
      s.tracks.push_back(std::move(track));
    }
    s.focal_agent_id = "focal";
    validate_scenario(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__SYNTHETIC_HPP_
