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

#ifndef TJF__RENDER_HPP_
#define TJF__RENDER_HPP_

#include "tjf/geometry.hpp"
#include "tjf/metrics.hpp"
#include "tjf/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace tjf
{

struct RenderConfig
{
  double margin{10.0};           //!< meters around the content
  double pixels_per_meter{8.0};
  double dot_radius{2.0};        //!< pixels
  double endpoint_radius{4.0};   //!< pixels
  double line_width{1.5};        //!< pixels
};

/// Affine world-to-viewport map: x right, y flipped so north is up.
struct ViewTransform
{
  double min_x{0.0};
  double max_y{0.0};
  double scale{1.0};
  double width{0.0};
  double height{0.0};

  Point2 apply(const Point2 & p) const noexcept
  {
    return {(p.x - min_x) * scale, (max_y - p.y) * scale};
  }
};

namespace render_color
{
inline constexpr const char * kLane = "black";
inline constexpr const char * kOtherAgent = "blue";
inline constexpr const char * kFocalHistory = "cyan";
inline constexpr const char * kPrediction = "yellow";
inline constexpr const char * kGroundTruth = "red";
inline constexpr const char * kPredictionEnd = "magenta";
inline constexpr const char * kGroundTruthEnd = "green";
}  // namespace render_color

namespace detail
{
struct Extent
{
  double min_x{std::numeric_limits<double>::infinity()};
  double min_y{std::numeric_limits<double>::infinity()};
  double max_x{-std::numeric_limits<double>::infinity()};
  double max_y{-std::numeric_limits<double>::infinity()};

  void add(double x, double y)
  {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
};

inline std::string num(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string circle(const Point2 & p, double r, const char * color, const char * cls)
{
  return "<circle class=\"" + std::string(cls) + "\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) +
         "\" r=\"" + num(r) + "\" fill=\"" + color + "\"/>\n";
}

inline std::string polyline(
  const std::vector<Point2> & pts, double w, const char * color, const char * cls)
{
  std::string s = "<polyline class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" + color +
                  "\" stroke-width=\"" + num(w) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].x) + ',' + num(pts[i].y);
  }
  return s + "\"/>\n";
}
}  // namespace detail

/// Viewport fitted to lanes, observed history and, when `pred` is given, the predictions and focal future.
inline ViewTransform fit_view(
  const Scenario & s, const MultiModalPrediction * pred, const RenderConfig & cfg = {})
{
  detail::Extent e;
  for (const Lane & l : s.map.lanes) {
    for (const Point2 & p : l.points) e.add(p.x, p.y);
  }
  const std::size_t H = s.horizon.history;
  for (const AgentTrack & t : s.tracks) {
    const bool focal = t.agent_id == s.focal_agent_id;
    const std::size_t end = focal && pred ? t.states.size() : std::min(H, t.states.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (t.states[i].valid) e.add(t.states[i].pose.x, t.states[i].pose.y);
    }
  }
  if (pred) {
    for (std::size_t i = 0; i + 1 < pred->xy.size(); i += 2) e.add(pred->xy[i], pred->xy[i + 1]);
  }
  if (!(e.min_x <= e.max_x)) {
    e.add(0.0, 0.0);
  }
  ViewTransform v;
  v.min_x = e.min_x - cfg.margin;
  v.max_y = e.max_y + cfg.margin;
  v.scale = cfg.pixels_per_meter;
  v.width = (e.max_x - e.min_x + 2.0 * cfg.margin) * v.scale;
  v.height = (e.max_y - e.min_y + 2.0 * cfg.margin) * v.scale;
  return v;
}

/**
 * @brief Renders one scenario as SVG.
 *
 * Lanes are black polylines, other agents' observed states blue dots, the
 * focal history cyan dots, each predicted mode a group of yellow dots with
 * a magenta endpoint, and the focal future a red polyline with a green
 * endpoint. With a null `pred` only lanes and observed history are drawn.
 */
inline std::string render_svg(
  const Scenario & s, const MultiModalPrediction * pred, const RenderConfig & cfg = {})
{
  using namespace render_color;
  const ViewTransform v = fit_view(s, pred, cfg);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(v.width) +
         "\" height=\"" + detail::num(v.height) + "\" viewBox=\"0 0 " + detail::num(v.width) + ' ' +
         detail::num(v.height) + "\">\n";

  out += "<g id=\"lanes\">\n";
  for (const Lane & l : s.map.lanes) {
    std::vector<Point2> pts;
    for (const Point2 & p : l.points) pts.push_back(v.apply(p));
    out += detail::polyline(pts, cfg.line_width, kLane, "lane");
  }
  out += "</g>\n";

  const std::size_t H = s.horizon.history;
  const AgentTrack & focal = focal_track(s);
  out += "<g id=\"agents\">\n";
  for (const AgentTrack & t : s.tracks) {
    if (t.agent_id == s.focal_agent_id) continue;
    for (std::size_t i = 0; i < std::min(H, t.states.size()); ++i) {
      if (t.states[i].valid) {
        out += detail::circle(v.apply(t.states[i].pose.position()), cfg.dot_radius, kOtherAgent, "agent");
      }
    }
  }
  out += "</g>\n<g id=\"history\">\n";
  for (std::size_t i = 0; i < H; ++i) {
    if (focal.states[i].valid) {
      out += detail::circle(v.apply(focal.states[i].pose.position()), cfg.dot_radius, kFocalHistory, "history");
    }
  }
  out += "</g>\n";

  if (pred) {
    pred->check();
    out += "<g id=\"predictions\">\n";
    for (std::size_t k = 0; k < pred->modes; ++k) {
      out += "<g class=\"mode\">\n";
      for (std::size_t t = 0; t + 1 < pred->steps; ++t) {
        out += detail::circle(v.apply({pred->x(k, t), pred->y(k, t)}), cfg.dot_radius, kPrediction, "prediction");
      }
      out += "</g>\n";
    }
    for (std::size_t k = 0; k < pred->modes; ++k) {
      const std::size_t t = pred->steps - 1;
      out += detail::circle(v.apply({pred->x(k, t), pred->y(k, t)}), cfg.endpoint_radius, kPredictionEnd, "prediction-end");
    }
    out += "</g>\n";
  }

  std::vector<Point2> gt;
  for (std::size_t i = H; pred && i < focal.states.size(); ++i) {
    if (focal.states[i].valid) gt.push_back(v.apply(focal.states[i].pose.position()));
  }
  if (!gt.empty()) {
    out += "<g id=\"ground-truth\">\n";
    out += detail::polyline(gt, cfg.line_width, kGroundTruth, "ground-truth");
    out += detail::circle(gt.back(), cfg.endpoint_radius, kGroundTruthEnd, "ground-truth-end");
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tjf

#endif  // TJF__RENDER_HPP_
