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

#ifndef TJF__GEOMETRY_HPP_
#define TJF__GEOMETRY_HPP_

#include <cmath>
#include <numbers>

namespace tjf
{

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) noexcept
{
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

struct Point2
{
  double x{0.0};
  double y{0.0};

  bool operator==(const Point2 &) const = default;
};

inline double distance(const Point2 & a, const Point2 & b) noexcept
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Pose2
{
  double x{0.0};
  double y{0.0};
  double heading{0.0};  //!< radians, normalized to (-pi, pi].

  Point2 position() const noexcept { return {x, y}; }

  bool operator==(const Pose2 &) const = default;
};

/// Expresses a world point in the frame where `ref` sits at the origin facing +x.
inline Point2 to_agent_frame(const Point2 & p, const Pose2 & ref) noexcept
{
  const double c = std::cos(ref.heading);
  const double s = std::sin(ref.heading);
  const double dx = p.x - ref.x;
  const double dy = p.y - ref.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

inline Pose2 to_agent_frame(const Pose2 & p, const Pose2 & ref) noexcept
{
  const Point2 q = to_agent_frame(p.position(), ref);
  return {q.x, q.y, normalize_angle(p.heading - ref.heading)};
}

/// Rotates a direction quantity (velocity) into the frame of `ref`; no translation.
inline Point2 rotate_to_agent_frame(const Point2 & v, const Pose2 & ref) noexcept
{
  const double c = std::cos(ref.heading);
  const double s = std::sin(ref.heading);
  return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

/// Inverse of to_agent_frame.
inline Point2 from_agent_frame(const Point2 & p, const Pose2 & ref) noexcept
{
  const double c = std::cos(ref.heading);
  const double s = std::sin(ref.heading);
  return {c * p.x - s * p.y + ref.x, s * p.x + c * p.y + ref.y};
}

inline Pose2 from_agent_frame(const Pose2 & p, const Pose2 & ref) noexcept
{
  const Point2 q = from_agent_frame(p.position(), ref);
  return {q.x, q.y, normalize_angle(p.heading + ref.heading)};
}

inline Point2 rotate_from_agent_frame(const Point2 & v, const Pose2 & ref) noexcept
{
  const double c = std::cos(ref.heading);
  const double s = std::sin(ref.heading);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Minimum distance from `p` to the segment [a, b].
inline double point_segment_distance(const Point2 & p, const Point2 & a, const Point2 & b) noexcept
{
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  }
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace tjf

#endif  // TJF__GEOMETRY_HPP_
