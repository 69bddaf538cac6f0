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

#ifndef TJF__MAP_HPP_
#define TJF__MAP_HPP_

#include "tjf/error.hpp"
#include "tjf/geometry.hpp"
#include "tjf/nn/tensor.hpp"
#include "tjf/object_type.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace tjf
{

struct Lane
{
  std::string id;
  std::vector<Point2> points;  //!< centerline, >= 2 distinct consecutive points

  bool operator==(const Lane &) const = default;
};

struct VectorMap
{
  std::vector<Lane> lanes;

  bool operator==(const VectorMap &) const = default;
};

struct LaneSegment
{
  std::string segment_id;
  std::vector<Point2> points;
  std::string source_lane_id;

  bool operator==(const LaneSegment &) const = default;
};

inline constexpr std::size_t kLaneFeatureWidth = 5;  //!< x, y, dir_cos, dir_sin, valid

/// One lane segment in an agent frame: [P_max, 5] rows, zero-padded with valid = 0.
struct LaneFeature
{
  nn::Tensor rows;
};

struct MapQueryConfig
{
  std::array<double, kNumObjectTypes> radius_by_type{80.0, 30.0, 60.0, 50.0, 100.0};
  std::size_t max_segments{64};

  double radius(ObjectType type) const { return radius_by_type.at(index_of(type)); }

  void validate() const
  {
    for (std::size_t i = 0; i < kNumObjectTypes; ++i) {
      if (!(radius_by_type[i] > 0.0)) {
        throw Error(
          ErrorCode::InvalidConfig,
          "radius_" + std::string(to_string(kAllObjectTypes[i])) + " must be > 0");
      }
    }
  }
};

/**
 * @brief Splits every lane into chunks of at most `p_max` points.
 *
 * Adjacent chunks share their boundary point, so dropping each chunk's first
 * point after the first reproduces the lane.
 */
inline std::vector<LaneSegment> split_map(const VectorMap & map, std::size_t p_max)
{
  if (p_max < 2) {
    throw Error(ErrorCode::InvalidConfig, "segment_points must be >= 2");
  }
  std::vector<LaneSegment> out;
  for (const Lane & lane : map.lanes) {
    const std::size_t n = lane.points.size();
    if (n < 2) {
      throw Error(ErrorCode::DegenerateLane, "lane " + lane.id + " has fewer than 2 points");
    }
    std::size_t start = 0;
    std::size_t chunk = 0;
    while (true) {
      const std::size_t end = std::min(start + p_max - 1, n - 1);
      LaneSegment seg;
      seg.segment_id = lane.id + ":" + std::to_string(chunk++);
      seg.source_lane_id = lane.id;
      seg.points.assign(lane.points.begin() + start, lane.points.begin() + end + 1);
      out.push_back(std::move(seg));
      if (end == n - 1) {
        break;
      }
      start = end;
    }
  }
  return out;
}

inline double polyline_distance(const Point2 & p, const std::vector<Point2> & polyline)
{
  if (polyline.size() == 1) {
    return distance(p, polyline[0]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, point_segment_distance(p, polyline[i], polyline[i + 1]));
  }
  return best;
}

struct BoundingBox
{
  double min_x{0}, min_y{0}, max_x{0}, max_y{0};

  bool intersects(const BoundingBox & o) const noexcept
  {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};

inline BoundingBox bounds_of(const std::vector<Point2> & pts)
{
  BoundingBox b{
    std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point2 & p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

struct SegmentHit
{
  std::size_t index;  //!< position in SegmentIndex::segments()
  double distance;
};

/**
 * @brief Uniform-grid index over segment bounding boxes. Immutable once built.
 */
class SegmentIndex
{
public:
  explicit SegmentIndex(std::vector<LaneSegment> segments, double cell_size = 10.0)
  : segments_(std::move(segments)), cell_size_(cell_size)
  {
    if (!(cell_size_ > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "cell_size must be > 0");
    }
    boxes_.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const BoundingBox b = bounds_of(segments_[i].points);
      boxes_.push_back(b);
      for (std::int64_t cx = cell(b.min_x); cx <= cell(b.max_x); ++cx) {
        for (std::int64_t cy = cell(b.min_y); cy <= cell(b.max_y); ++cy) {
          cells_[key(cx, cy)].push_back(i);
        }
      }
    }
  }

  const std::vector<LaneSegment> & segments() const noexcept { return segments_; }

  /// Indices of segments whose bounding box intersects `box`, ascending.
  std::vector<std::size_t> query_box(const BoundingBox & box) const
  {
    std::vector<std::size_t> out;
    if (segments_.empty()) {
      return out;
    }
    const std::int64_t x0 = cell(box.min_x), x1 = cell(box.max_x);
    const std::int64_t y0 = cell(box.min_y), y1 = cell(box.max_y);
    const double n_cells = static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1);
    std::vector<std::uint8_t> seen(segments_.size(), 0);
    auto visit = [&](const std::vector<std::size_t> & ids) {
      for (std::size_t i : ids) {
        if (!seen[i] && boxes_[i].intersects(box)) {
          seen[i] = 1;
          out.push_back(i);
        }
      }
    };
    if (n_cells > static_cast<double>(cells_.size())) {
      for (const auto & [k, ids] : cells_) {
        visit(ids);
      }
    } else {
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::int64_t cy = y0; cy <= y1; ++cy) {
          auto it = cells_.find(key(cx, cy));
          if (it != cells_.end()) {
            visit(it->second);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Segments whose polyline lies within `radius` of `center`, nearest first, ties by id.
  std::vector<SegmentHit> query_disc(const Point2 & center, double radius) const
  {
    const BoundingBox box{center.x - radius, center.y - radius, center.x + radius, center.y + radius};
    std::vector<SegmentHit> hits;
    for (std::size_t i : query_box(box)) {
      const double d = polyline_distance(center, segments_[i].points);
      if (d <= radius) {
        hits.push_back({i, d});
      }
    }
    sort_hits(hits);
    return hits;
  }

  void sort_hits(std::vector<SegmentHit> & hits) const
  {
    std::sort(hits.begin(), hits.end(), [this](const SegmentHit & a, const SegmentHit & b) {
      if (a.distance != b.distance) {
        return a.distance < b.distance;
      }
      return segments_[a.index].segment_id < segments_[b.index].segment_id;
    });
  }

private:
  std::int64_t cell(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_size_)); }
  static std::uint64_t key(std::int64_t cx, std::int64_t cy)
  {
    return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xFFFFFFFFull);
  }

  std::vector<LaneSegment> segments_;
  std::vector<BoundingBox> boxes_;
  double cell_size_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

inline SegmentIndex build_index(std::vector<LaneSegment> segments, double cell_size = 10.0)
{
  return SegmentIndex(std::move(segments), cell_size);
}

/// Segments within D(object_type) of `position`, nearest first, capped at cfg.max_segments.
inline std::vector<LaneSegment> query_segments(
  const SegmentIndex & index, const Point2 & position, ObjectType object_type,
  const MapQueryConfig & cfg)
{
  std::vector<LaneSegment> out;
  for (const SegmentHit & h : index.query_disc(position, cfg.radius(object_type))) {
    if (out.size() == cfg.max_segments) {
      break;
    }
    out.push_back(index.segments()[h.index]);
  }
  return out;
}

/// Agent-frame topology features, one [p_max, 5] matrix per segment.
inline std::vector<LaneFeature> lane_features(
  const std::vector<LaneSegment> & segments, const Pose2 & agent_pose, std::size_t p_max)
{
  std::vector<LaneFeature> out;
  out.reserve(segments.size());
  for (const LaneSegment & seg : segments) {
    if (seg.points.size() < 2 || seg.points.size() > p_max) {
      throw Error(
        ErrorCode::InvariantViolation, "segment " + seg.segment_id + " has " +
                                         std::to_string(seg.points.size()) + " points");
    }
    LaneFeature f{nn::Tensor({p_max, kLaneFeatureWidth})};
    std::vector<Point2> local;
    local.reserve(seg.points.size());
    for (const Point2 & p : seg.points) {
      local.push_back(to_agent_frame(p, agent_pose));
    }
    const std::size_t n = local.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 & a = local[i + 1 < n ? i : i - 1];
      const Point2 & b = local[i + 1 < n ? i + 1 : i];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      if (!(len > 0.0)) {
        throw Error(
          ErrorCode::InvariantViolation, "segment " + seg.segment_id + " repeats a point");
      }
      f.rows.at(i, 0) = static_cast<float>(local[i].x);
      f.rows.at(i, 1) = static_cast<float>(local[i].y);
      f.rows.at(i, 2) = static_cast<float>((b.x - a.x) / len);
      f.rows.at(i, 3) = static_cast<float>((b.y - a.y) / len);
      f.rows.at(i, 4) = 1.0f;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__MAP_HPP_
