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

#ifndef TJF__METRICS_HPP_
#define TJF__METRICS_HPP_

#include "tjf/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace tjf
{

/// K trajectories of T (x, y) steps with one probability per mode.
struct MultiModalPrediction
{
  std::size_t modes{0};
  std::size_t steps{0};
  std::vector<double> xy;             //!< modes * steps * 2, row-major
  std::vector<double> probabilities;  //!< modes

  double x(std::size_t k, std::size_t t) const { return xy[(k * steps + t) * 2]; }
  double y(std::size_t k, std::size_t t) const { return xy[(k * steps + t) * 2 + 1]; }

  void check() const
  {
    if (xy.size() != modes * steps * 2 || probabilities.size() != modes || modes == 0) {
      throw Error(ErrorCode::ShapeMismatch, "prediction arrays disagree with modes/steps");
    }
  }
};

struct GroundTruth
{
  std::vector<double> xy;            //!< steps * 2
  std::vector<std::uint8_t> mask;    //!< steps

  std::size_t steps() const noexcept { return mask.size(); }
};

struct ModeScore
{
  double value{0.0};
  std::size_t mode{0};
};

namespace detail
{
inline void check_pair(const MultiModalPrediction & p, const GroundTruth & gt)
{
  p.check();
  if (gt.xy.size() != gt.mask.size() * 2 || gt.mask.size() != p.steps) {
    throw Error(ErrorCode::ShapeMismatch, "ground truth length != prediction steps");
  }
}

inline std::size_t last_valid_step(const GroundTruth & gt)
{
  for (std::size_t t = gt.mask.size(); t-- > 0;) {
    if (gt.mask[t]) {
      return t;
    }
  }
  throw Error(ErrorCode::NoValidFuture, "no valid ground-truth step");
}
}  // namespace detail

inline double mode_ade(const MultiModalPrediction & p, const GroundTruth & gt, std::size_t k)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < gt.steps(); ++t) {
    if (gt.mask[t]) {
      const double dx = p.x(k, t) - gt.xy[2 * t];
      const double dy = p.y(k, t) - gt.xy[2 * t + 1];
      sum += std::sqrt(dx * dx + dy * dy);
      ++n;
    }
  }
  if (n == 0) {
    throw Error(ErrorCode::NoValidFuture, "no valid ground-truth step");
  }
  return sum / static_cast<double>(n);
}

inline double mode_fde(const MultiModalPrediction & p, const GroundTruth & gt, std::size_t k)
{
  const std::size_t t = detail::last_valid_step(gt);
  const double dx = p.x(k, t) - gt.xy[2 * t];
  const double dy = p.y(k, t) - gt.xy[2 * t + 1];
  return std::sqrt(dx * dx + dy * dy);
}

/// Minimum over modes of mean displacement on valid steps; ties go to the lowest mode.
inline ModeScore min_ade(const MultiModalPrediction & p, const GroundTruth & gt)
{
  detail::check_pair(p, gt);
  ModeScore best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < p.modes; ++k) {
    const double v = mode_ade(p, gt, k);
    if (v < best.value) {
      best = {v, k};
    }
  }
  return best;
}

/// Minimum over modes of the displacement at the last valid step.
inline ModeScore min_fde(const MultiModalPrediction & p, const GroundTruth & gt)
{
  detail::check_pair(p, gt);
  ModeScore best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < p.modes; ++k) {
    const double v = mode_fde(p, gt, k);
    if (v < best.value) {
      best = {v, k};
    }
  }
  return best;
}

inline constexpr double kDefaultMissThreshold = 2.0;

/// 1 when the best endpoint misses by strictly more than `threshold` meters.
inline int miss_rate(
  const MultiModalPrediction & p, const GroundTruth & gt, double threshold = kDefaultMissThreshold)
{
  return min_fde(p, gt).value > threshold ? 1 : 0;
}

struct BrierScores
{
  double brier_min_ade{0.0};
  double brier_min_fde{0.0};
};

/// minX + (1 - p*)^2 with p* the probability of the mode attaining minX.
inline BrierScores brier_metrics(const MultiModalPrediction & p, const GroundTruth & gt)
{
  const ModeScore ade = min_ade(p, gt);
  const ModeScore fde = min_fde(p, gt);
  const double pa = 1.0 - p.probabilities[ade.mode];
  const double pf = 1.0 - p.probabilities[fde.mode];
  return {ade.value + pa * pa, fde.value + pf * pf};
}

/// The k most probable modes, most probable first (stable, ties to the lowest index).
/// Returns the input unchanged when k covers every mode.
inline MultiModalPrediction top_k_modes(const MultiModalPrediction & p, std::size_t k)
{
  p.check();
  if (k >= p.modes) {
    return p;
  }
  std::vector<std::size_t> order(p.modes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.probabilities[a] > p.probabilities[b];
  });
  order.resize(k);
  MultiModalPrediction out;
  out.modes = order.size();
  out.steps = p.steps;
  for (std::size_t m : order) {
    out.xy.insert(
      out.xy.end(), p.xy.begin() + static_cast<std::ptrdiff_t>(m * p.steps * 2),
      p.xy.begin() + static_cast<std::ptrdiff_t>((m + 1) * p.steps * 2));
    out.probabilities.push_back(p.probabilities[m]);
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__METRICS_HPP_
