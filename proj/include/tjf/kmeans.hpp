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

#ifndef TJF__KMEANS_HPP_
#define TJF__KMEANS_HPP_

#include "tjf/error.hpp"
#include "tjf/geometry.hpp"
#include "tjf/nn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace tjf
{

struct KMeansResult
{
  std::vector<std::size_t> assignments;  //!< cluster per point
  std::vector<Point2> centroids;         //!< K
  double objective{0.0};                 //!< sum of squared distances to assigned centroids
  std::vector<double> objective_trace;   //!< objective after each Lloyd update (best restart)
};

struct KMeansOptions
{
  std::uint64_t seed{0};
  std::size_t max_iters{100};
  std::size_t restarts{10};  //!< independent seeded k-means++ runs; the lowest objective wins
};

inline double squared_distance(const Point2 & a, const Point2 & b) noexcept
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double kmeans_objective(
  const std::vector<Point2> & points, const std::vector<std::size_t> & assignments,
  const std::vector<Point2> & centroids)
{
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    s += squared_distance(points[i], centroids[assignments[i]]);
  }
  return s;
}

namespace detail
{

inline std::vector<Point2> kmeanspp_init(
  const std::vector<Point2> & points, std::size_t k, nn::SplitMix64 & rng)
{
  const std::size_t n = points.size();
  std::vector<Point2> centers;
  std::vector<std::uint8_t> chosen(n, 0);
  std::size_t first = rng.index(n);
  centers.push_back(points[first]);
  chosen[first] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = squared_distance(points[i], centers[0]);
  }
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0 && (u < d2[i] || pick == n)) {
          pick = i;
          if (u < d2[i]) break;
        }
        u -= d2[i];
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = 1;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

inline std::size_t nearest(const Point2 & p, const std::vector<Point2> & centroids)
{
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

/// Moves, for every empty cluster, the point farthest from its centroid in the largest cluster.
inline void repair_empty(
  const std::vector<Point2> & points, std::vector<std::size_t> & assign,
  std::vector<Point2> & centroids)
{
  const std::size_t k = centroids.size();
  while (true) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : assign) ++sizes[a];
    std::size_t empty = k;
    for (std::size_t c = 0; c < k && empty == k; ++c) {
      if (sizes[c] == 0) empty = c;
    }
    if (empty == k) {
      return;
    }
    std::size_t largest = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (sizes[c] > sizes[largest]) largest = c;
    }
    std::size_t far = points.size();
    double fd = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assign[i] == largest) {
        const double d = squared_distance(points[i], centroids[largest]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
    }
    assign[far] = empty;
    centroids[empty] = points[far];
  }
}

inline void update_centroids(
  const std::vector<Point2> & points, const std::vector<std::size_t> & assign,
  std::vector<Point2> & centroids)
{
  std::vector<double> sx(centroids.size(), 0.0), sy(centroids.size(), 0.0);
  std::vector<std::size_t> cnt(centroids.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sx[assign[i]] += points[i].x;
    sy[assign[i]] += points[i].y;
    ++cnt[assign[i]];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (cnt[c]) {
      centroids[c] = {sx[c] / static_cast<double>(cnt[c]), sy[c] / static_cast<double>(cnt[c])};
    }
  }
}

/**
 * @brief Single-point moves that lower the objective, counting centroid shifts.
 *
 * Moving x from cluster a (size na) to b (size nb) changes the objective by
 * nb / (nb + 1) |x - cb|^2 - na / (na - 1) |x - ca|^2. A stable result is also
 * a Lloyd fixpoint, so every point stays with its nearest centroid.
 */
inline void hartigan_refine(
  const std::vector<Point2> & points, std::vector<std::size_t> & assign,
  std::vector<Point2> & centroids, std::size_t max_passes, std::vector<double> & trace)
{
  const std::size_t k = centroids.size();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assign) ++sizes[a];
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t a = assign[i];
      if (sizes[a] < 2) {
        continue;
      }
      const double na = static_cast<double>(sizes[a]);
      const double removal = na / (na - 1.0) * squared_distance(points[i], centroids[a]);
      std::size_t best = a;
      double best_delta = -1e-12 * (1.0 + trace.back());
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = static_cast<double>(sizes[b]);
        const double delta = nb / (nb + 1.0) * squared_distance(points[i], centroids[b]) - removal;
        if (delta < best_delta) {
          best_delta = delta;
          best = b;
        }
      }
      if (best != a) {
        assign[i] = best;
        --sizes[a];
        ++sizes[best];
        update_centroids(points, assign, centroids);
        trace.push_back(kmeans_objective(points, assign, centroids));
        moved = true;
      }
    }
    if (!moved) {
      return;
    }
  }
}

inline KMeansResult lloyd(
  const std::vector<Point2> & points, std::vector<Point2> centroids, std::size_t max_iters)
{
  KMeansResult r;
  std::vector<std::size_t> assign(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    assign[i] = nearest(points[i], centroids);
  }
  repair_empty(points, assign, centroids);
  update_centroids(points, assign, centroids);
  r.objective_trace.push_back(kmeans_objective(points, assign, centroids));
  for (std::size_t it = 1; it < max_iters; ++it) {
    std::vector<std::size_t> next(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      next[i] = nearest(points[i], centroids);
    }
    repair_empty(points, next, centroids);
    if (next == assign) {
      break;
    }
    assign = std::move(next);
    update_centroids(points, assign, centroids);
    r.objective_trace.push_back(kmeans_objective(points, assign, centroids));
  }
  hartigan_refine(points, assign, centroids, max_iters, r.objective_trace);
  r.assignments = std::move(assign);
  r.centroids = std::move(centroids);
  r.objective = r.objective_trace.back();
  return r;
}

}  // namespace detail

/**
 * @brief Seeded k-means++ initialization followed by Lloyd iterations.
 *
 * Iterates to an assignment fixpoint or `max_iters`; empty clusters are
 * repaired by stealing the farthest point of the largest cluster. The
 * fixpoint is then refined with single-point moves. The best
 * of `restarts` runs (by objective, ties to the earliest) is returned.
 */
inline KMeansResult kmeans(
  const std::vector<Point2> & points, std::size_t k, const KMeansOptions & opt = {})
{
  if (k == 0 || points.size() < k) {
    throw Error(
      ErrorCode::TooFewPoints,
      std::to_string(points.size()) + " points for " + std::to_string(k) + " clusters");
  }
  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const std::size_t runs = opt.restarts == 0 ? 1 : opt.restarts;
  for (std::size_t r = 0; r < runs; ++r) {
    nn::SplitMix64 rng(opt.seed * 0x9E3779B97F4A7C15ull + r);
    KMeansResult cur =
      detail::lloyd(points, detail::kmeanspp_init(points, k, rng), std::max<std::size_t>(1, opt.max_iters));
    if (cur.objective < best.objective) {
      best = std::move(cur);
    }
  }
  return best;
}

}  // namespace tjf

#endif  // TJF__KMEANS_HPP_
