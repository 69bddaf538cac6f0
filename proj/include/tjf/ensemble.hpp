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

#ifndef TJF__ENSEMBLE_HPP_
#define TJF__ENSEMBLE_HPP_

#include "tjf/error.hpp"
#include "tjf/kmeans.hpp"
#include "tjf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace tjf
{

/// Candidates pooled from M models, each contributing one probability-normalized block.
struct CandidateSet
{
  std::size_t steps{0};
  std::vector<double> xy;                 //!< (M*K) * steps * 2
  std::vector<double> probabilities;      //!< M*K
  std::vector<std::size_t> source_model;  //!< M*K

  std::size_t size() const noexcept { return probabilities.size(); }

  void add_model(const MultiModalPrediction & p)
  {
    p.check();
    if (size() == 0) {
      steps = p.steps;
    } else if (p.steps != steps) {
      throw Error(ErrorCode::ShapeMismatch, "candidate horizons differ");
    }
    const std::size_t model = source_model.empty() ? 0 : source_model.back() + 1;
    xy.insert(xy.end(), p.xy.begin(), p.xy.end());
    probabilities.insert(probabilities.end(), p.probabilities.begin(), p.probabilities.end());
    source_model.insert(source_model.end(), p.modes, model);
  }

  /// Each model's probability block sums to 1 within `tol`.
  bool blocks_normalized(double tol = 1e-5) const
  {
    std::vector<double> sums;
    for (std::size_t i = 0; i < size(); ++i) {
      if (source_model[i] >= sums.size()) sums.resize(source_model[i] + 1, 0.0);
      sums[source_model[i]] += probabilities[i];
    }
    return std::all_of(sums.begin(), sums.end(), [&](double s) { return std::abs(s - 1.0) <= tol; });
  }
};

/// Averaged probabilities already within this distance of a unit sum are left as they are.
inline constexpr double kRenormalizeTolerance = 1e-6;

/**
 * @brief Clusters candidate endpoints into k groups and averages each group.
 *
 * Trajectories are averaged pointwise and probabilities averaged then
 * renormalized unless they already sum to 1 within kRenormalizeTolerance;
 * modes are returned most probable first (stable on ties).
 */
inline MultiModalPrediction ensemble_merge(
  const CandidateSet & c, std::size_t k, const KMeansOptions & opt = {})
{
  if (c.size() < k || k == 0) {
    throw Error(
      ErrorCode::TooFewPoints,
      std::to_string(c.size()) + " candidates for " + std::to_string(k) + " outputs");
  }
  if (c.xy.size() != c.size() * c.steps * 2 || c.steps == 0) {
    throw Error(ErrorCode::ShapeMismatch, "candidate arrays disagree with steps");
  }
  const std::size_t stride = c.steps * 2;
  std::vector<Point2> endpoints(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    endpoints[i] = {c.xy[i * stride + stride - 2], c.xy[i * stride + stride - 1]};
  }
  const KMeansResult km = kmeans(endpoints, k, opt);

  std::vector<double> xy(k * stride, 0.0);
  std::vector<double> prob(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::size_t g = km.assignments[i];
    for (std::size_t j = 0; j < stride; ++j) {
      xy[g * stride + j] += c.xy[i * stride + j];
    }
    prob[g] += c.probabilities[i];
    ++count[g];
  }
  double total = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double n = static_cast<double>(count[g]);
    for (std::size_t j = 0; j < stride; ++j) {
      xy[g * stride + j] /= n;
    }
    prob[g] = std::max(0.0, prob[g] / n);
    total += prob[g];
  }
  if (!(total > 0.0)) {
    std::fill(prob.begin(), prob.end(), 1.0 / static_cast<double>(k));
  } else if (std::abs(total - 1.0) > kRenormalizeTolerance) {
    for (double & p : prob) {
      p /= total;
    }
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return prob[a] > prob[b];
  });
  MultiModalPrediction out;
  out.modes = k;
  out.steps = c.steps;
  out.xy.reserve(k * stride);
  for (std::size_t g : order) {
    out.xy.insert(
      out.xy.end(), xy.begin() + static_cast<std::ptrdiff_t>(g * stride),
      xy.begin() + static_cast<std::ptrdiff_t>((g + 1) * stride));
    out.probabilities.push_back(prob[g]);
  }
  return out;
}

inline MultiModalPrediction ensemble_merge(
  const std::vector<MultiModalPrediction> & models, std::size_t k, const KMeansOptions & opt = {})
{
  CandidateSet c;
  for (const auto & m : models) {
    c.add_model(m);
  }
  return ensemble_merge(c, k, opt);
}

}  // namespace tjf

#endif  // TJF__ENSEMBLE_HPP_
