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

#ifndef TJF__EVALUATION_HPP_
#define TJF__EVALUATION_HPP_

#include "tjf/error.hpp"
#include "tjf/metrics.hpp"
#include "tjf/object_type.hpp"
#include "tjf/scenario.hpp"

#include <array>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace tjf
{

/// Focal-agent future in the world frame, masked by state validity.
inline GroundTruth focal_ground_truth(const Scenario & s)
{
  const AgentTrack & t = focal_track(s);
  const std::size_t H = s.horizon.history;
  GroundTruth gt;
  gt.xy.reserve(2 * s.horizon.future);
  for (std::size_t i = 0; i < s.horizon.future; ++i) {
    const AgentState & st = t.states[H + i];
    gt.xy.push_back(st.valid ? st.pose.x : 0.0);
    gt.xy.push_back(st.valid ? st.pose.y : 0.0);
    gt.mask.push_back(st.valid ? 1 : 0);
  }
  return gt;
}

/// Single-mode reference predictor: extrapolates the last observed velocity.
inline MultiModalPrediction constant_velocity_prediction(const Scenario & s)
{
  const AgentTrack & t = focal_track(s);
  const AgentState & last = t.states.at(s.horizon.history - 1);
  if (!last.valid) {
    throw Error(ErrorCode::MissingReferenceState, s.focal_agent_id);
  }
  MultiModalPrediction p;
  p.modes = 1;
  p.steps = s.horizon.future;
  p.probabilities = {1.0};
  for (std::size_t i = 1; i <= p.steps; ++i) {
    const double dt = kTimeStep * static_cast<double>(i);
    p.xy.push_back(last.pose.x + last.vx * dt);
    p.xy.push_back(last.pose.y + last.vy * dt);
  }
  return p;
}

struct EvalSample
{
  std::string scenario_id;
  ObjectType object_type{ObjectType::Vehicle};
  MultiModalPrediction prediction;
  GroundTruth ground_truth;
};

struct MetricSet
{
  double min_ade{0.0};
  double min_fde{0.0};
  double miss_rate{0.0};
  double brier_min_ade{0.0};
  double brier_min_fde{0.0};
};

struct EvalRow
{
  std::string category;  //!< "all" or an object type name
  std::size_t count{0};
  std::size_t k{0};
  MetricSet metrics;
};

struct EvalConfig
{
  std::vector<std::size_t> k_report{1, 6};
  double miss_threshold{kDefaultMissThreshold};
};

/// Rows grouped by K, then "all" followed by every object type present.
struct EvalReport
{
  std::vector<EvalRow> rows;

  const EvalRow * find(const std::string & category, std::size_t k) const
  {
    for (const auto & r : rows) {
      if (r.category == category && r.k == k) {
        return &r;
      }
    }
    return nullptr;
  }
};

inline MetricSet score_sample(
  const MultiModalPrediction & p, const GroundTruth & gt, double miss_threshold)
{
  const ModeScore ade = min_ade(p, gt);
  const ModeScore fde = min_fde(p, gt);
  const BrierScores b = brier_metrics(p, gt);
  return {ade.value, fde.value, fde.value > miss_threshold ? 1.0 : 0.0, b.brier_min_ade,
          b.brier_min_fde};
}

/**
 * @brief Aggregates metrics over samples, overall and per focal object type.
 *
 * For each K in the config only the K most probable modes are scored.
 * Sums are accumulated in sample order.
 */
inline EvalReport evaluate_samples(const std::vector<EvalSample> & samples, const EvalConfig & cfg = {})
{
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no samples to evaluate");
  }
  EvalReport report;
  for (std::size_t k : cfg.k_report) {
    if (k == 0) {
      throw Error(ErrorCode::InvalidConfig, "k_report entries must be positive");
    }
    std::array<MetricSet, kNumObjectTypes + 1> sums{};
    std::array<std::size_t, kNumObjectTypes + 1> counts{};
    for (const auto & smp : samples) {
      const MetricSet m = score_sample(top_k_modes(smp.prediction, k), smp.ground_truth, cfg.miss_threshold);
      for (std::size_t slot : {std::size_t{0}, index_of(smp.object_type) + 1}) {
        sums[slot].min_ade += m.min_ade;
        sums[slot].min_fde += m.min_fde;
        sums[slot].miss_rate += m.miss_rate;
        sums[slot].brier_min_ade += m.brier_min_ade;
        sums[slot].brier_min_fde += m.brier_min_fde;
        ++counts[slot];
      }
    }
    for (std::size_t slot = 0; slot <= kNumObjectTypes; ++slot) {
      if (counts[slot] == 0) {
        continue;
      }
      const double n = static_cast<double>(counts[slot]);
      EvalRow row;
      row.category = slot == 0 ? "all" : to_string(kAllObjectTypes[slot - 1]);
      row.count = counts[slot];
      row.k = k;
      row.metrics = {sums[slot].min_ade / n, sums[slot].min_fde / n, sums[slot].miss_rate / n,
                     sums[slot].brier_min_ade / n, sums[slot].brier_min_fde / n};
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

using Predictor = std::function<MultiModalPrediction(const Scenario &)>;

inline EvalReport evaluate(
  const std::vector<Scenario> & dataset, const Predictor & predictor, const EvalConfig & cfg = {})
{
  if (dataset.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no scenarios to evaluate");
  }
  std::vector<EvalSample> samples;
  samples.reserve(dataset.size());
  for (const Scenario & s : dataset) {
    samples.push_back(
      {s.scenario_id, focal_track(s).object_type, predictor(s), focal_ground_truth(s)});
  }
  return evaluate_samples(samples, cfg);
}

namespace detail
{
inline std::string fixed6(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}
}  // namespace detail

/// Tab-separated table, one row per (K, category), then a blank line and a key=value block.
inline std::string format_report(const EvalReport & r)
{
  std::string out = "category\tK\tcount\tminADE\tminFDE\tMR\tbrier-minADE\tbrier-minFDE\n";
  for (const auto & row : r.rows) {
    const auto & m = row.metrics;
    out += row.category + '\t' + std::to_string(row.k) + '\t' + std::to_string(row.count) + '\t' +
           detail::fixed6(m.min_ade) + '\t' + detail::fixed6(m.min_fde) + '\t' +
           detail::fixed6(m.miss_rate) + '\t' + detail::fixed6(m.brier_min_ade) + '\t' +
           detail::fixed6(m.brier_min_fde) + '\n';
  }
  out += '\n';
  for (const auto & row : r.rows) {
    const std::string p = row.category + ".k" + std::to_string(row.k) + '.';
    const auto & m = row.metrics;
    out += p + "count=" + std::to_string(row.count) + '\n';
    out += p + "min_ade=" + detail::fixed6(m.min_ade) + '\n';
    out += p + "min_fde=" + detail::fixed6(m.min_fde) + '\n';
    out += p + "miss_rate=" + detail::fixed6(m.miss_rate) + '\n';
    out += p + "brier_min_ade=" + detail::fixed6(m.brier_min_ade) + '\n';
    out += p + "brier_min_fde=" + detail::fixed6(m.brier_min_fde) + '\n';
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__EVALUATION_HPP_
