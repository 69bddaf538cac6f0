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

#ifndef TJF__INFERENCE_HPP_
#define TJF__INFERENCE_HPP_

#include "tjf/features.hpp"
#include "tjf/forecaster.hpp"
#include "tjf/geometry.hpp"
#include "tjf/metrics.hpp"
#include "tjf/prediction_io.hpp"
#include "tjf/scenario.hpp"

#include <string>
#include <vector>

namespace tjf
{

/// Maps agent-frame model output back to the world through the reference pose.
inline MultiModalPrediction forecast_to_world(const ForecastOutput & out, const Pose2 & reference)
{
  MultiModalPrediction p;
  p.modes = out.trajectories.shape.at(0);
  p.steps = out.trajectories.shape.at(1);
  p.xy.reserve(p.modes * p.steps * 2);
  const auto & d = out.trajectories.data;
  for (std::size_t i = 0; i + 1 < d.size(); i += 2) {
    const Point2 w = from_agent_frame(Point2{d[i], d[i + 1]}, reference);
    p.xy.push_back(w.x);
    p.xy.push_back(w.y);
  }
  p.probabilities.assign(out.probabilities.begin(), out.probabilities.end());
  return p;
}

inline MultiModalPrediction predict_focal(const Forecaster & model, const Scenario & s)
{
  const FeatureBundle b = build_focal_bundle(s, model.config());
  return forecast_to_world(model.predict(b), b.reference);
}

inline std::vector<PredictionRecord> predict_dataset(
  const Forecaster & model, const std::vector<Scenario> & dataset)
{
  std::vector<PredictionRecord> out;
  out.reserve(dataset.size());
  for (const Scenario & s : dataset) {
    out.push_back({s.scenario_id, predict_focal(model, s)});
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__INFERENCE_HPP_
