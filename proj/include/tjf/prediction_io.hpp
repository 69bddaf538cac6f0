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

#ifndef TJF__PREDICTION_IO_HPP_
#define TJF__PREDICTION_IO_HPP_

#include "tjf/dataio.hpp"
#include "tjf/decimal.hpp"
#include "tjf/error.hpp"
#include "tjf/metrics.hpp"
#include "tjf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tjf
{

/// World-frame multi-modal prediction for one scenario's focal agent.
struct PredictionRecord
{
  std::string scenario_id;
  MultiModalPrediction prediction;

  bool operator==(const PredictionRecord & o) const
  {
    return scenario_id == o.scenario_id && prediction.modes == o.prediction.modes &&
           prediction.steps == o.prediction.steps && prediction.xy == o.prediction.xy &&
           prediction.probabilities == o.prediction.probabilities;
  }
};

/// `scenario_id|p_1 ... p_K|x y x y ...` with K*T coordinate pairs, mode-major.
inline std::string write_prediction(const PredictionRecord & r)
{
  r.prediction.check();
  if (!is_valid_identifier(r.scenario_id)) {
    throw Error(ErrorCode::InvariantViolation, "scenario_id");
  }
  std::string out = r.scenario_id;
  out += '|';
  for (std::size_t k = 0; k < r.prediction.modes; ++k) {
    if (k) out += ' ';
    out += format_decimal(static_cast<float>(r.prediction.probabilities[k]));
  }
  out += '|';
  for (std::size_t i = 0; i < r.prediction.xy.size(); ++i) {
    if (i) out += ' ';
    const float v = static_cast<float>(r.prediction.xy[i]);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvariantViolation, "finite prediction");
    }
    out += format_decimal(v);
  }
  return out;
}

inline PredictionRecord parse_prediction(std::string_view line, std::size_t line_number = 1)
{
  if (!line.empty() && line.back() == '\r') {
    line.remove_suffix(1);
  }
  const auto fields = split_view(line, '|');
  if (fields.size() != 3) {
    throw ParseError(
      line_number, fields.size() < 3 ? fields.size() + 1 : 4,
      "expected 3 '|' separated fields, found " + std::to_string(fields.size()));
  }
  PredictionRecord r;
  r.scenario_id = std::string(fields[0]);
  if (!is_valid_identifier(r.scenario_id)) {
    throw ParseError(line_number, 1, "bad scenario_id");
  }
  r.prediction.probabilities = detail::parse_numbers(fields[1], line_number, 2, "probabilities");
  r.prediction.xy = detail::parse_numbers(fields[2], line_number, 3, "trajectories");
  const std::size_t k = r.prediction.probabilities.size();
  if (k == 0) {
    throw ParseError(line_number, 2, "no probabilities");
  }
  if (r.prediction.xy.empty() || r.prediction.xy.size() % (2 * k) != 0) {
    throw ParseError(
      line_number, 3,
      std::to_string(r.prediction.xy.size()) + " coordinates is not a multiple of 2*" +
        std::to_string(k));
  }
  r.prediction.modes = k;
  r.prediction.steps = r.prediction.xy.size() / (2 * k);
  return r;
}

inline std::string write_predictions(const std::vector<PredictionRecord> & records)
{
  std::string out;
  for (const auto & r : records) {
    out += write_prediction(r);
    out += '\n';
  }
  return out;
}

inline std::vector<PredictionRecord> parse_predictions(std::istream & in)
{
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") {
      continue;
    }
    out.push_back(parse_prediction(line, n));
  }
  return out;
}

inline std::vector<PredictionRecord> read_prediction_file(const std::string & path)
{
  std::ifstream f(path);
  if (!f) {
    throw Error(ErrorCode::IoError, "cannot read " + path);
  }
  return parse_predictions(f);
}

/// Index by scenario id; a repeated id is rejected.
inline std::map<std::string, MultiModalPrediction> index_predictions(
  const std::vector<PredictionRecord> & records)
{
  std::map<std::string, MultiModalPrediction> out;
  for (const auto & r : records) {
    if (!out.emplace(r.scenario_id, r.prediction).second) {
      throw Error(ErrorCode::InvariantViolation, "duplicate prediction for " + r.scenario_id);
    }
  }
  return out;
}

}  // namespace tjf

#endif  // TJF__PREDICTION_IO_HPP_
