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

#ifndef TJF__DATAIO_HPP_
#define TJF__DATAIO_HPP_

#include "tjf/decimal.hpp"
#include "tjf/error.hpp"
#include "tjf/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace tjf
{

/*
 * Scenario record, one per line:
 *   scenario_id|focal_id|H,T|TRACK;TRACK;...|LANE;LANE;...
 *   TRACK = agent_id,object_type,(x y heading vx vy valid)*(H+T)
 *   LANE  = lane_id,(x y)*n
 */

inline std::vector<std::string_view> split_view(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Nearest float32 heading that stays inside (-pi, pi].
inline double quantize_heading(double heading)
{
  float f = static_cast<float>(normalize_angle(heading));
  while (static_cast<double>(f) > std::numbers::pi) {
    f = std::nextafter(f, 0.0f);
  }
  while (static_cast<double>(f) <= -std::numbers::pi) {
    f = std::nextafter(f, 0.0f);
  }
  return f;
}

inline std::string write_scenario(const Scenario & s)
{
  validate_scenario(s);
  std::string out;
  out.reserve(64 + s.tracks.size() * s.horizon.total() * 60);
  out += s.scenario_id;
  out += '|';
  out += s.focal_agent_id;
  out += '|';
  out += std::to_string(s.horizon.history) + "," + std::to_string(s.horizon.future);
  out += '|';
  for (std::size_t i = 0; i < s.tracks.size(); ++i) {
    const AgentTrack & t = s.tracks[i];
    if (i) out += ';';
    out += t.agent_id;
    out += ',';
    out += to_string(t.object_type);
    out += ',';
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      const AgentState & st = t.states[k];
      if (k) out += ' ';
      out += format_decimal(static_cast<float>(st.pose.x)) + ' ';
      out += format_decimal(static_cast<float>(st.pose.y)) + ' ';
      out += format_decimal(static_cast<float>(st.pose.heading)) + ' ';
      out += format_decimal(static_cast<float>(st.vx)) + ' ';
      out += format_decimal(static_cast<float>(st.vy)) + ' ';
      out += st.valid ? '1' : '0';
    }
  }
  out += '|';
  for (std::size_t i = 0; i < s.map.lanes.size(); ++i) {
    const Lane & lane = s.map.lanes[i];
    if (i) out += ';';
    out += lane.id;
    out += ',';
    for (std::size_t k = 0; k < lane.points.size(); ++k) {
      if (k) out += ' ';
      out += format_decimal(static_cast<float>(lane.points[k].x)) + ' ';
      out += format_decimal(static_cast<float>(lane.points[k].y));
    }
  }
  return out;
}

namespace detail
{
inline std::size_t parse_count(std::string_view s, std::size_t line, std::size_t field, const char * what)
{
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, field, std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<double> parse_numbers(
  std::string_view s, std::size_t line, std::size_t field, const std::string & what)
{
  std::vector<double> out;
  if (s.empty()) {
    return out;
  }
  for (std::string_view tok : split_view(s, ' ')) {
    const auto v = parse_decimal(tok);
    if (!v) {
      throw ParseError(line, field, "bad number '" + std::string(tok) + "' in " + what);
    }
    out.push_back(*v);
  }
  return out;
}
}  // namespace detail

/**
 * @brief Parses and validates one scenario record.
 *
 * Throws ParseError (with `line_number` and the 1-based '|' field) for
 * malformed text, InvariantViolation naming the failed check otherwise.
 */
inline Scenario parse_scenario(std::string_view line, std::size_t line_number = 1)
{
  if (!line.empty() && line.back() == '\r') {
    line.remove_suffix(1);
  }
  const auto fields = split_view(line, '|');
  if (fields.size() != 5) {
    throw ParseError(
      line_number, fields.size(), "expected 5 '|' fields, got " + std::to_string(fields.size()));
  }
  Scenario s;
  s.scenario_id = std::string(fields[0]);
  s.focal_agent_id = std::string(fields[1]);
  const auto ht = split_view(fields[2], ',');
  if (ht.size() != 2) {
    throw ParseError(line_number, 3, "expected 'H,T'");
  }
  s.horizon.history = detail::parse_count(ht[0], line_number, 3, "H");
  s.horizon.future = detail::parse_count(ht[1], line_number, 3, "T");

  if (!fields[3].empty()) {
    for (std::string_view rec : split_view(fields[3], ';')) {
      const auto parts = split_view(rec, ',');
      if (parts.size() != 3) {
        throw ParseError(line_number, 4, "track needs 'id,type,values'");
      }
      AgentTrack t;
      t.agent_id = std::string(parts[0]);
      try {
        t.object_type = object_type_from_string(parts[1]);
      } catch (const Error &) {
        throw ParseError(line_number, 4, "unknown object type '" + std::string(parts[1]) + "'");
      }
      const auto values = detail::parse_numbers(parts[2], line_number, 4, "track " + t.agent_id);
      if (values.size() % 6 != 0) {
        throw ParseError(line_number, 4, "track " + t.agent_id + " value count not a multiple of 6");
      }
      for (std::size_t k = 0; k < values.size(); k += 6) {
        AgentState st;
        st.pose = {values[k], values[k + 1], values[k + 2]};
        st.vx = values[k + 3];
        st.vy = values[k + 4];
        if (values[k + 5] != 0.0 && values[k + 5] != 1.0) {
          throw ParseError(line_number, 4, "valid flag must be 0 or 1");
        }
        st.valid = values[k + 5] == 1.0;
        t.states.push_back(st);
      }
      s.tracks.push_back(std::move(t));
    }
  }
  if (!fields[4].empty()) {
    for (std::string_view rec : split_view(fields[4], ';')) {
      const auto parts = split_view(rec, ',');
      if (parts.size() != 2) {
        throw ParseError(line_number, 5, "lane needs 'id,points'");
      }
      Lane lane;
      lane.id = std::string(parts[0]);
      const auto values = detail::parse_numbers(parts[1], line_number, 5, "lane " + lane.id);
      if (values.size() % 2 != 0) {
        throw ParseError(line_number, 5, "lane " + lane.id + " has an odd coordinate count");
      }
      for (std::size_t k = 0; k < values.size(); k += 2) {
        lane.points.push_back({values[k], values[k + 1]});
      }
      s.map.lanes.push_back(std::move(lane));
    }
  }
  validate_scenario(s);
  return s;
}

inline std::vector<Scenario> parse_scenarios(std::istream & in)
{
  std::vector<Scenario> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") {
      continue;
    }
    out.push_back(parse_scenario(line, n));
  }
  return out;
}

inline std::vector<Scenario> read_scenario_file(const std::string & path)
{
  std::ifstream f(path);
  if (!f) {
    throw Error(ErrorCode::IoError, "cannot read " + path);
  }
  return parse_scenarios(f);
}

inline std::string write_scenarios(const std::vector<Scenario> & scenarios)
{
  std::string out;
  for (const Scenario & s : scenarios) {
    out += write_scenario(s);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string & path, const std::string & text)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  f << text;
  if (!f) {
    throw Error(ErrorCode::IoError, "write failed for " + path);
  }
}

inline void write_scenario_file(const std::string & path, const std::vector<Scenario> & scenarios)
{
  write_text_file(path, write_scenarios(scenarios));
}

}  // namespace tjf

#endif  // TJF__DATAIO_HPP_
