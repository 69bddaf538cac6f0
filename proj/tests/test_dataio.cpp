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

#include "test_util.hpp"
#include "tjf/dataio.hpp"
#include "tjf/evaluation.hpp"
#include "tjf/synthetic.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

namespace
{
using namespace tjf;

/// Random valid scenario drawn independently of the synthetic generator.
Scenario random_scenario(std::mt19937_64 & rng, std::size_t n_agents, std::size_t n_lanes, const std::string & id)
{
  std::uniform_real_distribution<double> pos(-2000.0, 2000.0), vel(-30.0, 30.0),
    head(-std::numbers::pi, std::numbers::pi), unit(0.0, 1.0);
  Scenario s;
  s.scenario_id = id;
  for (std::size_t a = 0; a < n_agents; ++a) {
    AgentTrack t{"agent_" + std::to_string(a), kAllObjectTypes[rng() % kNumObjectTypes], {}};
    for (std::size_t k = 0; k < s.horizon.total(); ++k) {
      AgentState st;
      if (a == 0 || unit(rng) < 0.8) {
        st.pose = {pos(rng), pos(rng), head(rng)};
        st.vx = vel(rng);
        st.vy = vel(rng);
        st.valid = true;
      }
      t.states.push_back(st);
    }
    s.tracks.push_back(std::move(t));
  }
  s.focal_agent_id = "agent_0";
  for (std::size_t l = 0; l < n_lanes; ++l) {
    Lane lane{"lane_" + std::to_string(l), {}};
    const std::size_t n = 2 + rng() % 12;
    double x = pos(rng), y = pos(rng);
    for (std::size_t i = 0; i < n; ++i) {
      lane.points.push_back({x, y});
      x += 1.0 + 5.0 * unit(rng);
      y += 5.0 * unit(rng) - 2.5;
    }
    s.map.lanes.push_back(std::move(lane));
  }
  return test::quantized(s);
}

template <typename F>
Error capture(F && f)
{
  try {
    f();
  } catch (const Error & e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::IoError, "none");
}

template <typename F>
ParseError capture_parse(F && f)
{
  try {
    f();
  } catch (const ParseError & e) {
    return e;
  }
  ADD_FAILURE() << "expected a ParseError";
  return ParseError(0, 0, "none");
}

TEST(Decimal, Float32RoundTripAndFormat)
{
  EXPECT_EQ(format_decimal(0.0f), "0.00000000");
  EXPECT_EQ(format_decimal(1.5f), "1.50000000");
  EXPECT_EQ(format_decimal(-123.25f), "-123.250000");
  EXPECT_EQ(format_decimal(1e7f).find('e') != std::string::npos, true);
  std::mt19937 rng(1);
  for (int i = 0; i < 100000; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(rng());
    float f;
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) continue;
    const std::string s = format_decimal(f);
    if (std::fabs(f) < 1e6f) {
      EXPECT_EQ(s.find_first_of("eE"), std::string::npos) << s;
    }
    const auto back = parse_decimal(s);
    ASSERT_TRUE(back.has_value()) << s;
    EXPECT_EQ(std::memcmp(&*back, &f, sizeof f), 0) << s;
  }
  EXPECT_FALSE(parse_decimal("1.0x"));
  EXPECT_FALSE(parse_decimal(""));
  EXPECT_FALSE(parse_decimal("nan"));
}

TEST(ScenarioFormat, RoundTripsRandomScenarios)
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Scenario s = random_scenario(rng, 1 + rng() % 6, rng() % 5, "rand_" + std::to_string(i));
    EXPECT_EQ(parse_scenario(write_scenario(s)), s) << i;
  }
}

TEST(ScenarioFormat, EmptyMapRoundTrips)
{
  const Scenario s = test::quantized(
    test::single_agent_scenario(test::straight_track("f", ObjectType::Bus, 1.5, -2, 0.4, 7)));
  const std::string line = write_scenario(s);
  EXPECT_EQ(line.back(), '|');
  EXPECT_EQ(parse_scenario(line), s);
}

TEST(ScenarioFormat, WritesAreByteIdentical)
{
  std::mt19937_64 rng(8);
  const Scenario s = random_scenario(rng, 4, 3, "twice");
  EXPECT_EQ(write_scenario(s), write_scenario(s));
}

TEST(ScenarioFormat, TenAgentsTwentyLanesRoundTrip)
{
  std::mt19937_64 rng(9);
  const Scenario s = random_scenario(rng, 10, 20, "big");
  const Scenario back = parse_scenario(write_scenario(s));
  ASSERT_EQ(back.tracks.size(), 10u);
  ASSERT_EQ(back.map.lanes.size(), 20u);
  for (std::size_t a = 0; a < 10; ++a) {
    EXPECT_EQ(back.tracks[a].agent_id, s.tracks[a].agent_id);
    EXPECT_EQ(back.tracks[a].object_type, s.tracks[a].object_type);
    ASSERT_EQ(back.tracks[a].states.size(), 75u);
    for (std::size_t k = 0; k < 75; ++k) EXPECT_EQ(back.tracks[a].states[k], s.tracks[a].states[k]);
  }
  for (std::size_t l = 0; l < 20; ++l) {
    EXPECT_EQ(back.map.lanes[l].id, s.map.lanes[l].id);
    EXPECT_EQ(back.map.lanes[l].points, s.map.lanes[l].points);
  }
  EXPECT_EQ(back, s);
}

TEST(ScenarioFormat, FileRoundTripSkipsBlankLines)
{
  std::mt19937_64 rng(10);
  std::vector<Scenario> v;
  for (int i = 0; i < 3; ++i) v.push_back(random_scenario(rng, 2, 1, "f" + std::to_string(i)));
  std::istringstream in(write_scenario(v[0]) + "\n\n" + write_scenario(v[1]) + "\r\n" + write_scenario(v[2]) + "\n");
  EXPECT_EQ(parse_scenarios(in), v);
}

TEST(ScenarioParse, StateCountMismatchNamesCheck)
{
  std::mt19937_64 rng(11);
  const Scenario s = random_scenario(rng, 2, 1, "short");
  std::string line = write_scenario(s);
  // drop the last state (6 values) of the final track
  const std::size_t lanes_at = line.rfind('|');
  std::string tracks = line.substr(0, lanes_at);
  for (int i = 0; i < 6; ++i) tracks.erase(tracks.rfind(' '));
  line = tracks + line.substr(lanes_at);
  const Error e = capture([&] { parse_scenario(line); });
  EXPECT_EQ(e.code(), ErrorCode::InvariantViolation);
  EXPECT_EQ(e.detail(), "states length");
}

TEST(ScenarioParse, MissingFocalNamesCheck)
{
  std::mt19937_64 rng(12);
  Scenario s = random_scenario(rng, 2, 1, "nofocal");
  std::string line = write_scenario(s);
  line.replace(line.find("|agent_0|"), 9, "|agent_9|");
  const Error e = capture([&] { parse_scenario(line); });
  EXPECT_EQ(e.code(), ErrorCode::InvariantViolation);
  EXPECT_EQ(e.detail(), "focal_agent_id");
}

TEST(ScenarioParse, MalformedRecordsReportPositions)
{
  std::mt19937_64 rng(13);
  const std::string good = write_scenario(random_scenario(rng, 2, 1, "p"));
  const auto fields = [&] {
    std::vector<std::string> f;
    std::stringstream ss(good);
    for (std::string t; std::getline(ss, t, '|');) f.push_back(t);
    return f;
  }();
  ASSERT_EQ(fields.size(), 5u);
  auto join = [](const std::vector<std::string> & f) {
    std::string out;
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "|" : "") + f[i];
    return out;
  };
  ParseError e = capture_parse([&] { parse_scenario("a|b|15,60", 4); });
  EXPECT_EQ(e.line(), 4u);

  auto f = fields;
  f[2] = "15;60";
  e = capture_parse([&] { parse_scenario(join(f), 2); });
  EXPECT_EQ(e.field(), 3u);
  EXPECT_EQ(e.line(), 2u);

  f = fields;
  f[3].replace(f[3].find(','), 1, ",spaceship,");
  e = capture_parse([&] { parse_scenario(join(f)); });
  EXPECT_EQ(e.field(), 4u);

  f = fields;
  f[3] += " 1.0";
  e = capture_parse([&] { parse_scenario(join(f)); });
  EXPECT_EQ(e.field(), 4u);

  f = fields;
  f[4] += " abc";
  e = capture_parse([&] { parse_scenario(join(f)); });
  EXPECT_EQ(e.field(), 5u);

  f = fields;
  f[4] += " 1.0";
  e = capture_parse([&] { parse_scenario(join(f)); });
  EXPECT_EQ(e.field(), 5u);

  std::istringstream in(good + "\n" + good.substr(0, 20) + "\n");
  e = capture_parse([&] { parse_scenarios(in); });
  EXPECT_EQ(e.line(), 2u);
}

TEST(Synthetic, SameSeedIsByteIdentical)
{
  SynthConfig c;
  c.n_scenarios = 50;
  c.seed = 42;
  EXPECT_EQ(write_scenarios(generate_synthetic(c)), write_scenarios(generate_synthetic(c)));
  SynthConfig d = c;
  d.seed = 43;
  EXPECT_NE(write_scenarios(generate_synthetic(c)), write_scenarios(generate_synthetic(d)));
}

TEST(Synthetic, ThousandScenariosPassValidationAndRoundTrip)
{
  SynthConfig c;
  c.n_scenarios = 1000;
  c.seed = 3;
  const std::vector<Scenario> v = generate_synthetic(c);
  ASSERT_EQ(v.size(), 1000u);
  std::array<std::size_t, kNumObjectTypes> types{};
  for (const Scenario & s : v) {
    EXPECT_NO_THROW(validate_scenario(s));
    EXPECT_EQ(parse_scenario(write_scenario(s)), s);
    const AgentTrack & f = focal_track(s);
    for (std::size_t k = 0; k < s.horizon.history; ++k) EXPECT_TRUE(f.states[k].valid);
    for (const AgentTrack & t : s.tracks) ++types[static_cast<std::size_t>(t.object_type)];
  }
  for (std::size_t n : types) EXPECT_GT(n, 0u);
}

TEST(Synthetic, NoiselessStraightMotionIsExactlyLinear)
{
  SynthConfig c;
  c.n_scenarios = 20;
  c.seed = 5;
  c.position_noise = 0;
  c.velocity_noise = 0;
  c.heading_noise = 0;
  c.max_accel = 0;
  c.static_prob = 0;
  c.junction_prob = 0;
  for (const Scenario & s : generate_synthetic(c)) {
    const GroundTruth gt = focal_ground_truth(s);
    const double ade = min_ade(constant_velocity_prediction(s), gt).value;
    // world coordinates are stored as float32 (|v| < 1024 m, half-ulp 6.1e-5 m)
    EXPECT_LT(ade, 2e-4) << s.scenario_id;
  }
}

TEST(SynthConfig, ValidationNamesField)
{
  SynthConfig c;
  c.type_weights = {0, 0, 0, 0, 0};
  Error e = capture([&] { c.validate(); });
  EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  c = SynthConfig{};
  c.type_weights[2] = -1;
  e = capture([&] { c.validate(); });
  EXPECT_EQ(e.detail().rfind("weight_", 0), 0u) << e.detail();
  KeyValueConfig kv;
  kv.set("n_scenarios", "3");
  kv.set("seed", "9");
  EXPECT_EQ(SynthConfig::from_config(kv).n_scenarios, 3u);
  kv.set("bogus", "1");
  EXPECT_THROW(SynthConfig::from_config(kv), Error);
}

}  // namespace
