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

#include "tjf/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace
{
using namespace tjf;
namespace fs = std::filesystem;

std::string slurp(const fs::path & p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path & p, const std::string & text) { write_text_file(p.string(), text); }

std::vector<std::string> lines_of(const std::string & text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

constexpr const char * kSynth = "n_scenarios = 6\nseed = 4\nmin_agents = 3\nmax_agents = 5\n";
constexpr const char * kModel =
  "d_model = 16\nn_heads = 2\nn_encoder_layers = 1\nn_anchors = 8\nk_modes = 6\nmax_neighbors = 4\n";
constexpr const char * kTrain = "epochs = 3\nbatch_size = 4\nseed = 2\n";

/// Shared files: generated data, a trained checkpoint and its predictions.
class CliTest : public ::testing::Test
{
protected:
  static inline fs::path dir;

  static void SetUpTestSuite()
  {
    dir = fs::temp_directory_path() / ("tjf_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    spit(dir / "synth.cfg", kSynth);
    spit(dir / "model.cfg", kModel);
    spit(dir / "train.cfg", kTrain);
    std::ostringstream out, err;
    ASSERT_EQ(cli::run_generate({p("synth.cfg"), p("data.txt")}, out, err), 0) << err.str();
    ASSERT_EQ(cli::run_train({p("data.txt"), p("model.cfg"), p("train.cfg"), p("m.ckpt"), ""}, out, err), 0)
      << err.str();
    ASSERT_EQ(cli::run_predict({p("data.txt"), p("m.ckpt"), p("pred.txt")}, out, err), 0) << err.str();
  }
  static void TearDownTestSuite() { fs::remove_all(dir); }

  static std::string p(const std::string & name) { return (dir / name).string(); }
};

TEST_F(CliTest, GenerateWritesConfiguredCountDeterministically)
{
  std::ostringstream out, err;
  EXPECT_EQ(lines_of(slurp(p("data.txt"))).size(), 6u);
  ASSERT_EQ(cli::run_generate({p("synth.cfg"), p("data2.txt")}, out, err), 0);
  EXPECT_EQ(out.str(), "wrote 6 scenarios to " + p("data2.txt") + "\n");
  EXPECT_EQ(slurp(p("data.txt")), slurp(p("data2.txt")));
}

TEST_F(CliTest, GenerateRejectsBadConfigNamingField)
{
  spit(dir / "bad.cfg", "n_scenarios = 3\nstatic_prob = 1.5\n");
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_generate({p("bad.cfg"), p("x.txt")}, out, err), cli::kExitUsage);
  EXPECT_NE(err.str().find("static_prob"), std::string::npos) << err.str();
  spit(dir / "bad2.cfg", "n_scenarios = three\n");
  std::ostringstream err2;
  EXPECT_EQ(cli::run_generate({p("bad2.cfg"), p("x.txt")}, out, err2), cli::kExitUsage);
  EXPECT_NE(err2.str().find("n_scenarios"), std::string::npos) << err2.str();
  std::ostringstream err3;
  EXPECT_EQ(cli::run_generate({p("missing.cfg"), p("x.txt")}, out, err3), cli::kExitUsage);
}

TEST_F(CliTest, TrainLogsOneLinePerEpochAndIsDeterministic)
{
  const auto log = lines_of(slurp(p("m.ckpt.log")));
  ASSERT_EQ(log.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(log[i].substr(0, log[i].find('\t')), std::to_string(i + 1));
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_train({p("data.txt"), p("model.cfg"), p("train.cfg"), p("m2.ckpt"), p("m2.log")}, out, err), 0);
  EXPECT_EQ(slurp(p("m.ckpt")), slurp(p("m2.ckpt")));
  EXPECT_EQ(slurp(p("m2.log")), slurp(p("m.ckpt.log")));
  EXPECT_EQ(lines_of(out.str()), log);
}

TEST_F(CliTest, TrainMissingDataIsRuntimeError)
{
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_train({p("nope.txt"), p("model.cfg"), p("train.cfg"), p("z.ckpt"), ""}, out, err),
            cli::kExitRuntime);
}

TEST_F(CliTest, PredictShapeAndDeterminism)
{
  const auto recs = read_prediction_file(p("pred.txt"));
  ASSERT_EQ(recs.size(), 6u);
  for (const auto & r : recs) {
    EXPECT_EQ(r.prediction.modes, 6u);
    EXPECT_EQ(r.prediction.probabilities.size(), 6u);
    EXPECT_EQ(r.prediction.xy.size(), 720u);
  }
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_predict({p("data.txt"), p("m.ckpt"), p("pred2.txt")}, out, err), 0);
  EXPECT_EQ(slurp(p("pred.txt")), slurp(p("pred2.txt")));
}

TEST_F(CliTest, PredictEndpointsFollowInverseReferenceTransform)
{
  const auto data = read_scenario_file(p("data.txt"));
  const auto preds = index_predictions(read_prediction_file(p("pred.txt")));
  LoadedModel m = load_checkpoint(p("m.ckpt"));
  const Forecaster net(m.config, m.store);
  for (const Scenario & s : data) {
    const ForecastOutput o = net.predict(build_focal_bundle(s, m.config));
    const AgentState & ref = focal_track(s).states[s.horizon.history - 1];
    const double c = std::cos(ref.pose.heading), sn = std::sin(ref.pose.heading);
    const MultiModalPrediction & w = preds.at(s.scenario_id);
    for (std::size_t k = 0; k < 6; ++k) {
      const std::size_t t = 59;
      const double ax = o.trajectories.data[(k * 60 + t) * 2], ay = o.trajectories.data[(k * 60 + t) * 2 + 1];
      // float32 file storage at |v| < 1024 m: half-ulp 6.1e-5 m
      EXPECT_NEAR(w.x(k, t), ref.pose.x + c * ax - sn * ay, 1e-4);
      EXPECT_NEAR(w.y(k, t), ref.pose.y + sn * ax + c * ay, 1e-4);
      EXPECT_FLOAT_EQ(static_cast<float>(w.probabilities[k]), o.probabilities[k]);
    }
  }
}

std::string ground_truth_predictions(const std::vector<Scenario> & data)
{
  std::vector<PredictionRecord> recs;
  for (const Scenario & s : data) {
    const GroundTruth gt = focal_ground_truth(s);
    MultiModalPrediction p;
    p.modes = 1;
    p.steps = gt.steps();
    p.xy = gt.xy;
    p.probabilities = {1.0};
    recs.push_back({s.scenario_id, p});
  }
  return write_predictions(recs);
}

TEST_F(CliTest, EvaluateGroundTruthPredictionsScoreZero)
{
  spit(dir / "gt.txt", ground_truth_predictions(read_scenario_file(p("data.txt"))));
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_evaluate({p("data.txt"), {p("gt.txt")}, p("gt.report"), 0, 0}, out, err), 0) << err.str();
  const std::string rep = slurp(p("gt.report"));
  EXPECT_EQ(out.str(), rep);
  for (const auto & line : lines_of(rep)) {
    if (line.find(".min_ade=") != std::string::npos || line.find(".min_fde=") != std::string::npos ||
        line.find(".miss_rate=") != std::string::npos || line.find(".brier_min") != std::string::npos) {
      EXPECT_EQ(line.substr(line.find('=') + 1), "0.000000") << line;
    }
  }
}

TEST_F(CliTest, EvaluateSingleFileMatchesDirectEvaluation)
{
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_evaluate({p("data.txt"), {p("pred.txt")}, p("r1.report"), 0, 0}, out, err), 0) << err.str();
  const auto preds = index_predictions(read_prediction_file(p("pred.txt")));
  const EvalReport direct = evaluate(read_scenario_file(p("data.txt")), [&](const Scenario & s) {
    return preds.at(s.scenario_id);
  });
  EXPECT_EQ(slurp(p("r1.report")), format_report(direct));
}

TEST_F(CliTest, EvaluateTwoIdenticalFilesEqualsSingleFile)
{
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_evaluate({p("data.txt"), {p("pred.txt")}, p("s.report"), 0, 0}, out, err), 0);
  ASSERT_EQ(cli::run_evaluate({p("data.txt"), {p("pred.txt"), p("pred.txt")}, p("d.report"), 0, 0}, out, err), 0)
    << err.str();
  EXPECT_EQ(slurp(p("s.report")), slurp(p("d.report")));
  ASSERT_EQ(cli::run_evaluate({p("data.txt"), {p("pred.txt"), p("pred.txt")}, p("d2.report"), 0, 0}, out, err), 0);
  EXPECT_EQ(slurp(p("d.report")), slurp(p("d2.report")));
}

TEST_F(CliTest, EnsembleWritesNormalizedPredictions)
{
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_ensemble({{p("pred.txt"), p("pred.txt")}, p("ens.txt"), 3, 1}, out, err), 0) << err.str();
  const auto recs = read_prediction_file(p("ens.txt"));
  ASSERT_EQ(recs.size(), 6u);
  for (const auto & r : recs) {
    EXPECT_EQ(r.prediction.modes, 3u);
    double s = 0;
    for (double v : r.prediction.probabilities) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  spit(dir / "partial.txt", lines_of(slurp(p("pred.txt"))).front() + "\n");
  std::ostringstream err2;
  EXPECT_EQ(cli::run_ensemble({{p("pred.txt"), p("partial.txt")}, p("e2.txt"), 0, 0}, out, err2), cli::kExitRuntime);
  EXPECT_NE(err2.str().find("no prediction for"), std::string::npos) << err2.str();
}

// ---------------------------------------------------------------- render

struct SvgElement
{
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<std::string> groups;  //!< enclosing id / class chain
};

/// Minimal tag parser; fails the test on unbalanced or malformed markup.
std::vector<SvgElement> parse_svg(const std::string & svg)
{
  std::vector<SvgElement> out;
  std::vector<std::string> stack, groups;
  std::size_t pos = 0;
  const std::regex attr_re(R"(([a-zA-Z:-]+)=\"([^\"]*)\")");
  EXPECT_EQ(svg.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>", 0), 0u);
  while ((pos = svg.find('<', pos)) != std::string::npos) {
    const std::size_t end = svg.find('>', pos);
    if (end == std::string::npos) {
      ADD_FAILURE() << "unterminated tag";
      break;
    }
    const std::string tag = svg.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag[0] == '?') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) {
        ADD_FAILURE() << "mismatched </" << name << ">";
        return out;
      }
      stack.pop_back();
      if (name == "g") groups.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string body = self_closing ? tag.substr(0, tag.size() - 1) : tag;
    SvgElement e;
    e.name = body.substr(0, body.find_first_of(" \n"));
    for (auto it = std::sregex_iterator(body.begin(), body.end(), attr_re); it != std::sregex_iterator(); ++it) {
      EXPECT_TRUE(e.attrs.emplace((*it)[1], (*it)[2]).second) << "duplicate attribute";
    }
    e.groups = groups;
    if (!self_closing) {
      stack.push_back(e.name);
      if (e.name == "g") groups.push_back(e.attrs.count("id") ? e.attrs["id"] : e.attrs["class"]);
    }
    out.push_back(std::move(e));
  }
  EXPECT_TRUE(stack.empty()) << "unclosed elements";
  return out;
}

std::size_t count_class(const std::vector<SvgElement> & v, const std::string & cls)
{
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const SvgElement & e) {
    auto it = e.attrs.find("class");
    return it != e.attrs.end() && it->second == cls;
  }));
}

TEST_F(CliTest, RenderWithoutPredictionsDrawsLanesAndHistoryOnly)
{
  const auto data = read_scenario_file(p("data.txt"));
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_render({p("data.txt"), "", data[0].scenario_id, p("a.svg")}, out, err), 0) << err.str();
  const auto el = parse_svg(slurp(p("a.svg")));
  EXPECT_EQ(count_class(el, "lane"), data[0].map.lanes.size());
  EXPECT_EQ(count_class(el, "history"), 15u);
  EXPECT_EQ(count_class(el, "prediction"), 0u);
  EXPECT_EQ(count_class(el, "prediction-end"), 0u);
  EXPECT_EQ(count_class(el, "ground-truth"), 0u);
  EXPECT_EQ(count_class(el, "ground-truth-end"), 0u);
}

TEST_F(CliTest, RenderElementCountsAndColors)
{
  const auto data = read_scenario_file(p("data.txt"));
  const Scenario & s = data[1];
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_render({p("data.txt"), p("pred.txt"), s.scenario_id, p("b.svg")}, out, err), 0) << err.str();
  const auto el = parse_svg(slurp(p("b.svg")));
  std::size_t mode_groups = 0;
  for (const auto & e : el) mode_groups += e.name == "g" && e.attrs.count("class") && e.attrs.at("class") == "mode";
  EXPECT_EQ(mode_groups, 6u);
  EXPECT_EQ(count_class(el, "prediction"), 6u * 59u);
  EXPECT_EQ(count_class(el, "prediction-end"), 6u);
  EXPECT_EQ(count_class(el, "ground-truth"), 1u);
  EXPECT_EQ(count_class(el, "ground-truth-end"), 1u);
  std::size_t other = 0;
  for (const auto & t : s.tracks) {
    if (t.agent_id == s.focal_agent_id) continue;
    for (std::size_t i = 0; i < 15; ++i) other += t.states[i].valid;
  }
  EXPECT_EQ(count_class(el, "agent"), other);

  const std::map<std::string, std::string> expected{
    {"lane", "black"},          {"agent", "blue"},          {"history", "cyan"},
    {"prediction", "yellow"},   {"ground-truth", "red"},    {"prediction-end", "magenta"},
    {"ground-truth-end", "green"}};
  const std::set<std::string> palette{"black", "blue", "cyan", "yellow", "red", "magenta", "green"};
  for (const auto & e : el) {
    for (const char * key : {"fill", "stroke"}) {
      auto it = e.attrs.find(key);
      if (it != e.attrs.end() && it->second != "none") {
        EXPECT_TRUE(palette.count(it->second)) << it->second;
      }
    }
    auto cls = e.attrs.find("class");
    if (cls == e.attrs.end() || !expected.count(cls->second)) continue;
    const std::string color = e.name == "polyline" ? e.attrs.at("stroke") : e.attrs.at("fill");
    EXPECT_EQ(color, expected.at(cls->second)) << cls->second;
  }
}

TEST_F(CliTest, RenderCoordinatesFollowAffineViewportMap)
{
  const auto data = read_scenario_file(p("data.txt"));
  const Scenario & s = data[2];
  const MultiModalPrediction pred = index_predictions(read_prediction_file(p("pred.txt"))).at(s.scenario_id);
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_render({p("data.txt"), p("pred.txt"), s.scenario_id, p("c.svg")}, out, err), 0);
  const auto el = parse_svg(slurp(p("c.svg")));

  // extent of everything drawn, then 10 m margin and 8 px/m with y flipped
  double min_x = 1e300, max_y = -1e300;
  auto add = [&](double x, double y) {
    min_x = std::min(min_x, x);
    max_y = std::max(max_y, y);
  };
  for (const Lane & l : s.map.lanes) for (const Point2 & q : l.points) add(q.x, q.y);
  for (const AgentTrack & t : s.tracks) {
    const std::size_t n = t.agent_id == s.focal_agent_id ? t.states.size() : 15;
    for (std::size_t i = 0; i < n; ++i) if (t.states[i].valid) add(t.states[i].pose.x, t.states[i].pose.y);
  }
  for (std::size_t i = 0; i < pred.xy.size(); i += 2) add(pred.xy[i], pred.xy[i + 1]);
  auto px = [&](double x, double y) { return std::pair{(x - (min_x - 10)) * 8, (max_y + 10 - y) * 8}; };

  std::vector<std::pair<double, double>> history, ends;
  for (const auto & e : el) {
    if (e.name != "circle") continue;
    const std::pair<double, double> c{std::stod(e.attrs.at("cx")), std::stod(e.attrs.at("cy"))};
    if (e.attrs.at("class") == "history") history.push_back(c);
    if (e.attrs.at("class") == "prediction-end") ends.push_back(c);
  }
  const AgentTrack & f = focal_track(s);
  ASSERT_EQ(history.size(), 15u);
  ASSERT_EQ(ends.size(), 6u);
  for (std::size_t i : {0u, 7u, 14u}) {
    const auto want = px(f.states[i].pose.x, f.states[i].pose.y);
    EXPECT_NEAR(history[i].first, want.first, 1e-3);
    EXPECT_NEAR(history[i].second, want.second, 1e-3);
  }
  for (std::size_t k : {0u, 5u}) {
    const auto want = px(pred.x(k, 59), pred.y(k, 59));
    EXPECT_NEAR(ends[k].first, want.first, 1e-3);
    EXPECT_NEAR(ends[k].second, want.second, 1e-3);
  }
}

TEST_F(CliTest, RenderUnknownScenarioIsRuntimeError)
{
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_render({p("data.txt"), "", "no_such_id", p("d.svg")}, out, err), cli::kExitRuntime);
  EXPECT_NE(err.str().find("no_such_id"), std::string::npos);
}

int run_binary(const std::string & args)
{
  const int status = std::system((std::string(TJF_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes)
{
  EXPECT_EQ(run_binary("generate --config " + p("synth.cfg") + " --out " + p("bin.txt")), 0);
  EXPECT_EQ(slurp(p("bin.txt")), slurp(p("data.txt")));
  EXPECT_EQ(run_binary("generate --config " + p("synth.cfg") + " --out " + p("bin.txt") + " --frobnicate 1"), 1);
  EXPECT_EQ(run_binary("generate --out " + p("bin.txt")), 1);
  EXPECT_EQ(run_binary("teleport"), 1);
  EXPECT_EQ(run_binary(""), 1);
  EXPECT_EQ(run_binary("generate --config " + p("bad.cfg") + " --out " + p("bin2.txt")), 1);
  EXPECT_EQ(run_binary("render --data " + p("data.txt") + " --scenario nope --out " + p("e.svg")), 2);
  EXPECT_EQ(run_binary("predict --data " + p("data.txt") + " --ckpt " + p("missing.ckpt") + " --out " + p("q.txt")), 2);
}

}  // namespace
