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

#ifndef TJF__CLI_HPP_
#define TJF__CLI_HPP_

#include "tjf/config.hpp"
#include "tjf/dataio.hpp"
#include "tjf/ensemble.hpp"
#include "tjf/error.hpp"
#include "tjf/evaluation.hpp"
#include "tjf/inference.hpp"
#include "tjf/prediction_io.hpp"
#include "tjf/render.hpp"
#include "tjf/synthetic.hpp"
#include "tjf/trainer.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace tjf::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct GenerateArgs
{
  std::string config;
  std::string out;
};

struct TrainArgs
{
  std::string data;
  std::string model_config;
  std::string train_config;
  std::string out;
  std::string log;  //!< defaults to `<out>.log`
};

struct PredictArgs
{
  std::string data;
  std::string ckpt;
  std::string out;
};

struct EvaluateArgs
{
  std::string data;
  std::vector<std::string> preds;
  std::string report;
  std::size_t k{0};  //!< ensemble output modes; 0 keeps the first file's K
  std::uint64_t seed{0};
};

struct EnsembleArgs
{
  std::vector<std::string> preds;
  std::string out;
  std::size_t k{0};
  std::uint64_t seed{0};
};

struct RenderArgs
{
  std::string data;
  std::string pred;  //!< optional
  std::string scenario;
  std::string out;
};

namespace detail
{
/// Marks failures that stem from the invocation itself (bad config files).
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline KeyValueConfig load_config(const std::string & path)
{
  try {
    return KeyValueConfig::load(path);
  } catch (const Error & e) {
    throw UsageError(path + ": " + e.what());
  }
}

template <class Cfg>
Cfg config_from(const std::string & path)
{
  const KeyValueConfig kv = load_config(path);
  try {
    return Cfg::from_config(kv);
  } catch (const Error & e) {
    throw UsageError(path + ": " + e.what());
  }
}

inline int guarded(std::ostream & err, const std::function<int()> & body)
{
  try {
    return body();
  } catch (const UsageError & e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

/// Per-scenario predictions from several files, merged when more than one is given.
inline std::map<std::string, MultiModalPrediction> merged_predictions(
  const std::vector<std::string> & paths, std::size_t k, std::uint64_t seed)
{
  if (paths.empty()) {
    throw UsageError("at least one --pred is required");
  }
  std::vector<std::map<std::string, MultiModalPrediction>> files;
  for (const auto & p : paths) {
    files.push_back(index_predictions(read_prediction_file(p)));
  }
  if (files.size() == 1) {
    return files.front();
  }
  KMeansOptions opt;
  opt.seed = seed;
  std::map<std::string, MultiModalPrediction> out;
  for (const auto & [id, first] : files.front()) {
    std::vector<MultiModalPrediction> models{first};
    for (std::size_t m = 1; m < files.size(); ++m) {
      const auto it = files[m].find(id);
      if (it == files[m].end()) {
        throw Error(ErrorCode::InvariantViolation, paths[m] + " has no prediction for " + id);
      }
      models.push_back(it->second);
    }
    out.emplace(id, ensemble_merge(models, k == 0 ? first.modes : k, opt));
  }
  return out;
}
}  // namespace detail

inline int run_generate(const GenerateArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    const SynthConfig cfg = detail::config_from<SynthConfig>(a.config);
    const auto scenarios = generate_synthetic(cfg);
    write_scenario_file(a.out, scenarios);
    out << "wrote " << scenarios.size() << " scenarios to " << a.out << '\n';
    return kExitOk;
  });
}

inline int run_train(const TrainArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    const ModelConfig mcfg = detail::config_from<ModelConfig>(a.model_config);
    const TrainConfig tcfg = detail::config_from<TrainConfig>(a.train_config);
    const auto data = read_scenario_file(a.data);
    std::string log;
    const TrainResult r = train(data, mcfg, tcfg, [&](const EpochLog & e) {
      const std::string line = format_epoch_log(e);
      out << line << '\n' << std::flush;
      log += line;
      log += '\n';
    });
    save_checkpoint(r.store, mcfg, a.out);
    write_text_file(a.log.empty() ? a.out + ".log" : a.log, log);
    return kExitOk;
  });
}

inline int run_predict(const PredictArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    LoadedModel m = load_checkpoint(a.ckpt);
    const Forecaster model(m.config, m.store);
    const auto data = read_scenario_file(a.data);
    const auto records = predict_dataset(model, data);
    write_text_file(a.out, write_predictions(records));
    out << "wrote " << records.size() << " predictions to " << a.out << '\n';
    return kExitOk;
  });
}

inline int run_evaluate(const EvaluateArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    const auto data = read_scenario_file(a.data);
    const auto preds = detail::merged_predictions(a.preds, a.k, a.seed);
    const EvalReport report = evaluate(data, [&](const Scenario & s) {
      const auto it = preds.find(s.scenario_id);
      if (it == preds.end()) {
        throw Error(ErrorCode::InvariantViolation, "no prediction for " + s.scenario_id);
      }
      return it->second;
    });
    const std::string text = format_report(report);
    write_text_file(a.report, text);
    out << text;
    return kExitOk;
  });
}

inline int run_ensemble(const EnsembleArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    const auto merged = detail::merged_predictions(a.preds, a.k, a.seed);
    std::vector<PredictionRecord> records;
    for (const auto & [id, p] : merged) {
      records.push_back({id, p});
    }
    write_text_file(a.out, write_predictions(records));
    out << "wrote " << records.size() << " merged predictions to " << a.out << '\n';
    return kExitOk;
  });
}

inline int run_render(const RenderArgs & a, std::ostream & out, std::ostream & err)
{
  return detail::guarded(err, [&] {
    const auto data = read_scenario_file(a.data);
    const Scenario * scene = nullptr;
    for (const auto & s : data) {
      if (s.scenario_id == a.scenario) scene = &s;
    }
    if (!scene) {
      throw Error(ErrorCode::InvariantViolation, "unknown scenario " + a.scenario);
    }
    MultiModalPrediction pred;
    bool have_pred = false;
    if (!a.pred.empty()) {
      const auto preds = index_predictions(read_prediction_file(a.pred));
      const auto it = preds.find(a.scenario);
      if (it != preds.end()) {
        pred = it->second;
        have_pred = true;
      }
    }
    write_text_file(a.out, render_svg(*scene, have_pred ? &pred : nullptr));
    out << "wrote " << a.out << '\n';
    return kExitOk;
  });
}

}  // namespace tjf::cli

#endif  // TJF__CLI_HPP_
