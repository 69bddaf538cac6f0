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

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char ** argv)
{
  using namespace tjf::cli;
  CLI::App app{"Multi-modal trajectory forecasting toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto * g = app.add_subcommand("generate", "Write a synthetic scenario file");
  g->add_option("--config", gen.config, "SynthConfig key=value file")->required();
  g->add_option("--out", gen.out, "Output scenario file")->required();

  TrainArgs tr;
  auto * t = app.add_subcommand("train", "Train a forecaster and write a checkpoint");
  t->add_option("--data", tr.data, "Training scenario file")->required();
  t->add_option("--model-config", tr.model_config, "ModelConfig key=value file")->required();
  t->add_option("--train-config", tr.train_config, "TrainConfig key=value file")->required();
  t->add_option("--out", tr.out, "Output checkpoint")->required();
  t->add_option("--log", tr.log, "Epoch log file (default <out>.log)");

  PredictArgs pr;
  auto * p = app.add_subcommand("predict", "Write world-frame focal predictions");
  p->add_option("--data", pr.data, "Scenario file")->required();
  p->add_option("--ckpt", pr.ckpt, "Checkpoint")->required();
  p->add_option("--out", pr.out, "Output prediction file")->required();

  EvaluateArgs ev;
  auto * e = app.add_subcommand("evaluate", "Score predictions; several --pred files are ensembled");
  e->add_option("--data", ev.data, "Scenario file")->required();
  e->add_option("--pred", ev.preds, "Prediction file (repeatable)")->required();
  e->add_option("--report", ev.report, "Output report")->required();
  e->add_option("--k", ev.k, "Ensemble output modes (default: K of the first file)");
  e->add_option("--seed", ev.seed, "K-means seed");

  EnsembleArgs en;
  auto * m = app.add_subcommand("ensemble", "Merge several prediction files by endpoint clustering");
  m->add_option("--pred", en.preds, "Prediction file (repeatable)")->required();
  m->add_option("--out", en.out, "Output prediction file")->required();
  m->add_option("--k", en.k, "Output modes (default: K of the first file)");
  m->add_option("--seed", en.seed, "K-means seed");

  RenderArgs re;
  auto * r = app.add_subcommand("render", "Draw one scenario as SVG");
  r->add_option("--data", re.data, "Scenario file")->required();
  r->add_option("--pred", re.pred, "Prediction file");
  r->add_option("--scenario", re.scenario, "Scenario id")->required();
  r->add_option("--out", re.out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp & ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError & ex) {
    app.exit(ex);
    return kExitUsage;
  }

  if (g->parsed()) return run_generate(gen, std::cout, std::cerr);
  if (t->parsed()) return run_train(tr, std::cout, std::cerr);
  if (p->parsed()) return run_predict(pr, std::cout, std::cerr);
  if (e->parsed()) return run_evaluate(ev, std::cout, std::cerr);
  if (m->parsed()) return run_ensemble(en, std::cout, std::cerr);
  return run_render(re, std::cout, std::cerr);
}
