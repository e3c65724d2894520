// tools/rescore_main.cc

// Copyright 2026 The nbest-rescore Authors
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

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rescore/rescore.h"

namespace {

using Json = nlohmann::ordered_json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  bool resume = false;
  bool quiet = false;
};

struct StageFlags {
  // rescore
  std::string scorer, model, input, output;
  std::optional<double> lambda;
  // eval
  std::string bench;
  // bench
  std::vector<std::string> scorers;
  std::optional<std::size_t> iters, warmup;
  bool trained = false;
};

int Die(const std::string &msg, int code) {
  std::fprintf(stderr, "rescore: %s\n", msg.c_str());
  return code;
}

void LogLine(const char *line, void *) { std::fprintf(stderr, "%s\n", line); }

Json LoadConfig(const Globals &g) {
  Json j = Json::object();
  if (!g.config.empty()) {
    std::ifstream in(g.config);
    if (!in) throw std::runtime_error("cannot open config file '" + g.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    j = Json::parse(ss.str());
  }
  if (g.seed) j["seed"] = *g.seed;
  if (!g.out.empty()) j["out"] = g.out;
  if (g.threads) j["threads"] = *g.threads;
  return j;
}

void ApplyStageFlags(const std::string &stage, const StageFlags &f, Json &j) {
  if (stage == "rescore") {
    if (!f.scorer.empty()) j["rescore"]["scorer"] = f.scorer;
    if (!f.model.empty()) j["rescore"]["model"] = f.model;
    if (!f.input.empty()) j["rescore"]["input"] = f.input;
    if (!f.output.empty()) j["rescore"]["output"] = f.output;
    if (f.lambda) j["rescore"]["lambda"] = *f.lambda;
  } else if (stage == "eval") {
    if (!f.bench.empty()) j["eval"]["bench"] = f.bench;
  } else if (stage == "bench") {
    if (!f.scorers.empty()) j["bench"]["scorers"] = f.scorers;
    if (f.iters) j["bench"]["iters"] = *f.iters;
    if (f.warmup) j["bench"]["warmup"] = *f.warmup;
    if (f.trained) j["bench"]["trained_models"] = true;
  }
}

int RunStage(const std::string &stage, const Globals &g, const StageFlags &f) {
  Json j;
  try {
    j = LoadConfig(g);
  } catch (const std::exception &e) {
    return Die(e.what(), RS_ERR_USAGE);
  }
  ApplyStageFlags(stage, f, j);
  const std::string text = j.dump();

  if (stage == "config") {
    char *resolved = nullptr;
    rs_status st = rs_config_resolve(text.c_str(), &resolved);
    if (st != RS_OK) return Die(std::string(rs_status_name(st)) + ": " + rs_last_error(), st);
    std::printf("%s\n", resolved);
    rs_string_free(resolved);
    return 0;
  }

  char *summary = nullptr;
  const auto start = std::chrono::steady_clock::now();
  rs_status st = rs_run_stage(stage.c_str(), text.c_str(), g.resume ? 1 : 0,
                              g.quiet ? nullptr : LogLine, nullptr, &summary);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (st != RS_OK)
    return Die(std::string(rs_status_name(st)) + " error: " + rs_last_error(), st);
  std::printf("%s\n", summary);
  rs_string_free(summary);
  if (!g.quiet) std::fprintf(stderr, "%s finished in %.1f s\n", stage.c_str(), secs);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"N-best rescoring with causal, masked and pooled transformer scorers"};
  app.require_subcommand(1);
  Globals g;
  StageFlags f;

  auto add_globals = [&](CLI::App *sub) {
    sub->add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t &v) { g.seed = v; },
                                            "global seed");
    sub->add_option("--out", g.out, "run directory");
    sub->add_option_function<int>("--threads", [&](const int &v) { g.threads = v; },
                                  "worker threads");
    sub->add_flag("--resume", g.resume, "continue training from last.ckpt");
    sub->add_flag("-q,--quiet", g.quiet, "no progress lines on stderr");
  };

  struct Cmd {
    const char *name;
    const char *help;
  };
  const Cmd cmds[] = {
      {"gen", "generate corpus and simulated first-pass n-best lists"},
      {"adapt", "domain-adapt causal and bidirectional models with CE"},
      {"mwer", "MWER fine-tuning for each configured scorer"},
      {"tune", "tune the interpolation weight on dev for each trained model"},
      {"rescore", "rescore an n-best file"},
      {"eval", "test WER table for all trained models"},
      {"bench", "rescoring latency of one synthetic n-best per scorer"},
      {"pipeline", "gen, adapt, mwer, tune and eval in one run"},
      {"config", "print the fully resolved config"},
  };
  std::string chosen;
  for (const auto &c : cmds) {
    CLI::App *sub = app.add_subcommand(c.name, c.help);
    add_globals(sub);
    const std::string name = c.name;
    if (name == "rescore") {
      sub->add_option("--scorer", f.scorer, "scorer kind");
      sub->add_option("--model", f.model, "checkpoint (default: the run's model for the scorer)");
      sub->add_option("--input", f.input, "n-best file (default: the run's dev set)");
      sub->add_option("--output", f.output, "rescored n-best file");
      sub->add_option_function<double>("--lambda", [&](const double &v) { f.lambda = v; },
                                       "interpolation weight (default: tuned value)");
    } else if (name == "eval") {
      sub->add_option("--bench", f.bench, "bench report.json that fills latency_ms")
          ->check(CLI::ExistingFile);
    } else if (name == "bench") {
      sub->add_option("--scorers", f.scorers, "scorer kinds")->delimiter(',');
      sub->add_option_function<std::size_t>("--iters", [&](const std::size_t &v) { f.iters = v; },
                                            "timed iterations");
      sub->add_option_function<std::size_t>("--warmup", [&](const std::size_t &v) { f.warmup = v; },
                                            "warmup iterations");
      sub->add_flag("--trained", f.trained, "use the run's trained models");
    }
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return RunStage(chosen, g, f);
}
