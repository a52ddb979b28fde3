/*
 * Copyright 2026 The isac-t2u Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Talks to the simulator only through isac.h.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isac/isac.h"

namespace {

constexpr int kUsageExit = 64;

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 1;
  bool dump_images = false;
  std::string detections;
  std::vector<std::string> sets;
};

int report(isac_status st) {
  std::fprintf(stderr, "error [%s]: %s\n", isac_status_string(st), isac_last_error());
  return static_cast<int>(st);
}

int run(const std::string& name, const Args& a) {
  isac_command cmd;
  isac_status st = isac_command_from_name(name.c_str(), &cmd);
  if (st != ISAC_OK) return report(st);
  isac_experiment* exp = nullptr;
  st = a.config.empty() ? isac_experiment_create(&exp)
                        : isac_experiment_from_file(a.config.c_str(), &exp);
  if (st != ISAC_OK) return report(st);
  for (const auto& kv : a.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      isac_experiment_destroy(exp);
      std::fprintf(stderr, "error [InvalidArgument]: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return ISAC_ERR_INVALID_ARGUMENT;
    }
    st = isac_experiment_set_option(exp, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != ISAC_OK) {
      isac_experiment_destroy(exp);
      return report(st);
    }
  }
  if (a.seed) isac_experiment_set_seed(exp, *a.seed);
  st = isac_experiment_validate(exp);
  if (st == ISAC_OK) {
    isac_run_options opt{a.out_dir.c_str(), a.threads, a.dump_images ? 1 : 0,
                         a.detections.empty() ? nullptr : a.detections.c_str()};
    st = isac_run(exp, cmd, &opt);
  }
  isac_experiment_destroy(exp);
  return st == ISAC_OK ? 0 : report(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISAC target-to-user association simulator"};
  app.require_subcommand(1);
  Args args;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Full pipeline: labels, detections, beam reports, associations, metrics"},
      {"detect", "Scene, radar imaging and reference detector"},
      {"associate", "Beam training and target-to-user association"},
      {"sweep-snr", "P(correct association) vs SNR per antenna for each array size"},
      {"sweep-clutter", "P(correct association) vs clutter vehicles for each array size"},
      {"sweep-matrix", "P(correct association) over VE count x clutter count"},
      {"eval-metrics", "Detection and beam metrics against ground truth"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { args.seed = s; },
                                            "Master seed (overrides the config)");
    sub->add_option("--out-dir", args.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--dump-images", args.dump_images, "Write per-frame image dumps and PGMs");
    sub->add_option("--set", args.sets, "Override a config key: key=value (repeatable)");
    if (name == "associate" || name == "eval-metrics")
      sub->add_option("--detections", args.detections, "Detections file from an external detector")
          ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }
  return run(app.get_subcommands().front()->get_name(), args);
}
