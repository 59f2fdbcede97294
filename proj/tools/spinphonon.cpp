// Copyright 2026 The spinphonon Authors
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

// spinphonon <experiment> [--config FILE] [--out DIR] [--seed N] [--jobs N]
//            [--plot] [--validate-only]
//
// The output directory is taken from --out, then $SPINPHONON_OUT, then the
// configuration file.

#include <spinphonon/runner.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  using namespace spinphonon;
  CLI::App app{"Spin-phonon interface simulations"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = -1;
  bool plot = false, validate_only = false;

  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (const auto& [kind, name] : experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("-j,--jobs", jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--plot", plot, "also write SVG plots");
    sub->add_flag("--validate-only", validate_only, "check the configuration and print it");
    subs.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  ExperimentKind kind = ExperimentKind::odro;
  CLI::App* chosen = nullptr;
  for (const auto& [sub, k] : subs) {
    if (sub->parsed()) {
      kind = k;
      chosen = sub;
    }
  }

  RunConfig cfg;
  try {
    if (config_path.empty()) {
      cfg = default_config(kind);
    } else {
      cfg = parse_config_file(config_path);
      if (cfg.kind != kind) {
        throw ConfigError("experiment", "file describes '" + to_string(cfg.kind) + "' but the command is '" +
                                            to_string(kind) + "'");
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (chosen->count("--seed")) cfg.seed = seed;
  if (chosen->count("--jobs")) cfg.jobs = jobs;
  if (!out_dir.empty()) {
    cfg.output_dir = out_dir;
  } else if (const char* env = std::getenv("SPINPHONON_OUT"); env && *env) {
    cfg.output_dir = env;
  }

  if (validate_only) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << to_json(cfg).dump(2) << '\n';
    return kExitOk;
  }
  RunOptions opt;
  opt.plot = plot;
  opt.report = &std::cout;
  const int rc = run_and_emit(cfg, opt);
  if (rc == kExitOk) std::cerr << "wrote results to " << cfg.output_dir << '\n';
  return rc;
}
