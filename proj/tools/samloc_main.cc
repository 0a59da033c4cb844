// Copyright 2026 The samloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// samloc command-line tool. Links only the C API.
//
//   samloc localize --map m.pgm --meta m.txt --log ep.jsonl --filter adam \
//       --model oracle --repeat 10 --out results/
//   samloc genmap --map m.pgm --meta m.txt --seed 3
//   samloc genlog --map m.pgm --meta m.txt --log ep.jsonl --kidnap-at 40
//   samloc pmexport-oracle --map m.pgm --meta m.txt --log ep.jsonl --out pms/

#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "samloc/samloc.h"

namespace {

constexpr int kConfigExit = 2;

struct ConfigDeleter {
  void operator()(samloc_config* c) const { samloc_config_destroy(c); }
};

// Flag values collected as strings and forwarded as config keys, so that
// validation lives in one place.
struct Overrides {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> sets;  // --set key=value
};

void AddKey(CLI::App* app, Overrides* o, const std::string& flag,
            const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [o, key](const std::string& v) { o->values.emplace_back(key, v); },
      help);
}

void AddCommon(CLI::App* app, Overrides* o) {
  app->add_option("--config", o->config_file, "key = value config file");
  app->add_option("--set", o->sets, "extra config override, key=value")
      ->take_all();
  AddKey(app, o, "--map", "map", "occupancy map (PGM)");
  AddKey(app, o, "--meta", "meta", "map metadata (resolution, origin)");
  AddKey(app, o, "--seed", "seed", "rng seed");
}

int Report(samloc_status status) {
  if (status != SAMLOC_OK && *samloc_last_error() != '\0') {
    std::fprintf(stderr, "samloc: %s: %s\n", samloc_status_name(status),
                 samloc_last_error());
  }
  return samloc_exit_code(status);
}

samloc_status Apply(samloc_config* config, const Overrides& o) {
  if (!o.config_file.empty()) {
    const samloc_status s = samloc_config_load(config, o.config_file.c_str());
    if (s != SAMLOC_OK) return s;
  }
  for (const auto& [key, value] : o.values) {
    const samloc_status s = samloc_config_set(config, key.c_str(), value.c_str());
    if (s != SAMLOC_OK) return s;
  }
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "samloc: --set expects key=value, got `%s`\n", kv.c_str());
      return SAMLOC_ERR_CONFIG;
    }
    const samloc_status s = samloc_config_set(
        config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != SAMLOC_OK) return s;
  }
  return samloc_config_validate(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"samloc: global localization with samplable observation models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", samloc_version());

  Overrides localize_o, genmap_o, genlog_o, export_o;

  CLI::App* localize = app.add_subcommand("localize", "run repeated localization episodes");
  AddCommon(localize, &localize_o);
  AddKey(localize, &localize_o, "--log", "log", "episode log (JSONL)");
  AddKey(localize, &localize_o, "--filter", "filter", "mcl | dual | mixture | adam");
  AddKey(localize, &localize_o, "--particles", "particles", "particle count");
  AddKey(localize, &localize_o, "--tcut", "tcut", "trust threshold");
  AddKey(localize, &localize_o, "--mixture-p", "mixture_p", "mixture MCL probability");
  AddKey(localize, &localize_o, "--random-rate", "random_rate", "MCL random injection rate");
  AddKey(localize, &localize_o, "--model", "model", "oracle | pmdir:<path> | dualfeat");
  AddKey(localize, &localize_o, "--repeat", "repeat", "repetitions");
  AddKey(localize, &localize_o, "--workers", "workers", "parallel repetitions");
  AddKey(localize, &localize_o, "--out", "out", "output directory");

  CLI::App* genmap = app.add_subcommand("genmap", "generate an indoor map");
  AddCommon(genmap, &genmap_o);

  CLI::App* genlog = app.add_subcommand("genlog", "generate a synthetic episode log");
  AddCommon(genlog, &genlog_o);
  AddKey(genlog, &genlog_o, "--log", "log", "output episode log (JSONL)");
  AddKey(genlog, &genlog_o, "--waypoints", "waypoints", "random waypoints per path");
  AddKey(genlog, &genlog_o, "--step", "step_size", "meters between records");
  AddKey(genlog, &genlog_o, "--kidnap-at", "kidnap_at", "record index of the teleport");
  AddKey(genlog, &genlog_o, "--obstacles", "obstacles", "unmapped obstacles to add");

  CLI::App* pmexport = app.add_subcommand("pmexport-oracle",
                                          "write grid-matcher PMs for a log");
  AddCommon(pmexport, &export_o);
  AddKey(pmexport, &export_o, "--log", "log", "episode log (JSONL)");
  AddKey(pmexport, &export_o, "--out", "out", "output PM directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  samloc_config* raw = nullptr;
  samloc_status status = samloc_config_create(&raw);
  if (status != SAMLOC_OK) return Report(status);
  std::unique_ptr<samloc_config, ConfigDeleter> config(raw);

  if (localize->parsed()) {
    status = Apply(config.get(), localize_o);
    if (status != SAMLOC_OK) return Report(status);
    samloc_run_summary summary{};
    status = samloc_localize(config.get(), &summary);
    if (status == SAMLOC_OK) {
      std::printf("runs=%d converged=%d rate=%.3f steps[0-20]=%d [21-40]=%d "
                  "[41-60]=%d [>60]=%d\n",
                  summary.runs, summary.converged, summary.convergence_rate,
                  summary.steps_histogram[0], summary.steps_histogram[1],
                  summary.steps_histogram[2], summary.steps_histogram[3]);
    }
  } else if (genmap->parsed()) {
    status = Apply(config.get(), genmap_o);
    if (status == SAMLOC_OK) status = samloc_genmap(config.get());
  } else if (genlog->parsed()) {
    status = Apply(config.get(), genlog_o);
    if (status == SAMLOC_OK) status = samloc_genlog(config.get());
  } else if (pmexport->parsed()) {
    status = Apply(config.get(), export_o);
    if (status == SAMLOC_OK) status = samloc_pmexport_oracle(config.get());
  }
  return Report(status);
}
