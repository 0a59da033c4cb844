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

// Experiment configuration (a `key = value` text file, overridable key by
// key) and the batch drivers behind the command-line tool: repeated
// localization runs, map and log generation, and PM export.

#ifndef SAMLOC_EXPERIMENT_H_
#define SAMLOC_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "samloc/filters.h"
#include "samloc/harness.h"
#include "samloc/models.h"
#include "samloc/samplers.h"
#include "samloc/sensor.h"
#include "samloc/world.h"

namespace samloc {

struct ExperimentConfig {
  // Inputs and outputs.
  std::string map;
  std::string meta;
  std::string log;
  std::string out;

  // Filter.
  FilterConfig filter;
  std::string model = "oracle";  // oracle | pmdir:<path> | dualfeat
  std::uint64_t seed = 0;
  int repeat = 1;
  int workers = 1;
  bool record_timing = false;

  // Sensor and pose grid. The beam model's L_max follows scan.max_range.
  ScanConfig scan;
  int bins_x = 0;  // 0: map width / 4
  int bins_y = 0;  // 0: map height / 4
  int bins_theta = 16;
  double temperature = 1.0;  // grid matcher
  int dual_q = 32;           // dual-feature candidates

  // Map generation.
  IndoorMapParams indoor;

  // Log generation.
  int waypoints = 4;
  double step_size = 0.3;
  int kidnap_at = -1;  // < 0: no kidnap
  int obstacles = 0;
  SizeRange obstacle_size;
  double clearance = 0.6;
  double range_noise = 0.02;
  MotionNoise odom_noise{0.0, 0.0, 0.0};

  // Throws Error(kConfig) on an unknown key or unparsable value.
  void Set(const std::string& key, const std::string& value);
  // Throws Error(kConfig) when values are out of their domain.
  void Validate() const;
};

// Lines are `key = value`; `#` starts a comment. Errors carry line numbers.
ExperimentConfig ParseExperimentConfig(std::istream& in, ExperimentConfig base = {});
ExperimentConfig LoadExperimentConfig(const std::string& path,
                                      ExperimentConfig base = {});

PoseGridSpec ExperimentPoseGrid(const ExperimentConfig& config,
                                const OccupancyGrid& grid);

// Builds the observation model named by config.model. Returns null for
// plain MCL, which never consults a model.
std::unique_ptr<SamplableObservationModel> MakeObservationModel(
    const ExperimentConfig& config, const OccupancyGrid& grid,
    const PoseGridSpec& spec);

// Runs config.repeat episodes of config.log (repetition r uses seed + r)
// and writes trace_<r>.jsonl, summary.csv and runs.csv into config.out.
RunSummary RunLocalization(const ExperimentConfig& config);

// Writes an indoor map generated from config.seed to config.map/config.meta.
void GenerateMapFiles(const ExperimentConfig& config);

// Writes a synthetic episode over a random path to config.log.
void GenerateLogFile(const ExperimentConfig& config);

// Writes the grid-matcher PM of every log record to config.out as
// pm_<t>.pmap.
void ExportOraclePms(const ExperimentConfig& config);

}  // namespace samloc

#endif  // SAMLOC_EXPERIMENT_H_
