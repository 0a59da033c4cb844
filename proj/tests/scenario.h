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

// Desk-scale localization suites: a 40 m synthetic office map, seeded random
// paths with unmapped obstacles, and optional kidnapping.

#ifndef SAMLOC_TESTS_SCENARIO_H_
#define SAMLOC_TESTS_SCENARIO_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "samloc/filters.h"
#include "samloc/harness.h"
#include "samloc/samplers.h"

namespace samloc::testing {

struct SuiteParams {
  std::uint64_t map_seed = 7;
  int beams = 32;
  int bins_theta = 16;
  double temperature = 0.1;
  int records = 60;
  int kidnap_at = 30;  // used by the kidnapping suite only
  int obstacles = 20;
  double range_noise = 0.02;
  MotionNoise odom_noise{0.01, 0.01, 0.005};
};

// Map, pose grid and the cached grid matcher shared by every run.
class Suite {
 public:
  explicit Suite(const SuiteParams& params);

  const SuiteParams& params() const { return params_; }
  const OccupancyGrid& grid() const { return grid_; }
  const PoseGridSpec& spec() const { return spec_; }
  const ScanConfig& scan() const { return scan_; }
  const GridMatcher& matcher() const { return *matcher_; }

  // Deterministic episode for run `seed`.
  std::vector<EpisodeRecord> Episode(std::uint64_t seed, bool kidnap) const;

  EpisodeTrace Run(const std::vector<EpisodeRecord>& log,
                   const FilterConfig& filter) const;

 private:
  SuiteParams params_;
  OccupancyGrid grid_;
  PoseGridSpec spec_;
  ScanConfig scan_;
  std::unique_ptr<GridMatcher> matcher_;
};

FilterConfig SuiteFilter(FilterAlgorithm algorithm, std::uint64_t seed,
                         double t_cut = 0.6);

}  // namespace samloc::testing

#endif  // SAMLOC_TESTS_SCENARIO_H_
