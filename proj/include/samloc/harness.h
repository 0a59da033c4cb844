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

// Episode logs, the episode runner, convergence metrics and synthetic data
// generation.

#ifndef SAMLOC_HARNESS_H_
#define SAMLOC_HARNESS_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "samloc/filters.h"
#include "samloc/models.h"
#include "samloc/samplers.h"
#include "samloc/sensor.h"
#include "samloc/world.h"

namespace samloc {

// One line of an episode log.
struct EpisodeRecord {
  std::int64_t t = 0;
  Motion odom;
  std::vector<double> ranges;
  std::optional<Pose> gt;
  bool kidnap = false;
};

std::vector<EpisodeRecord> ParseEpisodeLog(std::istream& in);
std::vector<EpisodeRecord> ReadEpisodeLog(const std::string& path);
std::string EpisodeRecordToJson(const EpisodeRecord& record);
void WriteEpisodeLog(const std::vector<EpisodeRecord>& records,
                     const std::string& path);

struct StepRecord {
  std::int64_t t = 0;
  std::optional<Pose> gt;
  Pose estimate;
  double e_pos = 0.0;    // meters, 0 without ground truth
  double e_theta = 0.0;  // radians in [0, pi]
  int h_count = 0;
  int l_count = 0;
  bool kidnap = false;
  bool reinitialized = false;
  bool pm_fallback = false;
  double wall_ms = 0.0;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
};

double PositionError(const Pose& estimate, const Pose& truth);
double HeadingError(const Pose& estimate, const Pose& truth);

struct EpisodeSetup {
  const OccupancyGrid* grid = nullptr;
  PoseGridSpec spec;
  ScanConfig scan;
  FilterConfig filter;
  const SamplableObservationModel* model = nullptr;  // unused by plain MCL
};

// Uniform initialization, then one filter update per record. Kidnap records
// move only the ground truth; the filter is not told.
EpisodeTrace RunEpisode(const EpisodeSetup& setup,
                        const std::vector<EpisodeRecord>& log);

// Without timing the file depends only on the inputs and the seed.
std::string StepRecordToJson(const StepRecord& step, bool include_timing);
void WriteTrace(const EpisodeTrace& trace, const std::string& path,
                bool include_timing);

struct ConvergenceRule {
  double max_e_pos = 2.0;
  double max_e_theta = 10.0 * 3.14159265358979323846 / 180.0;
  int window = 5;
};

struct Convergence {
  bool converged = false;
  int steps = 0;  // 1-based index of the last step of the first window
};

// Scans steps[first..] for the first run of `window` consecutive qualifying
// steps; STEPS counts from steps[first] = 1.
Convergence ConvergenceCheck(const EpisodeTrace& trace, std::size_t first = 0,
                             const ConvergenceRule& rule = {});

struct RunSummary {
  std::vector<double> mean_e_pos;  // per step
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<Convergence> runs;
  double convergence_rate = 0.0;
  std::array<int, 4> steps_histogram{};  // 0-20, 21-40, 41-60, >60
  bool truncated = false;  // traces had unequal lengths
};

// Normal-approximation 95% interval: mean +- 1.96 sd / sqrt(n).
RunSummary AggregateRuns(const std::vector<EpisodeTrace>& traces,
                         const ConvergenceRule& rule = {});

void WriteSummaryCsv(const RunSummary& summary, const std::string& path);
void WriteRunsCsv(const RunSummary& summary, const std::string& path);

struct PathSpec {
  std::vector<Point2> waypoints;
  // Followed after the teleport when a kidnap is requested.
  std::vector<Point2> after_kidnap;
  double step = 0.3;
  double range_noise = 0.02;
  MotionNoise odom_noise{0.0, 0.0, 0.0};
  int obstacles = 0;
  SizeRange obstacle_size;
  double obstacle_clearance = 0.6;  // meters kept free around the path
};

// Samples the waypoint polyline every `step` meters (heading along the
// travelled segment), reports robot-frame odometry with optional noise, and
// simulates scans against a copy of `grid` with random obstacles injected.
// With `kidnap_at`, record kidnap_at starts path.after_kidnap with zero
// odometry and `kidnap` set.
std::vector<EpisodeRecord> GenerateSyntheticEpisode(
    const OccupancyGrid& grid, const PathSpec& path, const ScanConfig& scan,
    std::optional<int> kidnap_at, Rng& rng);

// Random collision-free polyline whose vertices and segments keep
// `clearance` meters from obstacles.
std::vector<Point2> RandomPath(const OccupancyGrid& grid, int waypoints,
                               double clearance, double min_segment, Rng& rng);

}  // namespace samloc

#endif  // SAMLOC_HARNESS_H_
