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

#include "samloc/samplers.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <queue>
#include <regex>
#include <sstream>

#include "samloc/error.h"

namespace samloc {

namespace {

std::vector<std::size_t> FreeBinsAllHeadings(const OccupancyGrid& grid,
                                             const PoseGridSpec& spec) {
  std::vector<std::size_t> bins;
  for (const PoseIndex& pos : FreePositionBins(grid, spec)) {
    for (int k = 0; k < spec.k; ++k) bins.push_back(spec.Flatten({pos.i, pos.j, k}));
  }
  return bins;
}

std::vector<float> BuildPredictionTable(const OccupancyGrid& grid,
                                        const PoseGridSpec& spec,
                                        const ScanConfig& config,
                                        const std::vector<std::size_t>& bins) {
  const std::size_t d = static_cast<std::size_t>(config.beam_count);
  std::vector<float> table(bins.size() * d);
  std::vector<double> ranges(d);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    PredictRanges(grid, CellToPose(spec.Unflatten(bins[b]), spec), config, ranges);
    for (std::size_t i = 0; i < d; ++i) table[b * d + i] = static_cast<float>(ranges[i]);
  }
  return table;
}

// Scores all tabulated bins against `observed` and returns the tempered,
// normalized map.
ProbabilityMap ScoreTable(const Scan& observed, const PoseGridSpec& spec,
                          const BeamModelParams& params, double temperature,
                          const std::vector<std::size_t>& bins,
                          const std::vector<float>& table) {
  if (bins.empty()) {
    throw Error(ErrorCode::kState, "no free pose bins to score");
  }
  const std::size_t d = observed.ranges.size();
  std::vector<double> log_score(bins.size());
  std::vector<double> predicted(d);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < bins.size(); ++b) {
    for (std::size_t i = 0; i < d; ++i) predicted[i] = table[b * d + i];
    const double score = ObservationScore(observed.ranges, predicted, params);
    log_score[b] = std::log(score) / temperature;
    best = std::max(best, log_score[b]);
  }
  ProbabilityMap pm(spec, observed.frame_id);
  auto& values = pm.mutable_values();
  double sum = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double v = std::exp(log_score[b] - best);
    values[bins[b]] = v;
    sum += v;
  }
  for (std::size_t b = 0; b < bins.size(); ++b) values[bins[b]] /= sum;
  return pm;
}

void CheckTemperature(double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  }
}

}  // namespace

GridMatcher::GridMatcher(const OccupancyGrid& grid, const PoseGridSpec& spec,
                         const ScanConfig& config, const BeamModelParams& params,
                         double temperature)
    : grid_hash_(grid.Hash()),
      spec_(spec),
      config_(config),
      params_(params),
      temperature_(temperature) {
  spec_.Validate();
  config_.Validate();
  params_.Validate();
  CheckTemperature(temperature);
  free_bins_ = FreeBinsAllHeadings(grid, spec_);
  if (free_bins_.empty()) {
    throw Error(ErrorCode::kState, "grid matcher: no free pose bins");
  }
  predicted_ = BuildPredictionTable(grid, spec_, config_, free_bins_);
}

bool GridMatcher::Matches(const OccupancyGrid& grid,
                          const ScanConfig& config) const {
  return config == config_ && grid.Hash() == grid_hash_;
}

ProbabilityMap GridMatcher::Infer(const Scan& scan,
                                  const OccupancyGrid& grid) const {
  if (scan.ranges.size() != static_cast<std::size_t>(scan.config.beam_count)) {
    throw Error(ErrorCode::kShape, "scan range count differs from its config");
  }
  if (!Matches(grid, scan.config)) {
    return GridMatcherInfer(scan, grid, spec_, params_, temperature_);
  }
  return ScoreTable(scan, spec_, params_, temperature_, free_bins_, predicted_);
}

ProbabilityMap GridMatcherInfer(const Scan& scan, const OccupancyGrid& grid,
                                const PoseGridSpec& spec,
                                const BeamModelParams& params,
                                double temperature) {
  spec.Validate();
  params.Validate();
  CheckTemperature(temperature);
  scan.config.Validate();
  if (scan.ranges.size() != static_cast<std::size_t>(scan.config.beam_count)) {
    throw Error(ErrorCode::kShape, "scan range count differs from its config");
  }
  const auto bins = FreeBinsAllHeadings(grid, spec);
  const auto table = BuildPredictionTable(grid, spec, scan.config, bins);
  return ScoreTable(scan, spec, params, temperature, bins, table);
}

std::string PmapFileName(std::int64_t frame_id) {
  return "pm_" + std::to_string(frame_id) + ".pmap";
}

std::unique_ptr<PmProvider> PmProvider::Load(const std::string& directory,
                                             const PoseGridSpec& spec) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(ErrorCode::kIo, "not a directory: " + directory);
  }
  std::unique_ptr<PmProvider> provider(new PmProvider(spec));
  static const std::regex kName(R"(pm_(\d+)\.pmap)");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& path : files) {
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, m, kName)) continue;
    // Frame ids are u32 on disk; anything longer cannot match.
    if (m[1].length() > 10) {
      throw Error(ErrorCode::kFormat, path.string() + ": frame id out of range");
    }
    ProbabilityMap pm = ReadPmap(path.string(), &spec);
    const std::int64_t name_id = std::stoll(m[1].str());
    if (pm.frame_id() != name_id) {
      throw Error(ErrorCode::kFormat,
                  path.string() + ": frame_id differs from file name");
    }
    provider->maps_.emplace(name_id, std::move(pm));
  }
  return provider;
}

const ProbabilityMap& PmProvider::Get(std::int64_t frame_id) const {
  const auto it = maps_.find(frame_id);
  if (it == maps_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no probability map for frame " + std::to_string(frame_id));
  }
  return it->second;
}

ProbabilityMap PmProvider::Infer(const Scan& scan, const OccupancyGrid&) const {
  return Normalize(Get(scan.frame_id));
}

DualFeatures ComputeDualFeatures(const Scan& scan) {
  double sx = 0.0;
  double sy = 0.0;
  double sr = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    if (r >= scan.config.max_range) continue;
    const double a = scan.config.BeamAngle(static_cast<int>(i));
    sx += r * std::cos(a);
    sy += r * std::sin(a);
    sr += r;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kState, "scan has no returning beams");
  }
  return {sx / n, sy / n, sr / n};
}

DualFeatureIndex::DualFeatureIndex(const OccupancyGrid& grid,
                                   const PoseGridSpec& spec,
                                   const ScanConfig& config)
    : spec_(spec) {
  spec_.Validate();
  config.Validate();
  Scan scan;
  scan.config = config;
  scan.ranges.resize(static_cast<std::size_t>(config.beam_count));
  for (const PoseIndex& pos : FreePositionBins(grid, spec_)) {
    for (int k = 0; k < spec_.k; ++k) {
      const PoseIndex bin{pos.i, pos.j, k};
      PredictRanges(grid, CellToPose(bin, spec_), config, scan.ranges);
      // A bin that sees nothing has no features to match.
      const bool any_return = std::any_of(
          scan.ranges.begin(), scan.ranges.end(),
          [&](double r) { return r < config.max_range; });
      if (!any_return) continue;
      entries_.push_back({bin, ComputeDualFeatures(scan)});
    }
  }
  if (entries_.empty()) {
    throw Error(ErrorCode::kState, "dual feature index is empty");
  }
  std::vector<int> ids(entries_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  nodes_.reserve(entries_.size());
  root_ = Build(ids, 0, static_cast<int>(ids.size()), 0);
}

int DualFeatureIndex::Build(std::vector<int>& ids, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                   [&](int a, int b) {
                     const double fa = entries_[a].features.AsArray()[axis];
                     const double fb = entries_[b].features.AsArray()[axis];
                     return fa < fb || (fa == fb && a < b);
                   });
  const int node = static_cast<int>(nodes_.size());
  nodes_.push_back({ids[mid], axis, -1, -1});
  const int left = Build(ids, lo, mid, depth + 1);
  const int right = Build(ids, mid + 1, hi, depth + 1);
  nodes_[node].left = left;
  nodes_[node].right = right;
  return node;
}

std::vector<const DualFeatureIndex::Entry*> DualFeatureIndex::Nearest(
    const DualFeatures& query, int q) const {
  if (q < 1) throw Error(ErrorCode::kInvalidArgument, "q must be >= 1");
  const auto target = query.AsArray();
  // Max-heap on (squared distance, entry id) keeps the q best seen so far.
  using Item = std::pair<double, int>;
  std::priority_queue<Item> best;
  const std::size_t limit = static_cast<std::size_t>(q);

  auto visit = [&](auto&& self, int node) -> void {
    if (node < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const auto f = entries_[static_cast<std::size_t>(n.entry)].features.AsArray();
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) d2 += (f[a] - target[a]) * (f[a] - target[a]);
    const Item item{d2, n.entry};
    if (best.size() < limit) {
      best.push(item);
    } else if (item < best.top()) {
      best.pop();
      best.push(item);
    }
    const double split = target[n.axis] - f[n.axis];
    const int near = split < 0.0 ? n.left : n.right;
    const int far = split < 0.0 ? n.right : n.left;
    self(self, near);
    if (best.size() < limit || split * split <= best.top().first) self(self, far);
  };
  visit(visit, root_);

  std::vector<Item> items;
  while (!best.empty()) {
    items.push_back(best.top());
    best.pop();
  }
  std::sort(items.begin(), items.end());
  std::vector<const Entry*> out;
  out.reserve(items.size());
  for (const Item& it : items) out.push_back(&entries_[static_cast<std::size_t>(it.second)]);
  return out;
}

std::vector<Pose> DualFeatureIndexSample(const DualFeatureIndex& index,
                                         const DualFeatures& features, int n,
                                         Rng& rng, int q) {
  const auto candidates = index.Nearest(features, q);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(std::max(0, n)));
  for (int i = 0; i < n; ++i) {
    poses.push_back(JitterInBin(candidates[pick(rng)]->bin, index.spec(), rng));
  }
  return poses;
}

DualFeatureModel::DualFeatureModel(const OccupancyGrid& grid,
                                   const PoseGridSpec& spec,
                                   const ScanConfig& config, int q)
    : index_(grid, spec, config), q_(q) {
  if (q < 1) throw Error(ErrorCode::kInvalidArgument, "q must be >= 1");
}

ProbabilityMap DualFeatureModel::Infer(const Scan& scan,
                                       const OccupancyGrid&) const {
  const auto candidates = index_.Nearest(ComputeDualFeatures(scan), q_);
  ProbabilityMap pm(index_.spec(), scan.frame_id);
  const double mass = 1.0 / static_cast<double>(candidates.size());
  for (const auto* entry : candidates) pm.at(entry->bin) += mass;
  return pm;
}

}  // namespace samloc
