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

// Observation models that can be sampled from: each turns a scan into a
// probability map over the pose grid.

#ifndef SAMLOC_SAMPLERS_H_
#define SAMLOC_SAMPLERS_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "samloc/models.h"
#include "samloc/pm.h"
#include "samloc/sensor.h"
#include "samloc/world.h"

namespace samloc {

class SamplableObservationModel {
 public:
  virtual ~SamplableObservationModel() = default;

  // Normalized posterior over the pose grid given `scan`.
  virtual ProbabilityMap Infer(const Scan& scan,
                               const OccupancyGrid& grid) const = 0;
  virtual const PoseGridSpec& spec() const = 0;
};

// Brute-force posterior: every free pose bin is scored by comparing the scan
// against a noiseless scan simulated at the bin center. Scores are tempered
// (score^(1/temperature)) and normalized in the log domain. Predicted scans
// are cached per (grid, spec, scan config) at construction.
class GridMatcher : public SamplableObservationModel {
 public:
  GridMatcher(const OccupancyGrid& grid, const PoseGridSpec& spec,
              const ScanConfig& config, const BeamModelParams& params,
              double temperature = 1.0);

  ProbabilityMap Infer(const Scan& scan,
                       const OccupancyGrid& grid) const override;
  const PoseGridSpec& spec() const override { return spec_; }

  double temperature() const { return temperature_; }
  std::size_t free_bin_count() const { return free_bins_.size(); }

 private:
  bool Matches(const OccupancyGrid& grid, const ScanConfig& config) const;

  std::uint64_t grid_hash_;
  PoseGridSpec spec_;
  ScanConfig config_;
  BeamModelParams params_;
  double temperature_;
  std::vector<std::size_t> free_bins_;  // flat pose-grid indices
  std::vector<float> predicted_;        // free_bins_.size() x beam_count
};

// Uncached one-shot variant of GridMatcher::Infer.
ProbabilityMap GridMatcherInfer(const Scan& scan, const OccupancyGrid& grid,
                                const PoseGridSpec& spec,
                                const BeamModelParams& params,
                                double temperature);

// Serves probability maps exported to `pm_<frame_id>.pmap` files.
class PmProvider : public SamplableObservationModel {
 public:
  // Reads every pm_*.pmap under `directory`; dimensions must match `spec`.
  static std::unique_ptr<PmProvider> Load(const std::string& directory,
                                          const PoseGridSpec& spec);

  // Stored tensor for scan.frame_id, renormalized in double precision.
  ProbabilityMap Infer(const Scan& scan,
                       const OccupancyGrid& grid) const override;
  const PoseGridSpec& spec() const override { return spec_; }

  // Stored tensor exactly as decoded from disk.
  const ProbabilityMap& Get(std::int64_t frame_id) const;
  std::size_t size() const { return maps_.size(); }

 private:
  explicit PmProvider(const PoseGridSpec& spec) : spec_(spec) {}

  PoseGridSpec spec_;
  std::map<std::int64_t, ProbabilityMap> maps_;
};

std::string PmapFileName(std::int64_t frame_id);

struct DualFeatures {
  double centroid_x = 0.0;  // robot frame
  double centroid_y = 0.0;
  double mean_range = 0.0;

  std::array<double, 3> AsArray() const {
    return {centroid_x, centroid_y, mean_range};
  }
};

// Centroid of beam endpoints and mean range over returning beams.
DualFeatures ComputeDualFeatures(const Scan& scan);

// Nearest-neighbour table from handcrafted scan features to pose bins, built
// from noiseless scans at every free bin center. Backed by a 3-d kd-tree.
class DualFeatureIndex {
 public:
  DualFeatureIndex(const OccupancyGrid& grid, const PoseGridSpec& spec,
                   const ScanConfig& config);

  struct Entry {
    PoseIndex bin;
    DualFeatures features;
  };

  // Up to q entries nearest to `query`, closest first.
  std::vector<const Entry*> Nearest(const DualFeatures& query, int q) const;
  const std::vector<Entry>& entries() const { return entries_; }
  const PoseGridSpec& spec() const { return spec_; }

 private:
  struct Node {
    int entry = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  int Build(std::vector<int>& ids, int lo, int hi, int depth);

  PoseGridSpec spec_;
  std::vector<Entry> entries_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Uniform draws among the top-q bins for `features`, jittered within bin.
std::vector<Pose> DualFeatureIndexSample(const DualFeatureIndex& index,
                                         const DualFeatures& features, int n,
                                         Rng& rng, int q = 32);

// Model adapter: mass 1/q on each of the top-q bins. Sampling this map gives
// the same distribution as DualFeatureIndexSample.
class DualFeatureModel : public SamplableObservationModel {
 public:
  DualFeatureModel(const OccupancyGrid& grid, const PoseGridSpec& spec,
                   const ScanConfig& config, int q = 32);

  ProbabilityMap Infer(const Scan& scan,
                       const OccupancyGrid& grid) const override;
  const PoseGridSpec& spec() const override { return index_.spec(); }
  const DualFeatureIndex& index() const { return index_; }

 private:
  DualFeatureIndex index_;
  int q_;
};

}  // namespace samloc

#endif  // SAMLOC_SAMPLERS_H_
