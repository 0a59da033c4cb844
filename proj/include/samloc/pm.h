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

// Probability maps: grid posteriors over the discretized pose space, their
// ground-truth construction, the KL objective and sampling.

#ifndef SAMLOC_PM_H_
#define SAMLOC_PM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "samloc/world.h"

namespace samloc {

class ProbabilityMap {
 public:
  explicit ProbabilityMap(const PoseGridSpec& spec, std::int64_t frame_id = 0);
  ProbabilityMap(const PoseGridSpec& spec, std::vector<double> values,
                 std::int64_t frame_id = 0);

  const PoseGridSpec& spec() const { return spec_; }
  std::int64_t frame_id() const { return frame_id_; }
  void set_frame_id(std::int64_t id) { frame_id_ = id; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double at(const PoseIndex& idx) const { return values_[spec_.Flatten(idx)]; }
  double& at(const PoseIndex& idx) { return values_[spec_.Flatten(idx)]; }

  double Sum() const;
  // First index of the largest entry.
  PoseIndex ArgMax() const;

 private:
  PoseGridSpec spec_;
  std::vector<double> values_;
  std::int64_t frame_id_ = 0;
};

ProbabilityMap Normalize(const ProbabilityMap& pm);

// Gaussian-blurred one-hot position raster (std `blur_sigma` bins, window
// truncated at 3 sigma) times a linear split over the two heading bins that
// bracket pose.theta, normalized to unit mass.
ProbabilityMap GenerateGroundTruth(const Pose& pose, const PoseGridSpec& spec,
                                   double blur_sigma);

// sum gt * log(gt / pm) with 0 log 0 = 0; +inf when pm = 0 where gt > 0.
double KldLoss(const ProbabilityMap& gt, const ProbabilityMap& pm);

// Uniform continuous pose inside a bin: +-half a bin per position axis
// (clamped to the extent) and +-pi/k in heading.
Pose JitterInBin(const PoseIndex& index, const PoseGridSpec& spec, Rng& rng);

// Categorical draw by cumulative-sum inversion with within-bin jitter.
class PoseSampler {
 public:
  explicit PoseSampler(const ProbabilityMap& pm);
  PoseIndex DrawBin(Rng& rng) const;
  Pose Draw(Rng& rng) const;

 private:
  PoseGridSpec spec_;
  std::vector<double> cdf_;
};

std::vector<Pose> SamplePoses(const ProbabilityMap& pm, int n, Rng& rng);

// Minimizer of the summed one-hot KL losses for the listed bins: mass 1/m on
// each, zero elsewhere.
ProbabilityMap MultimodalOptimum(const std::vector<PoseIndex>& bins,
                                 const PoseGridSpec& spec);

// PMAP file: "PMAP", u32 version=1, frame_id, H, W, K, then H*W*K f32, all
// little endian, (i, j, k) row-major.
inline constexpr std::uint32_t kPmapVersion = 1;
inline constexpr std::size_t kPmapHeaderBytes = 24;

std::string EncodePmap(const ProbabilityMap& pm);
// The decoded spec carries bin counts only; extent and origin come from
// `extent` when given.
ProbabilityMap DecodePmap(const std::string& bytes,
                          const PoseGridSpec* extent = nullptr);
void WritePmap(const ProbabilityMap& pm, const std::string& path);
ProbabilityMap ReadPmap(const std::string& path,
                        const PoseGridSpec* extent = nullptr);

}  // namespace samloc

#endif  // SAMLOC_PM_H_
