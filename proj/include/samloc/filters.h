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

// Particle filters for global localization: plain MCL with random
// injection, Dual MCL (particles drawn from a samplable observation model),
// Mixture MCL, and the adaptive mixture that routes each particle to one of
// the two updates by how well it explains the current scan.

#ifndef SAMLOC_FILTERS_H_
#define SAMLOC_FILTERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "samloc/models.h"
#include "samloc/samplers.h"
#include "samloc/sensor.h"
#include "samloc/world.h"

namespace samloc {

struct Particle {
  Pose pose;
  double weight = 0.0;       // raw observation score, 0 when unscored
  double weight_norm = 0.0;  // sums to 1 over the set
};

struct ParticleSet {
  std::vector<Particle> particles;
  int step = 0;

  std::size_t size() const { return particles.size(); }
};

enum class FilterAlgorithm { kMcl, kDual, kMixture, kAdam };

FilterAlgorithm ParseFilterAlgorithm(const std::string& name);
const char* FilterAlgorithmName(FilterAlgorithm algorithm);

struct FilterConfig {
  int n_particles = 200;
  FilterAlgorithm algorithm = FilterAlgorithm::kAdam;
  double random_rate = 0.2;
  double mixture_p = 0.9;
  double t_cut = 0.6;
  std::uint64_t rng_seed = 0;
  MotionNoise motion_noise;
  BeamModelParams beam;

  void Validate() const;
};

// Read-only state shared by all updates on one map.
class FilterContext {
 public:
  FilterContext(const OccupancyGrid& grid, const PoseGridSpec& spec,
                const MotionNoise& motion_noise, const BeamModelParams& beam);

  const OccupancyGrid& grid() const { return *grid_; }
  const PoseGridSpec& spec() const { return spec_; }
  const MotionNoise& motion_noise() const { return motion_noise_; }
  const BeamModelParams& beam() const { return beam_; }

  // Uniform over free position bins (jittered within the bin), uniform
  // heading.
  Pose SampleUniform(Rng& rng) const;
  // Observation score of a noiseless scan predicted at `pose`; zero when the
  // pose is off the map or inside an obstacle.
  double Weigh(const Pose& pose, const Scan& scan) const;

 private:
  const OccupancyGrid* grid_;
  PoseGridSpec spec_;
  MotionNoise motion_noise_;
  BeamModelParams beam_;
  std::vector<PoseIndex> free_positions_;
};

struct UpdateStats {
  int h_count = 0;  // particles updated by the motion-model branch
  int l_count = 0;  // particles drawn from the observation model
  bool reinitialized = false;  // every weight was zero
  bool pm_fallback = false;    // observation model failed, drew uniformly
};

ParticleSet InitUniform(const FilterContext& ctx, int n, Rng& rng);

// Low-variance resampling by weight_norm; outputs carry weight_norm = 1/n.
ParticleSet ResampleSystematic(const ParticleSet& set, int n, Rng& rng);

// Returns false (and leaves weights untouched) when every raw weight is 0.
bool NormalizeWeights(ParticleSet& set);

ParticleSet MclUpdate(const ParticleSet& set, const Motion& motion,
                      const Scan& scan, const FilterContext& ctx,
                      double random_rate, Rng& rng,
                      UpdateStats* stats = nullptr);

ParticleSet DualUpdate(const ParticleSet& set, const Motion& motion,
                       const Scan& scan, const FilterContext& ctx,
                       const SamplableObservationModel& model, Rng& rng,
                       UpdateStats* stats = nullptr);

// One Bernoulli(p) draw per step picks MclUpdate (success) or DualUpdate.
// p = 1 and p = 0 draw nothing, so they match the delegates exactly.
ParticleSet MixtureUpdate(const ParticleSet& set, const Motion& motion,
                          const Scan& scan, const FilterContext& ctx,
                          const SamplableObservationModel& model,
                          double random_rate, double p, Rng& rng,
                          UpdateStats* stats = nullptr);

// Trust T = w / w_star routes a particle to H when T > t_cut, otherwise to H
// with probability T and to L with probability 1 - T. H is resampled and
// moved by the motion model; L is replaced by draws from the observation
// model. Both branches are weighted by the observation score.
ParticleSet AdamUpdate(const ParticleSet& set, const Motion& motion,
                       const Scan& scan, const FilterContext& ctx,
                       const SamplableObservationModel& model, double w_star,
                       double t_cut, Rng& rng, UpdateStats* stats = nullptr);

// Single-linkage clusters (1 m, 30 deg); weighted mean of the heaviest
// cluster, circular mean for heading. Ties go to the cluster whose first
// particle comes first.
Pose EstimatePose(const ParticleSet& set);

// Owns the particle set, rng and configuration of one localization run.
class ParticleFilter {
 public:
  // `model` may be null for FilterAlgorithm::kMcl; it must outlive the filter.
  ParticleFilter(const OccupancyGrid& grid, const PoseGridSpec& spec,
                 const FilterConfig& config,
                 const SamplableObservationModel* model);

  void Reset();
  UpdateStats Update(const Motion& motion, const Scan& scan);
  Pose Estimate() const { return EstimatePose(set_); }

  const ParticleSet& particles() const { return set_; }
  const FilterConfig& config() const { return config_; }

 private:
  FilterConfig config_;
  FilterContext ctx_;
  const SamplableObservationModel* model_;
  Rng rng_;
  ParticleSet set_;
};

}  // namespace samloc

#endif  // SAMLOC_FILTERS_H_
