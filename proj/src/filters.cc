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

#include "samloc/filters.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

#include "samloc/error.h"
#include "samloc/pm.h"

namespace samloc {

FilterAlgorithm ParseFilterAlgorithm(const std::string& name) {
  if (name == "mcl") return FilterAlgorithm::kMcl;
  if (name == "dual") return FilterAlgorithm::kDual;
  if (name == "mixture") return FilterAlgorithm::kMixture;
  if (name == "adam") return FilterAlgorithm::kAdam;
  throw Error(ErrorCode::kInvalidArgument, "unknown filter: " + name);
}

const char* FilterAlgorithmName(FilterAlgorithm algorithm) {
  switch (algorithm) {
    case FilterAlgorithm::kMcl:
      return "mcl";
    case FilterAlgorithm::kDual:
      return "dual";
    case FilterAlgorithm::kMixture:
      return "mixture";
    case FilterAlgorithm::kAdam:
      return "adam";
  }
  return "?";
}

void FilterConfig::Validate() const {
  if (n_particles < 1) {
    throw Error(ErrorCode::kInvalidArgument, "particle count must be >= 1");
  }
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " must lie in [0, 1]");
    }
  };
  unit(random_rate, "random_rate");
  unit(mixture_p, "mixture_p");
  unit(t_cut, "t_cut");
  motion_noise.Validate();
  beam.Validate();
}

FilterContext::FilterContext(const OccupancyGrid& grid, const PoseGridSpec& spec,
                             const MotionNoise& motion_noise,
                             const BeamModelParams& beam)
    : grid_(&grid),
      spec_(spec),
      motion_noise_(motion_noise),
      beam_(beam),
      free_positions_(FreePositionBins(grid, spec)) {
  spec_.Validate();
  if (free_positions_.empty()) {
    throw Error(ErrorCode::kState, "map has no free pose bins");
  }
}

Pose FilterContext::SampleUniform(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, free_positions_.size() - 1);
  const Pose p = JitterInBin(free_positions_[pick(rng)], spec_, rng);
  const double theta = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  return Pose(p.x, p.y, theta);
}

double FilterContext::Weigh(const Pose& pose, const Scan& scan) const {
  if (!grid_->IsFreeAt(pose.x, pose.y)) return 0.0;
  thread_local std::vector<double> predicted;
  predicted.resize(scan.ranges.size());
  PredictRanges(*grid_, pose, scan.config, predicted);
  return ObservationScore(scan.ranges, predicted, beam_);
}

ParticleSet InitUniform(const FilterContext& ctx, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "particle count must be >= 1");
  ParticleSet set;
  set.particles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    set.particles.push_back({ctx.SampleUniform(rng), 0.0, 1.0 / n});
  }
  return set;
}

ParticleSet ResampleSystematic(const ParticleSet& set, int n, Rng& rng) {
  ParticleSet out;
  out.step = set.step;
  if (n <= 0 || set.particles.empty()) return out;
  out.particles.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (const Particle& p : set.particles) total += p.weight_norm;
  const bool uniform = !(total > 0.0);
  const double count = static_cast<double>(set.particles.size());
  const double step = 1.0 / n;
  double u = std::uniform_real_distribution<double>(0.0, step)(rng);
  std::size_t i = 0;
  double cumulative = uniform ? 1.0 / count : set.particles[0].weight_norm / total;
  for (int m = 0; m < n; ++m) {
    while (u > cumulative && i + 1 < set.particles.size()) {
      ++i;
      cumulative += uniform ? 1.0 / count : set.particles[i].weight_norm / total;
    }
    Particle copy = set.particles[i];
    copy.weight_norm = step;
    out.particles.push_back(copy);
    u += step;
  }
  return out;
}

bool NormalizeWeights(ParticleSet& set) {
  double total = 0.0;
  for (const Particle& p : set.particles) total += p.weight;
  if (!(total > 0.0)) return false;
  for (Particle& p : set.particles) p.weight_norm = p.weight / total;
  return true;
}

namespace {

// Normalizes, or replaces the set by a fresh uniform one if every particle
// scored zero.
void FinishUpdate(ParticleSet& set, const FilterContext& ctx, int n, int step,
                  Rng& rng, UpdateStats* stats) {
  if (!NormalizeWeights(set)) {
    set = InitUniform(ctx, n, rng);
    if (stats != nullptr) stats->reinitialized = true;
  }
  set.step = step;
}

Particle MoveAndWeigh(const Particle& from, const Motion& motion,
                      const Scan& scan, const FilterContext& ctx, Rng& rng) {
  Particle p;
  p.pose = Transition(from.pose, motion, ctx.motion_noise(), rng);
  p.weight = ctx.Weigh(p.pose, scan);
  return p;
}

// Observation-model proposal: draw at time t, step back through the motion
// model, keep the forward pose weighted by its observation score.
Particle DrawFromModel(const PoseSampler& sampler, const Motion& motion,
                       const Scan& scan, const FilterContext& ctx, Rng& rng) {
  Particle p;
  p.pose = sampler.Draw(rng);
  InverseTransition(p.pose, motion, ctx.motion_noise(), rng);
  p.weight = ctx.Weigh(p.pose, scan);
  return p;
}

std::optional<PoseSampler> TryModelSampler(const SamplableObservationModel& model,
                                           const Scan& scan,
                                           const FilterContext& ctx) {
  try {
    return PoseSampler(model.Infer(scan, ctx.grid()));
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

ParticleSet MclUpdate(const ParticleSet& set, const Motion& motion,
                      const Scan& scan, const FilterContext& ctx,
                      double random_rate, Rng& rng, UpdateStats* stats) {
  const int n = static_cast<int>(set.size());
  const int n_random = static_cast<int>(std::lround(n * random_rate));
  const ParticleSet survivors = ResampleSystematic(set, n - n_random, rng);
  ParticleSet out;
  out.particles.reserve(static_cast<std::size_t>(n));
  for (const Particle& p : survivors.particles) {
    out.particles.push_back(MoveAndWeigh(p, motion, scan, ctx, rng));
  }
  for (int i = 0; i < n_random; ++i) {
    Particle fresh{ctx.SampleUniform(rng), 0.0, 0.0};
    out.particles.push_back(MoveAndWeigh(fresh, motion, scan, ctx, rng));
  }
  if (stats != nullptr) {
    stats->h_count = n;
    stats->l_count = 0;
  }
  FinishUpdate(out, ctx, n, set.step + 1, rng, stats);
  return out;
}

ParticleSet DualUpdate(const ParticleSet& set, const Motion& motion,
                       const Scan& scan, const FilterContext& ctx,
                       const SamplableObservationModel& model, Rng& rng,
                       UpdateStats* stats) {
  const int n = static_cast<int>(set.size());
  const PoseSampler sampler(model.Infer(scan, ctx.grid()));
  ParticleSet out;
  out.particles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.particles.push_back(DrawFromModel(sampler, motion, scan, ctx, rng));
  }
  if (stats != nullptr) {
    stats->h_count = 0;
    stats->l_count = n;
  }
  FinishUpdate(out, ctx, n, set.step + 1, rng, stats);
  return out;
}

ParticleSet MixtureUpdate(const ParticleSet& set, const Motion& motion,
                          const Scan& scan, const FilterContext& ctx,
                          const SamplableObservationModel& model,
                          double random_rate, double p, Rng& rng,
                          UpdateStats* stats) {
  bool use_mcl;
  if (p >= 1.0) {
    use_mcl = true;
  } else if (p <= 0.0) {
    use_mcl = false;
  } else {
    use_mcl = std::bernoulli_distribution(p)(rng);
  }
  return use_mcl ? MclUpdate(set, motion, scan, ctx, random_rate, rng, stats)
                 : DualUpdate(set, motion, scan, ctx, model, rng, stats);
}

ParticleSet AdamUpdate(const ParticleSet& set, const Motion& motion,
                       const Scan& scan, const FilterContext& ctx,
                       const SamplableObservationModel& model, double w_star,
                       double t_cut, Rng& rng, UpdateStats* stats) {
  if (!(w_star > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "w_star must be positive");
  }
  const int n = static_cast<int>(set.size());
  ParticleSet trusted;
  int untrusted = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Particle& p : set.particles) {
    const double t = Trust(p.weight, w_star);
    if (t > t_cut || unit(rng) < t) {
      trusted.particles.push_back(p);
    } else {
      ++untrusted;
    }
  }
  const int h = static_cast<int>(trusted.size());

  ParticleSet out;
  out.particles.reserve(static_cast<std::size_t>(n));
  const ParticleSet survivors = ResampleSystematic(trusted, h, rng);
  for (const Particle& p : survivors.particles) {
    out.particles.push_back(MoveAndWeigh(p, motion, scan, ctx, rng));
  }
  bool fallback = false;
  if (untrusted > 0) {
    const auto sampler = TryModelSampler(model, scan, ctx);
    for (int i = 0; i < untrusted; ++i) {
      if (sampler) {
        out.particles.push_back(DrawFromModel(*sampler, motion, scan, ctx, rng));
      } else {
        Particle p;
        p.pose = ctx.SampleUniform(rng);
        p.weight = ctx.Weigh(p.pose, scan);
        out.particles.push_back(p);
      }
    }
    fallback = !sampler.has_value();
  }
  if (stats != nullptr) {
    stats->h_count = h;
    stats->l_count = untrusted;
    stats->pm_fallback = fallback;
  }
  FinishUpdate(out, ctx, n, set.step + 1, rng, stats);
  return out;
}

Pose EstimatePose(const ParticleSet& set) {
  const std::size_t n = set.particles.size();
  if (n == 0) throw Error(ErrorCode::kState, "cannot estimate from an empty set");
  constexpr double kLinkDistance = 1.0;
  constexpr double kLinkAngle = std::numbers::pi / 6.0;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (std::size_t a = 0; a < n; ++a) {
    const Pose& pa = set.particles[a].pose;
    for (std::size_t b = a + 1; b < n; ++b) {
      const Pose& pb = set.particles[b].pose;
      const double dx = pa.x - pb.x;
      const double dy = pa.y - pb.y;
      if (dx * dx + dy * dy >= kLinkDistance * kLinkDistance) continue;
      if (std::abs(WrapToPi(pa.theta - pb.theta)) >= kLinkAngle) continue;
      const std::size_t ra = find(a);
      const std::size_t rb = find(b);
      // Keep the smaller index as root so cluster order follows particle order.
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  std::vector<double> mass(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) mass[find(a)] += set.particles[a].weight_norm;
  std::size_t best = find(0);
  for (std::size_t a = 0; a < n; ++a) {
    if (find(a) == a && mass[a] > mass[best]) best = a;
  }

  double w_sum = 0.0;
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
  double c = 0.0;
  const bool weighted = mass[best] > 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (find(a) != best) continue;
    const Particle& p = set.particles[a];
    const double w = weighted ? p.weight_norm : 1.0;
    w_sum += w;
    x += w * p.pose.x;
    y += w * p.pose.y;
    s += w * std::sin(p.pose.theta);
    c += w * std::cos(p.pose.theta);
  }
  return Pose(x / w_sum, y / w_sum, std::atan2(s, c));
}

ParticleFilter::ParticleFilter(const OccupancyGrid& grid,
                               const PoseGridSpec& spec,
                               const FilterConfig& config,
                               const SamplableObservationModel* model)
    : config_(config),
      ctx_(grid, spec, config.motion_noise, config.beam),
      model_(model),
      rng_(config.rng_seed) {
  config_.Validate();
  if (model_ == nullptr && config_.algorithm != FilterAlgorithm::kMcl) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(FilterAlgorithmName(config_.algorithm)) +
                    " filter needs an observation model");
  }
  Reset();
}

void ParticleFilter::Reset() {
  rng_.seed(config_.rng_seed);
  set_ = InitUniform(ctx_, config_.n_particles, rng_);
}

UpdateStats ParticleFilter::Update(const Motion& motion, const Scan& scan) {
  UpdateStats stats;
  switch (config_.algorithm) {
    case FilterAlgorithm::kMcl:
      set_ = MclUpdate(set_, motion, scan, ctx_, config_.random_rate, rng_, &stats);
      break;
    case FilterAlgorithm::kDual:
      set_ = DualUpdate(set_, motion, scan, ctx_, *model_, rng_, &stats);
      break;
    case FilterAlgorithm::kMixture:
      set_ = MixtureUpdate(set_, motion, scan, ctx_, *model_, config_.random_rate,
                           config_.mixture_p, rng_, &stats);
      break;
    case FilterAlgorithm::kAdam:
      set_ = AdamUpdate(set_, motion, scan, ctx_, *model_,
                        ReferenceWeight(scan.config, config_.beam), config_.t_cut,
                        rng_, &stats);
      break;
  }
  return stats;
}

}  // namespace samloc
