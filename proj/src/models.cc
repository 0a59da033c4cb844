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

#include "samloc/models.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "samloc/error.h"

namespace samloc {

void MotionNoise::Validate() const {
  if (sigma_x < 0.0 || sigma_y < 0.0 || sigma_theta < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "motion noise must be >= 0");
  }
}

void BeamModelParams::Validate() const {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam sigma must be positive");
  }
  if (!(l_max > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam l_max must be positive");
  }
  if (std::abs(alpha + beta - 1.0) > 1e-9 || alpha < 0.0 || beta < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "beam alpha and beta must be nonnegative and sum to 1");
  }
  if (!(exponent >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam exponent must be >= 1");
  }
}

namespace {

double Draw(double sigma, Rng& rng) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

double BeamTerm(double diff, const BeamModelParams& p, double inv_norm,
                double floor) {
  const double g =
      p.alpha * std::exp(-(diff * diff) / (2.0 * p.sigma * p.sigma)) * inv_norm;
  const double base = g + floor;
  return p.exponent == 3.0 ? base * base * base : std::pow(base, p.exponent);
}

}  // namespace

Pose Transition(const Pose& pose, const Motion& motion,
                const MotionNoise& noise, Rng& rng) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double x = pose.x + c * motion.dx - s * motion.dy;
  const double y = pose.y + s * motion.dx + c * motion.dy;
  const double theta = pose.theta + motion.dtheta;
  const double nx = Draw(noise.sigma_x, rng);
  const double ny = Draw(noise.sigma_y, rng);
  const double nt = Draw(noise.sigma_theta, rng);
  return Pose(x + nx, y + ny, theta + nt);
}

Pose InverseTransition(const Pose& pose, const Motion& motion,
                       const MotionNoise& noise, Rng& rng) {
  const double nx = Draw(noise.sigma_x, rng);
  const double ny = Draw(noise.sigma_y, rng);
  const double nt = Draw(noise.sigma_theta, rng);
  const double theta = pose.theta - motion.dtheta - nt;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Pose(pose.x - nx - (c * motion.dx - s * motion.dy),
              pose.y - ny - (s * motion.dx + c * motion.dy), theta);
}

double ObservationScore(std::span<const double> observed,
                        std::span<const double> predicted,
                        const BeamModelParams& params) {
  if (observed.size() != predicted.size()) {
    std::ostringstream msg;
    msg << "scan beam counts differ: " << observed.size() << " vs "
        << predicted.size();
    throw Error(ErrorCode::kShape, msg.str());
  }
  const double inv_norm = 1.0 / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
  const double floor = params.beta / params.l_max;
  double score = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    score += BeamTerm(observed[i] - predicted[i], params, inv_norm, floor);
  }
  return score;
}

double ObservationScore(const Scan& observed, const Scan& predicted,
                        const BeamModelParams& params) {
  if (observed.config.max_range != predicted.config.max_range) {
    throw Error(ErrorCode::kShape, "scans disagree on max_range");
  }
  return ObservationScore(std::span<const double>(observed.ranges),
                          std::span<const double>(predicted.ranges), params);
}

double ReferenceWeight(int beam_count, const BeamModelParams& params) {
  const double inv_norm = 1.0 / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
  const double floor = params.beta / params.l_max;
  const double term = BeamTerm(0.0, params, inv_norm, floor);
  double score = 0.0;
  for (int i = 0; i < beam_count; ++i) score += term;
  return score;
}

double ReferenceWeight(const ScanConfig& config, const BeamModelParams& params) {
  return ReferenceWeight(config.beam_count, params);
}

}  // namespace samloc
