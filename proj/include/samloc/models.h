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

// Motion and beam observation models.

#ifndef SAMLOC_MODELS_H_
#define SAMLOC_MODELS_H_

#include <span>

#include "samloc/sensor.h"
#include "samloc/world.h"

namespace samloc {

// Odometry increment expressed in the robot frame at t-1.
struct Motion {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

struct MotionNoise {
  double sigma_x = 0.05;
  double sigma_y = 0.05;
  double sigma_theta = 0.02;
  void Validate() const;
};

struct BeamModelParams {
  double sigma = 0.2;
  double l_max = 10.0;
  double alpha = 0.9;
  double beta = 0.1;
  double exponent = 3.0;
  void Validate() const;
};

// Rotates the motion into the world frame, adds it, then adds zero-mean
// Gaussian noise per axis. Zero sigmas draw nothing from `rng`.
Pose Transition(const Pose& pose, const Motion& motion,
                const MotionNoise& noise, Rng& rng);

// Inverse of Transition: the pose that, moved by `motion`, lands on `pose`.
Pose InverseTransition(const Pose& pose, const Motion& motion,
                       const MotionNoise& noise, Rng& rng);

// Sum over beams of [alpha * N(dL; 0, sigma) + beta / l_max]^exponent.
double ObservationScore(std::span<const double> observed,
                        std::span<const double> predicted,
                        const BeamModelParams& params);
double ObservationScore(const Scan& observed, const Scan& predicted,
                        const BeamModelParams& params);

// Score of a perfect match. Accumulated beam by beam in the same order as
// ObservationScore so that ObservationScore(s, s) == ReferenceWeight(...)
// holds bit for bit.
double ReferenceWeight(int beam_count, const BeamModelParams& params);
double ReferenceWeight(const ScanConfig& config, const BeamModelParams& params);

inline double Trust(double weight, double w_star) { return weight / w_star; }

}  // namespace samloc

#endif  // SAMLOC_MODELS_H_
