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

#include "samloc/sensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "samloc/error.h"

namespace samloc {

void ScanConfig::Validate() const {
  if (beam_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "beam_count must be >= 1");
  }
  if (!(fov > 0.0) || fov > kTwoPi + 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "fov must lie in (0, 2*pi]");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw Error(ErrorCode::kInvalidArgument, "max_range must be positive");
  }
}

double CastRay(const OccupancyGrid& grid, const Point2& origin, double angle,
               double max_range) {
  const double res = grid.resolution();
  const double fx = (origin.x - grid.origin().x) / res;
  const double fy = (origin.y - grid.origin().y) / res;
  int cx = static_cast<int>(std::floor(fx));
  int cy = static_cast<int>(std::floor(fy));
  if (!grid.InBounds(cx, cy)) {
    std::ostringstream msg;
    msg << "ray origin (" << origin.x << ", " << origin.y << ") outside map";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  if (grid.at(cx, cy) != CellState::kFree) {
    std::ostringstream msg;
    msg << "ray origin (" << origin.x << ", " << origin.y
        << ") is not in free space";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double dir_x = std::cos(angle);
  const double dir_y = std::sin(angle);
  const int step_x = dir_x > 0.0 ? 1 : -1;
  const int step_y = dir_y > 0.0 ? 1 : -1;
  // Parametric distances (in cells) to the next vertical / horizontal edge.
  double t_max_x = kInf;
  double t_max_y = kInf;
  double t_delta_x = kInf;
  double t_delta_y = kInf;
  if (dir_x != 0.0) {
    t_max_x = ((cx + (step_x > 0 ? 1 : 0)) - fx) / dir_x;
    t_delta_x = std::abs(1.0 / dir_x);
  }
  if (dir_y != 0.0) {
    t_max_y = ((cy + (step_y > 0 ? 1 : 0)) - fy) / dir_y;
    t_delta_y = std::abs(1.0 / dir_y);
  }
  const double t_limit = max_range / res;
  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      cy += step_y;
      t_max_y += t_delta_y;
    }
    if (t >= t_limit) return max_range;
    if (grid.Blocks(cx, cy)) return std::max(0.0, t * res);
  }
}

double CastRay(const OccupancyGrid& grid, const Pose& origin, double angle,
               double max_range) {
  return CastRay(grid, Point2{origin.x, origin.y}, angle, max_range);
}

void PredictRanges(const OccupancyGrid& grid, const Pose& pose,
                   const ScanConfig& config, std::span<double> out) {
  const Point2 origin{pose.x, pose.y};
  for (int i = 0; i < config.beam_count; ++i) {
    out[static_cast<std::size_t>(i)] =
        CastRay(grid, origin, pose.theta + config.BeamAngle(i), config.max_range);
  }
}

Scan SimulateScan(const OccupancyGrid& grid, const Pose& pose,
                  const ScanConfig& config, double noise_sigma, Rng& rng) {
  config.Validate();
  if (noise_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  }
  Scan scan;
  scan.config = config;
  scan.ranges.resize(static_cast<std::size_t>(config.beam_count));
  PredictRanges(grid, pose, config, scan.ranges);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& r : scan.ranges) {
      if (r >= config.max_range) continue;
      r = std::clamp(r + noise(rng), 0.0, config.max_range);
    }
  }
  return scan;
}

Scan SimulateScan(const OccupancyGrid& grid, const Pose& pose,
                  const ScanConfig& config, double noise_sigma,
                  std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return SimulateScan(grid, pose, config, noise_sigma, rng);
}

std::size_t Image::CountLit() const {
  return static_cast<std::size_t>(
      std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p != 0; }));
}

Image ScanToImage(const Scan& scan, int image_size, double scale) {
  if (image_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image_size must be >= 1");
  }
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "image scale must be positive");
  }
  Image image;
  image.width = image_size;
  image.height = image_size;
  image.pixels.assign(static_cast<std::size_t>(image_size) * image_size, 0);
  const int center = image_size / 2;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    if (r >= scan.config.max_range) continue;
    const double a = scan.config.BeamAngle(static_cast<int>(i));
    const long u = center + std::lround(r * std::cos(a) / scale);
    const long v = center + std::lround(r * std::sin(a) / scale);
    if (u < 0 || v < 0 || u >= image_size || v >= image_size) continue;
    image.pixels[static_cast<std::size_t>(v) * image_size + u] = 1;
  }
  return image;
}

}  // namespace samloc
