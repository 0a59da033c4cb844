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

#ifndef SAMLOC_SENSOR_H_
#define SAMLOC_SENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "samloc/world.h"

namespace samloc {

struct ScanConfig {
  int beam_count = 64;
  double fov = kTwoPi;
  double max_range = 10.0;
  double angle_offset = 0.0;

  // Bearing of beam i in the robot frame: angle_offset + i * fov / beam_count.
  double BeamAngle(int i) const {
    return angle_offset + i * fov / beam_count;
  }
  void Validate() const;
  bool operator==(const ScanConfig&) const = default;
};

struct Scan {
  std::vector<double> ranges;
  ScanConfig config;
  std::int64_t frame_id = 0;
};

// Distance along a world-frame ray to the first non-free cell, capped at
// max_range. Amanatides-Woo traversal at cell resolution.
double CastRay(const OccupancyGrid& grid, const Point2& origin, double angle,
               double max_range);
double CastRay(const OccupancyGrid& grid, const Pose& origin, double angle,
               double max_range);

// Noiseless ranges at `pose` written into `out` (size beam_count). The caller
// guarantees the pose is in free space.
void PredictRanges(const OccupancyGrid& grid, const Pose& pose,
                   const ScanConfig& config, std::span<double> out);

// Beams that hit something get N(0, noise_sigma) added and are clamped to
// [0, max_range]; no-return beams stay at max_range.
Scan SimulateScan(const OccupancyGrid& grid, const Pose& pose,
                  const ScanConfig& config, double noise_sigma, Rng& rng);
Scan SimulateScan(const OccupancyGrid& grid, const Pose& pose,
                  const ScanConfig& config, double noise_sigma,
                  std::uint64_t rng_seed);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row = v

  std::uint8_t at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }
  std::size_t CountLit() const;
};

// Square raster with the robot at (size/2, size/2), robot +x along +u.
// Endpoints off the raster and max-range beams are dropped.
Image ScanToImage(const Scan& scan, int image_size, double scale);

}  // namespace samloc

#endif  // SAMLOC_SENSOR_H_
