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

// Occupancy grids, continuous poses and the discretized (x, y, theta) pose
// space shared by the probability maps and the filters.

#ifndef SAMLOC_WORLD_H_
#define SAMLOC_WORLD_H_

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace samloc {

using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maps any angle into [0, 2*pi).
double NormalizeAngle(double angle);
// Maps any angle into (-pi, pi].
double WrapToPi(double angle);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // [0, 2*pi)

  Pose() = default;
  Pose(double x_in, double y_in, double theta_in)
      : x(x_in), y(y_in), theta(NormalizeAngle(theta_in)) {}

  bool operator==(const Pose&) const = default;
};

enum class CellState : std::uint8_t { kFree = 0, kOccupied = 1, kUnknown = 2 };

struct CellIndex {
  int x = 0;
  int y = 0;
  bool operator==(const CellIndex&) const = default;
};

// Raster of cells; cell (ix, iy) covers
// [origin.x + ix*res, origin.x + (ix+1)*res) x [origin.y + iy*res, ...).
// Row iy of the PGM raster is cell row iy (no vertical flip).
class OccupancyGrid {
 public:
  OccupancyGrid(int width_cells, int height_cells, double resolution,
                Point2 origin = {}, CellState fill = CellState::kFree);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Point2& origin() const { return origin_; }
  double x_length() const { return width_ * resolution_; }
  double y_length() const { return height_ * resolution_; }

  bool InBounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  CellState at(int ix, int iy) const {
    return cells_[static_cast<std::size_t>(iy) * width_ + ix];
  }
  void set(int ix, int iy, CellState state) {
    cells_[static_cast<std::size_t>(iy) * width_ + ix] = state;
  }
  // Unknown and out-of-map cells block rays like occupied ones.
  bool Blocks(int ix, int iy) const {
    return !InBounds(ix, iy) || at(ix, iy) != CellState::kFree;
  }

  std::optional<CellIndex> WorldToCell(double x, double y) const;
  bool IsFreeAt(double x, double y) const;
  std::size_t Count(CellState state) const;

  // FNV-1a over geometry and cell states; keys per-map caches.
  std::uint64_t Hash() const;

  const std::vector<CellState>& cells() const { return cells_; }
  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_;
  int height_;
  double resolution_;
  Point2 origin_;
  std::vector<CellState> cells_;
};

struct PoseIndex {
  int i = 0;  // x bin
  int j = 0;  // y bin
  int k = 0;  // theta bin
  bool operator==(const PoseIndex&) const = default;
};

// Discretization of the pose space into h x w x k bins. Bin (i, j, k) is
// centered at origin + (i*x_len/h, j*y_len/w, k*2*pi/k).
struct PoseGridSpec {
  int h = 1;
  int w = 1;
  int k = 1;
  double x_len = 1.0;
  double y_len = 1.0;
  Point2 origin;

  double dx() const { return x_len / h; }
  double dy() const { return y_len / w; }
  double dtheta() const { return kTwoPi / k; }
  std::size_t size() const {
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
           static_cast<std::size_t>(k);
  }
  std::size_t Flatten(const PoseIndex& idx) const {
    return (static_cast<std::size_t>(idx.i) * w + idx.j) * k + idx.k;
  }
  PoseIndex Unflatten(std::size_t flat) const {
    const int kk = static_cast<int>(flat % k);
    flat /= k;
    return {static_cast<int>(flat / w), static_cast<int>(flat % w), kk};
  }
  bool Contains(const PoseIndex& idx) const {
    return idx.i >= 0 && idx.j >= 0 && idx.k >= 0 && idx.i < h && idx.j < w &&
           idx.k < k;
  }
  void Validate() const;
  bool operator==(const PoseGridSpec&) const = default;
};

// One pose bin per 4x4 cells, 16 heading bins.
PoseGridSpec DefaultPoseGridSpec(const OccupancyGrid& grid, int k_bins = 16);

// Nearest bin. Poses in the last half bin of the extent map to the last bin.
PoseIndex PoseToCell(const Pose& pose, const PoseGridSpec& spec);
Pose CellToPose(const PoseIndex& index, const PoseGridSpec& spec);

// Position bins whose center lies in a free cell.
std::vector<PoseIndex> FreePositionBins(const OccupancyGrid& grid,
                                        const PoseGridSpec& spec);

OccupancyGrid LoadMap(const std::string& pgm_path,
                      const std::string& meta_path);
void SaveMap(const OccupancyGrid& grid, const std::string& pgm_path,
             const std::string& meta_path);

// Parses an 8-bit binary PGM (P5) from memory.
OccupancyGrid ParsePgm(const std::string& bytes, double resolution,
                       Point2 origin);

struct SizeRange {
  double min = 0.4;
  double max = 1.2;
};

// Places `count` axis-aligned occupied rectangles on free cells. Cells set in
// `keep_free` (row-major, same shape as the grid) are never covered.
OccupancyGrid AddRandomObstacles(const OccupancyGrid& grid,
                                 std::uint64_t rng_seed, int count,
                                 SizeRange size_range,
                                 const std::vector<bool>* keep_free = nullptr);

struct IndoorMapParams {
  double size_m = 40.0;
  double resolution = 0.2;
  int rooms_per_side = 4;
  double wall_thickness = 0.4;
  double door_width = 1.6;
  int pillars = 24;
  double pillar_size = 0.8;
};

// Office-like map: outer walls, a grid of rooms with randomly placed
// doorways and some rooms merged, plus scattered pillars.
OccupancyGrid MakeIndoorMap(const IndoorMapParams& params,
                            std::uint64_t seed);

}  // namespace samloc

#endif  // SAMLOC_WORLD_H_
