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

#include "samloc/world.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "samloc/error.h"
#include "test_util.h"

namespace samloc {
namespace {

using testing::CodeOf;
using testing::TempDir;
using testing::WriteFile;

std::string Pgm(int w, int h, const std::string& raster,
                const std::string& header_extra = "") {
  return "P5\n" + header_extra + std::to_string(w) + " " + std::to_string(h) +
         "\n255\n" + raster;
}

TEST(AngleTest, NormalizeStaysInHalfOpenRange) {
  EXPECT_DOUBLE_EQ(NormalizeAngle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(NormalizeAngle(kTwoPi), 0.0);
  EXPECT_NEAR(NormalizeAngle(-0.5), kTwoPi - 0.5, 1e-12);
  EXPECT_EQ(NormalizeAngle(-1e-18), 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = NormalizeAngle(u(rng));
    ASSERT_GE(a, 0.0);
    ASSERT_LT(a, kTwoPi);
  }
}

TEST(AngleTest, WrapToPiIsHalfOpenAtMinusPi) {
  EXPECT_NEAR(WrapToPi(std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(WrapToPi(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(WrapToPi(1.5 * std::numbers::pi), -0.5 * std::numbers::pi, 1e-12);
}

TEST(PoseTest, ConstructorNormalizesHeading) {
  const Pose p(1.0, 2.0, -std::numbers::pi / 2);
  EXPECT_NEAR(p.theta, 1.5 * std::numbers::pi, 1e-12);
}

TEST(LoadMapTest, AllWhiteMapIsFree) {
  TempDir dir;
  WriteFile(dir.File("m.pgm"), Pgm(4, 4, std::string(16, '\xff')));
  WriteFile(dir.File("m.txt"), "resolution: 0.5\norigin_x: 0\norigin_y: 0\n");
  const OccupancyGrid g = LoadMap(dir.File("m.pgm"), dir.File("m.txt"));
  EXPECT_EQ(g.width(), 4);
  EXPECT_EQ(g.height(), 4);
  EXPECT_EQ(g.Count(CellState::kFree), 16u);
  EXPECT_DOUBLE_EQ(g.x_length(), 2.0);
  EXPECT_DOUBLE_EQ(g.y_length(), 2.0);
}

TEST(LoadMapTest, BlackPixelBecomesOneOccupiedCell) {
  TempDir dir;
  std::string raster(16, '\xff');
  raster[1 * 4 + 2] = '\0';  // column 2, row 1
  WriteFile(dir.File("m.pgm"), Pgm(4, 4, raster, "# made by hand\n"));
  WriteFile(dir.File("m.txt"), "resolution: 0.5\norigin_x: 0\norigin_y: 0\nimage: m.pgm\n");
  const OccupancyGrid g = LoadMap(dir.File("m.pgm"), dir.File("m.txt"));
  EXPECT_EQ(g.Count(CellState::kOccupied), 1u);
  EXPECT_EQ(g.at(2, 1), CellState::kOccupied);
}

TEST(LoadMapTest, GrayLevelsMapToUnknown) {
  const OccupancyGrid g = ParsePgm(Pgm(3, 1, std::string("\xff\xcd\x00", 3)), 1.0, {0, 0});
  EXPECT_EQ(g.at(0, 0), CellState::kFree);
  EXPECT_EQ(g.at(1, 0), CellState::kUnknown);
  EXPECT_EQ(g.at(2, 0), CellState::kOccupied);
}

TEST(LoadMapTest, ZeroResolutionNamesTheKey) {
  TempDir dir;
  WriteFile(dir.File("m.pgm"), Pgm(2, 2, std::string(4, '\xff')));
  WriteFile(dir.File("m.txt"), "resolution: 0\norigin_x: 0\norigin_y: 0\n");
  try {
    LoadMap(dir.File("m.pgm"), dir.File("m.txt"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("resolution"), std::string::npos);
  }
}

TEST(LoadMapTest, MissingKeyNamesTheKey) {
  TempDir dir;
  WriteFile(dir.File("m.pgm"), Pgm(2, 2, std::string(4, '\xff')));
  WriteFile(dir.File("m.txt"), "resolution: 0.1\norigin_x: 0\n");
  try {
    LoadMap(dir.File("m.pgm"), dir.File("m.txt"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("origin_y"), std::string::npos);
  }
}

TEST(LoadMapTest, RejectsMalformedPgm) {
  EXPECT_EQ(CodeOf([] { ParsePgm("P2\n1 1\n255\n\xff", 1.0, {0, 0}); }),
            ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([] { ParsePgm(Pgm(4, 4, "\xff\xff"), 1.0, {0, 0}); }),
            ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([] { ParsePgm("P5\n1 1\n65535\n\xff\xff", 1.0, {0, 0}); }),
            ErrorCode::kFormat);
}

TEST(LoadMapTest, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { LoadMap("/nonexistent/m.pgm", "/nonexistent/m.txt"); }),
            ErrorCode::kIo);
}

TEST(SaveMapTest, RoundTrips) {
  TempDir dir;
  OccupancyGrid g = MakeIndoorMap(IndoorMapParams{}, 5);
  g.set(3, 3, CellState::kUnknown);
  OccupancyGrid shifted(g.width(), g.height(), g.resolution(), {-1.25, 3.5});
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) shifted.set(x, y, g.at(x, y));
  }
  SaveMap(shifted, dir.File("m.pgm"), dir.File("m.txt"));
  EXPECT_EQ(LoadMap(dir.File("m.pgm"), dir.File("m.txt")), shifted);
}

PoseGridSpec Spec(int h, int w, int k, double x_len, double y_len,
                  Point2 origin = {0.0, 0.0}) {
  PoseGridSpec s;
  s.h = h;
  s.w = w;
  s.k = k;
  s.x_len = x_len;
  s.y_len = y_len;
  s.origin = origin;
  return s;
}

TEST(PoseGridTest, BinCenterMapsToItsIndex) {
  const PoseGridSpec spec = Spec(10, 10, 16, 10.0, 10.0);
  const Pose p = CellToPose({3, 5, 0}, spec);
  EXPECT_EQ(PoseToCell(p, spec), (PoseIndex{3, 5, 0}));
}

TEST(PoseGridTest, HeadingJustBelowTwoPiWrapsToBinZero) {
  const PoseGridSpec spec = Spec(4, 4, 16, 4.0, 4.0);
  const double eps = 0.5 * std::numbers::pi / 16;  // < pi/16
  EXPECT_EQ(PoseToCell(Pose(1.0, 1.0, kTwoPi - eps), spec).k, 0);
  const double wide = 1.5 * std::numbers::pi / 16;  // > pi/16
  EXPECT_EQ(PoseToCell(Pose(1.0, 1.0, kTwoPi - wide), spec).k, 15);
}

TEST(PoseGridTest, RandomPosesRoundTripWithinHalfBin) {
  const PoseGridSpec spec = Spec(12, 9, 16, 6.0, 4.5, {-2.0, 1.0});
  std::mt19937_64 rng(11);
  // Bin 0 is centered on the origin, so the last half bin of the extent has
  // no bin on its far side; stay below it.
  std::uniform_real_distribution<double> ux(0.0, (spec.h - 0.5) * spec.dx());
  std::uniform_real_distribution<double> uy(0.0, (spec.w - 0.5) * spec.dy());
  std::uniform_real_distribution<double> ut(-10.0, 10.0);
  for (int n = 0; n < 10000; ++n) {
    const Pose p(spec.origin.x + ux(rng), spec.origin.y + uy(rng), ut(rng));
    const Pose c = CellToPose(PoseToCell(p, spec), spec);
    ASSERT_LE(std::abs(c.x - p.x), spec.dx() / 2 + 1e-12);
    ASSERT_LE(std::abs(c.y - p.y), spec.dy() / 2 + 1e-12);
    ASSERT_LE(std::abs(WrapToPi(c.theta - p.theta)), spec.dtheta() / 2 + 1e-12);
  }
}

TEST(PoseGridTest, EveryIndexRoundTrips) {
  const PoseGridSpec spec = Spec(7, 5, 8, 3.5, 2.5, {1.0, -1.0});
  for (int i = 0; i < spec.h; ++i) {
    for (int j = 0; j < spec.w; ++j) {
      for (int k = 0; k < spec.k; ++k) {
        const PoseIndex idx{i, j, k};
        ASSERT_EQ(PoseToCell(CellToPose(idx, spec), spec), idx);
        ASSERT_EQ(spec.Unflatten(spec.Flatten(idx)), idx);
      }
    }
  }
}

TEST(PoseGridTest, CellToPoseCornersAndMidpoint) {
  const PoseGridSpec spec = Spec(10, 8, 16, 5.0, 4.0, {2.0, 3.0});
  const Pose zero = CellToPose({0, 0, 0}, spec);
  EXPECT_DOUBLE_EQ(zero.x, 2.0);
  EXPECT_DOUBLE_EQ(zero.y, 3.0);
  EXPECT_DOUBLE_EQ(zero.theta, 0.0);
  const Pose far = CellToPose({9, 7, 15}, spec);
  EXPECT_DOUBLE_EQ(far.x, 2.0 + 9 * 5.0 / 10);
  EXPECT_DOUBLE_EQ(far.y, 3.0 + 7 * 4.0 / 8);
  EXPECT_DOUBLE_EQ(far.theta, 15 * kTwoPi / 16);
  const Pose mid = CellToPose({4, 3, 5}, spec);
  EXPECT_DOUBLE_EQ(mid.x, 2.0 + 4 * 0.5);
  EXPECT_DOUBLE_EQ(mid.y, 3.0 + 3 * 0.5);
  EXPECT_DOUBLE_EQ(mid.theta, 5 * kTwoPi / 16);
}

TEST(PoseGridTest, OutOfRangeInputsAreRejected) {
  const PoseGridSpec spec = Spec(4, 4, 4, 4.0, 4.0);
  EXPECT_EQ(CodeOf([&] { PoseToCell(Pose(-0.1, 1.0, 0.0), spec); }),
            ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { PoseToCell(Pose(1.0, 4.0, 0.0), spec); }),
            ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { CellToPose({4, 0, 0}, spec); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { CellToPose({0, 0, -1}, spec); }), ErrorCode::kOutOfRange);
}

TEST(PoseGridTest, DefaultSpecUsesFourCellBins) {
  const OccupancyGrid g(40, 40, 0.25, {1.0, 2.0});
  const PoseGridSpec spec = DefaultPoseGridSpec(g);
  EXPECT_EQ(spec.h, 10);
  EXPECT_EQ(spec.w, 10);
  EXPECT_EQ(spec.k, 16);
  EXPECT_DOUBLE_EQ(spec.dx(), 1.0);
  EXPECT_EQ(spec.origin, (Point2{1.0, 2.0}));
}

TEST(ObstacleTest, ZeroCountIsIdentity) {
  const OccupancyGrid g = testing::WalledGrid(30, 30, 0.1);
  EXPECT_EQ(AddRandomObstacles(g, 1, 0, {}), g);
}

TEST(ObstacleTest, SameSeedIsBitIdentical) {
  const OccupancyGrid g(100, 100, 0.1);
  EXPECT_EQ(AddRandomObstacles(g, 9, 5, {}), AddRandomObstacles(g, 9, 5, {}));
  EXPECT_NE(AddRandomObstacles(g, 9, 5, {}).Hash(),
            AddRandomObstacles(g, 10, 5, {}).Hash());
}

// Patches never overlap, so the occupied count grows by the sum of their
// areas; recover the patches as connected components and compare.
TEST(ObstacleTest, OccupiedCountGrowsByPatchAreas) {
  const OccupancyGrid g(100, 100, 0.1);
  const SizeRange size{0.4, 1.2};
  const OccupancyGrid out = AddRandomObstacles(g, 21, 5, size);
  const std::size_t added = out.Count(CellState::kOccupied);
  // Each patch side is 4..12 cells.
  EXPECT_GE(added, 5u * 16u);
  EXPECT_LE(added, 5u * 144u);
  std::vector<bool> seen(out.cells().size(), false);
  std::size_t area_sum = 0;
  int patches = 0;
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      if (out.at(x, y) != CellState::kOccupied || seen[y * 100 + x]) continue;
      // Bounding box of the 4-connected component.
      std::vector<CellIndex> stack{{x, y}};
      seen[y * 100 + x] = true;
      std::size_t area = 0;
      while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        ++area;
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nb) {
          const int nx = c.x + d[0];
          const int ny = c.y + d[1];
          if (!out.InBounds(nx, ny) || seen[ny * 100 + nx] ||
              out.at(nx, ny) != CellState::kOccupied) {
            continue;
          }
          seen[ny * 100 + nx] = true;
          stack.push_back({nx, ny});
        }
      }
      area_sum += area;
      ++patches;
    }
  }
  EXPECT_EQ(area_sum, added);
  // Touching patches merge into one component.
  EXPECT_LE(patches, 5);
  EXPECT_GE(patches, 1);
}

TEST(ObstacleTest, NeverFreesOccupiedCellsAndRespectsMask) {
  const OccupancyGrid g = MakeIndoorMap(IndoorMapParams{}, 3);
  std::vector<bool> keep(g.cells().size(), false);
  for (int y = 50; y < 150; ++y) {
    for (int x = 50; x < 150; ++x) keep[y * g.width() + x] = true;
  }
  const OccupancyGrid out = AddRandomObstacles(g, 4, 30, {}, &keep);
  for (std::size_t i = 0; i < g.cells().size(); ++i) {
    if (g.cells()[i] != CellState::kFree) ASSERT_EQ(out.cells()[i], g.cells()[i]);
    if (keep[i]) ASSERT_EQ(out.cells()[i], g.cells()[i]);
  }
  EXPECT_GT(out.Count(CellState::kOccupied), g.Count(CellState::kOccupied));
}

TEST(ObstacleTest, ImpossiblePlacementFails) {
  const OccupancyGrid g(3, 3, 0.1);
  EXPECT_EQ(CodeOf([&] { AddRandomObstacles(g, 1, 2, {1.0, 2.0}); }),
            ErrorCode::kState);
  EXPECT_EQ(CodeOf([&] { AddRandomObstacles(g, 1, -1, {}); }),
            ErrorCode::kInvalidArgument);
}

TEST(IndoorMapTest, DeterministicWithWallsAndFreeSpace) {
  const OccupancyGrid a = MakeIndoorMap(IndoorMapParams{}, 1);
  const OccupancyGrid b = MakeIndoorMap(IndoorMapParams{}, 1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.width(), 200);
  EXPECT_EQ(a.at(0, 0), CellState::kOccupied);
  EXPECT_EQ(a.at(199, 199), CellState::kOccupied);
  const double free_fraction =
      static_cast<double>(a.Count(CellState::kFree)) / a.cells().size();
  EXPECT_GT(free_fraction, 0.6);
  EXPECT_LT(free_fraction, 0.97);
  EXPECT_NE(a, MakeIndoorMap(IndoorMapParams{}, 2));
}

TEST(IndoorMapTest, FreeSpaceIsConnected) {
  const OccupancyGrid g = MakeIndoorMap(IndoorMapParams{}, 8);
  std::vector<bool> seen(g.cells().size(), false);
  int sx = -1;
  int sy = -1;
  for (int i = 0; i < static_cast<int>(g.cells().size()) && sx < 0; ++i) {
    if (g.cells()[i] == CellState::kFree) {
      sx = i % g.width();
      sy = i / g.width();
    }
  }
  std::vector<CellIndex> stack{{sx, sy}};
  seen[sy * g.width() + sx] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    ++reached;
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : nb) {
      const int nx = c.x + d[0];
      const int ny = c.y + d[1];
      if (!g.InBounds(nx, ny) || g.at(nx, ny) != CellState::kFree) continue;
      if (seen[ny * g.width() + nx]) continue;
      seen[ny * g.width() + nx] = true;
      stack.push_back({nx, ny});
    }
  }
  EXPECT_EQ(reached, g.Count(CellState::kFree));
}

TEST(GridTest, WorldToCellAndBlocks) {
  const OccupancyGrid g = testing::WalledGrid(10, 10, 0.5);
  EXPECT_EQ(g.WorldToCell(0.75, 1.25), (CellIndex{1, 2}));
  EXPECT_FALSE(g.WorldToCell(-0.01, 1.0).has_value());
  EXPECT_FALSE(g.WorldToCell(5.0, 1.0).has_value());
  EXPECT_TRUE(g.Blocks(-1, 3));
  EXPECT_TRUE(g.Blocks(0, 3));
  EXPECT_FALSE(g.Blocks(1, 3));
  EXPECT_TRUE(g.IsFreeAt(1.0, 1.0));
  EXPECT_FALSE(g.IsFreeAt(0.2, 1.0));
}

TEST(GridTest, InvalidConstructionThrows) {
  EXPECT_EQ(CodeOf([] { OccupancyGrid(0, 1, 1.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { OccupancyGrid(1, 1, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(GridTest, FreePositionBinsSkipOccupiedCenters) {
  const OccupancyGrid g = testing::WalledGrid(8, 8, 1.0);
  PoseGridSpec spec = DefaultPoseGridSpec(g, 4);  // 2x2 bins, centers at 0 and 4 m
  const auto bins = FreePositionBins(g, spec);
  // (0,0), (0,1), (1,0) centers lie on the wall; (1,1) is at (4,4).
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_EQ(bins[0], (PoseIndex{1, 1, 0}));
}

}  // namespace
}  // namespace samloc
