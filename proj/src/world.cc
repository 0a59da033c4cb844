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

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "samloc/error.h"

namespace samloc {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kOutOfRange:
      return "out of range";
    case ErrorCode::kFormat:
      return "format error";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kNotFound:
      return "not found";
    case ErrorCode::kShape:
      return "shape mismatch";
    case ErrorCode::kState:
      return "invalid state";
    case ErrorCode::kConfig:
      return "config error";
  }
  return "unknown error";
}

double NormalizeAngle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double WrapToPi(double angle) {
  double a = NormalizeAngle(angle);
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

OccupancyGrid::OccupancyGrid(int width_cells, int height_cells,
                             double resolution, Point2 origin, CellState fill)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution),
      origin_(origin) {
  if (width_cells <= 0 || height_cells <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid dimensions must be positive");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidArgument, "resolution must be positive");
  }
  cells_.assign(static_cast<std::size_t>(width_) * height_, fill);
}

std::optional<CellIndex> OccupancyGrid::WorldToCell(double x, double y) const {
  const double fx = (x - origin_.x) / resolution_;
  const double fy = (y - origin_.y) / resolution_;
  if (!(fx >= 0.0) || !(fy >= 0.0)) return std::nullopt;
  const int ix = static_cast<int>(fx);
  const int iy = static_cast<int>(fy);
  if (!InBounds(ix, iy)) return std::nullopt;
  return CellIndex{ix, iy};
}

bool OccupancyGrid::IsFreeAt(double x, double y) const {
  const auto cell = WorldToCell(x, y);
  return cell && at(cell->x, cell->y) == CellState::kFree;
}

std::size_t OccupancyGrid::Count(CellState state) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), state));
}

std::uint64_t OccupancyGrid::Hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(&width_, sizeof width_);
  mix(&height_, sizeof height_);
  mix(&resolution_, sizeof resolution_);
  mix(&origin_.x, sizeof origin_.x);
  mix(&origin_.y, sizeof origin_.y);
  mix(cells_.data(), cells_.size());
  return h;
}

void PoseGridSpec::Validate() const {
  if (h < 1 || w < 1 || k < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "pose grid bin counts must be >= 1");
  }
  if (!(x_len > 0.0) || !(y_len > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "pose grid extent must be positive");
  }
}

PoseGridSpec DefaultPoseGridSpec(const OccupancyGrid& grid, int k_bins) {
  PoseGridSpec spec;
  spec.h = std::max(1, grid.width() / 4);
  spec.w = std::max(1, grid.height() / 4);
  spec.k = k_bins;
  spec.x_len = grid.x_length();
  spec.y_len = grid.y_length();
  spec.origin = grid.origin();
  return spec;
}

PoseIndex PoseToCell(const Pose& pose, const PoseGridSpec& spec) {
  const double rx = pose.x - spec.origin.x;
  const double ry = pose.y - spec.origin.y;
  if (!(rx >= 0.0 && rx < spec.x_len && ry >= 0.0 && ry < spec.y_len)) {
    std::ostringstream msg;
    msg << "pose (" << pose.x << ", " << pose.y << ") outside pose grid extent";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  PoseIndex idx;
  idx.i = std::min(spec.h - 1, static_cast<int>(std::lround(rx / spec.dx())));
  idx.j = std::min(spec.w - 1, static_cast<int>(std::lround(ry / spec.dy())));
  idx.k = static_cast<int>(std::lround(NormalizeAngle(pose.theta) / spec.dtheta())) %
          spec.k;
  return idx;
}

Pose CellToPose(const PoseIndex& index, const PoseGridSpec& spec) {
  if (!spec.Contains(index)) {
    std::ostringstream msg;
    msg << "pose index (" << index.i << ", " << index.j << ", " << index.k
        << ") outside " << spec.h << "x" << spec.w << "x" << spec.k;
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  return Pose(spec.origin.x + index.i * spec.x_len / spec.h,
              spec.origin.y + index.j * spec.y_len / spec.w,
              index.k * kTwoPi / spec.k);
}

std::vector<PoseIndex> FreePositionBins(const OccupancyGrid& grid,
                                        const PoseGridSpec& spec) {
  std::vector<PoseIndex> bins;
  for (int i = 0; i < spec.h; ++i) {
    for (int j = 0; j < spec.w; ++j) {
      const Pose center = CellToPose({i, j, 0}, spec);
      if (grid.IsFreeAt(center.x, center.y)) bins.push_back({i, j, 0});
    }
  }
  return bins;
}

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string NextPgmToken(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    ++pos;
  }
  return bytes.substr(start, pos - start);
}

int ParsePgmInt(const std::string& token, const char* field) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || *end != '\0' || v <= 0 || v > (1 << 20)) {
    throw Error(ErrorCode::kFormat,
                std::string("malformed PGM header field: ") + field);
  }
  return static_cast<int>(v);
}

double ParseMetaNumber(const std::map<std::string, std::string>& kv,
                       const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw Error(ErrorCode::kFormat, "map metadata missing key: " + key);
  }
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (it->second.empty() || *end != '\0' || !std::isfinite(v)) {
    throw Error(ErrorCode::kFormat, "map metadata key not numeric: " + key);
  }
  return v;
}

std::string Trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

OccupancyGrid ParsePgm(const std::string& bytes, double resolution,
                       Point2 origin) {
  std::size_t pos = 0;
  if (NextPgmToken(bytes, pos) != "P5") {
    throw Error(ErrorCode::kFormat, "malformed PGM: expected magic P5");
  }
  const int width = ParsePgmInt(NextPgmToken(bytes, pos), "width");
  const int height = ParsePgmInt(NextPgmToken(bytes, pos), "height");
  const int maxval = ParsePgmInt(NextPgmToken(bytes, pos), "maxval");
  if (maxval > 255) {
    throw Error(ErrorCode::kFormat, "malformed PGM: only 8-bit supported");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size()) {
    throw Error(ErrorCode::kFormat, "malformed PGM: truncated header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < n) {
    throw Error(ErrorCode::kFormat, "malformed PGM: truncated raster");
  }
  OccupancyGrid grid(width, height, resolution, origin);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int raw = static_cast<unsigned char>(
          bytes[pos + static_cast<std::size_t>(y) * width + x]);
      const int v = raw * 255 / maxval;
      CellState s = CellState::kUnknown;
      if (v >= 250) {
        s = CellState::kFree;
      } else if (v <= 50) {
        s = CellState::kOccupied;
      }
      grid.set(x, y, s);
    }
  }
  return grid;
}

OccupancyGrid LoadMap(const std::string& pgm_path,
                      const std::string& meta_path) {
  std::map<std::string, std::string> kv;
  {
    std::istringstream meta(ReadFile(meta_path));
    std::string line;
    while (std::getline(meta, line)) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      kv[Trim(line.substr(0, colon))] = Trim(line.substr(colon + 1));
    }
  }
  const double resolution = ParseMetaNumber(kv, "resolution");
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kFormat,
                "map metadata key resolution must be positive");
  }
  const Point2 origin{ParseMetaNumber(kv, "origin_x"),
                      ParseMetaNumber(kv, "origin_y")};
  return ParsePgm(ReadFile(pgm_path), resolution, origin);
}

void SaveMap(const OccupancyGrid& grid, const std::string& pgm_path,
             const std::string& meta_path) {
  {
    std::ofstream out(pgm_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + pgm_path);
    out << "P5\n" << grid.width() << " " << grid.height() << "\n255\n";
    std::string raster(static_cast<std::size_t>(grid.width()) * grid.height(),
                       '\0');
    for (std::size_t i = 0; i < raster.size(); ++i) {
      switch (grid.cells()[i]) {
        case CellState::kFree:
          raster[i] = static_cast<char>(254);
          break;
        case CellState::kOccupied:
          raster[i] = 0;
          break;
        case CellState::kUnknown:
          raster[i] = static_cast<char>(205);
          break;
      }
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + pgm_path);
  }
  std::ofstream meta(meta_path);
  if (!meta) throw Error(ErrorCode::kIo, "cannot write " + meta_path);
  // Shortest representation that parses back to the same double.
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  meta << "resolution: " << num(grid.resolution()) << "\n"
       << "origin_x: " << num(grid.origin().x) << "\n"
       << "origin_y: " << num(grid.origin().y) << "\n";
}

OccupancyGrid AddRandomObstacles(const OccupancyGrid& grid,
                                 std::uint64_t rng_seed, int count,
                                 SizeRange size_range,
                                 const std::vector<bool>* keep_free) {
  if (count < 0) {
    throw Error(ErrorCode::kInvalidArgument, "obstacle count must be >= 0");
  }
  if (!(size_range.min > 0.0) || size_range.max < size_range.min) {
    throw Error(ErrorCode::kInvalidArgument, "invalid obstacle size range");
  }
  if (keep_free != nullptr && keep_free->size() != grid.cells().size()) {
    throw Error(ErrorCode::kShape, "keep_free mask does not match grid");
  }
  OccupancyGrid out = grid;
  if (count == 0) return out;

  Rng rng(rng_seed);
  std::uniform_real_distribution<double> side(size_range.min, size_range.max);
  std::uniform_int_distribution<int> px(0, grid.width() - 1);
  std::uniform_int_distribution<int> py(0, grid.height() - 1);
  const double res = grid.resolution();

  int placed = 0;
  const long max_attempts = 100L * count;
  for (long attempt = 0; attempt < max_attempts && placed < count; ++attempt) {
    const int sx = std::max(1, static_cast<int>(std::lround(side(rng) / res)));
    const int sy = std::max(1, static_cast<int>(std::lround(side(rng) / res)));
    const int x0 = px(rng);
    const int y0 = py(rng);
    if (x0 + sx > grid.width() || y0 + sy > grid.height()) continue;
    bool ok = true;
    for (int y = y0; y < y0 + sy && ok; ++y) {
      for (int x = x0; x < x0 + sx; ++x) {
        const std::size_t flat = static_cast<std::size_t>(y) * grid.width() + x;
        if (out.at(x, y) != CellState::kFree ||
            (keep_free != nullptr && (*keep_free)[flat])) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    for (int y = y0; y < y0 + sy; ++y) {
      for (int x = x0; x < x0 + sx; ++x) out.set(x, y, CellState::kOccupied);
    }
    ++placed;
  }
  if (placed < count) {
    std::ostringstream msg;
    msg << "placed only " << placed << " of " << count
        << " obstacles after " << max_attempts << " attempts";
    throw Error(ErrorCode::kState, msg.str());
  }
  return out;
}

OccupancyGrid MakeIndoorMap(const IndoorMapParams& params, std::uint64_t seed) {
  if (!(params.size_m > 0.0) || !(params.resolution > 0.0) ||
      params.rooms_per_side < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid indoor map parameters");
  }
  const double res = params.resolution;
  const int n = static_cast<int>(std::lround(params.size_m / res));
  const int wall = std::max(1, static_cast<int>(std::lround(params.wall_thickness / res)));
  const int door = std::max(1, static_cast<int>(std::lround(params.door_width / res)));
  OccupancyGrid grid(n, n, res);
  Rng rng(seed);
  auto fill = [&](int x0, int y0, int x1, int y1, CellState s) {
    for (int y = std::max(0, y0); y < std::min(n, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(n, x1); ++x) grid.set(x, y, s);
    }
  };

  fill(0, 0, n, wall, CellState::kOccupied);
  fill(0, n - wall, n, n, CellState::kOccupied);
  fill(0, 0, wall, n, CellState::kOccupied);
  fill(n - wall, 0, n, n, CellState::kOccupied);

  // Interior wall lines, jittered so that rooms differ in size.
  const int r = params.rooms_per_side;
  const int room = n / r;
  std::uniform_int_distribution<int> jitter(-room / 8, room / 8);
  std::vector<int> lines{0};
  for (int m = 1; m < r; ++m) lines.push_back(m * room + jitter(rng));
  lines.push_back(n);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Vertical walls at lines[m] between rows lines[q]..lines[q+1].
  for (int m = 1; m < r; ++m) {
    for (int q = 0; q < r; ++q) {
      const int y0 = lines[q];
      const int y1 = lines[q + 1];
      if (unit(rng) < 0.15) continue;  // merged rooms
      const int x = lines[m] - wall / 2;
      fill(x, y0, x + wall, y1, CellState::kOccupied);
      const int span = y1 - y0 - door - 2 * wall;
      if (span > 0) {
        const int d = y0 + wall + std::uniform_int_distribution<int>(0, span)(rng);
        fill(x, d, x + wall, d + door, CellState::kFree);
      }
    }
  }
  for (int m = 1; m < r; ++m) {
    for (int q = 0; q < r; ++q) {
      const int x0 = lines[q];
      const int x1 = lines[q + 1];
      if (unit(rng) < 0.15) continue;
      const int y = lines[m] - wall / 2;
      fill(x0, y, x1, y + wall, CellState::kOccupied);
      const int span = x1 - x0 - door - 2 * wall;
      if (span > 0) {
        const int d = x0 + wall + std::uniform_int_distribution<int>(0, span)(rng);
        fill(d, y, d + door, y + wall, CellState::kFree);
      }
    }
  }

  // Pillars keep a clearance ring so they never seal a doorway.
  const int pillar = std::max(1, static_cast<int>(std::lround(params.pillar_size / res)));
  const int clearance = door;
  std::uniform_int_distribution<int> pos(0, n - 1);
  int placed = 0;
  for (int attempt = 0; attempt < 200 * std::max(1, params.pillars) &&
                        placed < params.pillars;
       ++attempt) {
    const int x0 = pos(rng);
    const int y0 = pos(rng);
    bool ok = true;
    for (int y = y0 - clearance; y < y0 + pillar + clearance && ok; ++y) {
      for (int x = x0 - clearance; x < x0 + pillar + clearance; ++x) {
        if (grid.Blocks(x, y)) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    fill(x0, y0, x0 + pillar, y0 + pillar, CellState::kOccupied);
    ++placed;
  }
  return grid;
}

}  // namespace samloc
