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

#include "samloc/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "samloc/error.h"

namespace samloc {

using nlohmann::json;

namespace {

[[noreturn]] void LineError(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "episode log line " << line << ": " << what;
  throw Error(ErrorCode::kFormat, msg.str());
}

std::array<double, 3> ReadTriple(const json& j, const char* key,
                                 std::size_t line) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    LineError(line, std::string("`") + key + "` must be an array of 3 numbers");
  }
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) LineError(line, std::string("`") + key + "` must be numeric");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

std::vector<EpisodeRecord> ParseEpisodeLog(std::istream& in) {
  std::vector<EpisodeRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      LineError(line, e.what());
    }
    if (!j.is_object()) LineError(line, "record must be a JSON object");
    EpisodeRecord r;
    try {
      if (!j.contains("t") || !j["t"].is_number_integer()) {
        LineError(line, "`t` must be an integer");
      }
      r.t = j["t"].get<std::int64_t>();
      const auto odom = ReadTriple(j, "odom", line);
      r.odom = {odom[0], odom[1], odom[2]};
      const auto& ranges = j.at("ranges");
      if (!ranges.is_array()) LineError(line, "`ranges` must be an array");
      for (const auto& v : ranges) {
        if (!v.is_number()) LineError(line, "`ranges` must be numeric");
        r.ranges.push_back(v.get<double>());
      }
      if (j.contains("gt") && !j["gt"].is_null()) {
        const auto gt = ReadTriple(j, "gt", line);
        r.gt = Pose(gt[0], gt[1], gt[2]);
      }
      if (j.contains("kidnap")) {
        if (!j["kidnap"].is_boolean()) LineError(line, "`kidnap` must be boolean");
        r.kidnap = j["kidnap"].get<bool>();
      }
    } catch (const json::exception& e) {
      LineError(line, e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<EpisodeRecord> ReadEpisodeLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  try {
    return ParseEpisodeLog(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string EpisodeRecordToJson(const EpisodeRecord& record) {
  json j;
  j["t"] = record.t;
  j["odom"] = {record.odom.dx, record.odom.dy, record.odom.dtheta};
  j["ranges"] = record.ranges;
  if (record.gt) j["gt"] = {record.gt->x, record.gt->y, record.gt->theta};
  if (record.kidnap) j["kidnap"] = true;
  return j.dump();
}

void WriteEpisodeLog(const std::vector<EpisodeRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const EpisodeRecord& r : records) out << EpisodeRecordToJson(r) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

double PositionError(const Pose& estimate, const Pose& truth) {
  return std::hypot(estimate.x - truth.x, estimate.y - truth.y);
}

double HeadingError(const Pose& estimate, const Pose& truth) {
  return std::abs(WrapToPi(estimate.theta - truth.theta));
}

EpisodeTrace RunEpisode(const EpisodeSetup& setup,
                        const std::vector<EpisodeRecord>& log) {
  EpisodeTrace trace;
  if (log.empty()) return trace;
  if (setup.grid == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "episode needs a map");
  }
  const OccupancyGrid& grid = *setup.grid;
  ParticleFilter filter(grid, setup.spec, setup.filter, setup.model);
  trace.steps.reserve(log.size());
  for (const EpisodeRecord& record : log) {
    if (record.ranges.size() != static_cast<std::size_t>(setup.scan.beam_count)) {
      std::ostringstream msg;
      msg << "record t=" << record.t << " has " << record.ranges.size()
          << " ranges, scan config expects " << setup.scan.beam_count;
      throw Error(ErrorCode::kShape, msg.str());
    }
    if (record.gt) {
      const double rx = record.gt->x - grid.origin().x;
      const double ry = record.gt->y - grid.origin().y;
      if (rx < 0.0 || ry < 0.0 || rx >= grid.x_length() || ry >= grid.y_length()) {
        std::ostringstream msg;
        msg << "ground truth at t=" << record.t << " is off the map";
        throw Error(ErrorCode::kOutOfRange, msg.str());
      }
    }
    Scan scan;
    scan.ranges = record.ranges;
    scan.config = setup.scan;
    scan.frame_id = record.t;

    const auto start = std::chrono::steady_clock::now();
    const UpdateStats stats = filter.Update(record.odom, scan);
    StepRecord step;
    step.estimate = filter.Estimate();
    const auto stop = std::chrono::steady_clock::now();

    step.t = record.t;
    step.gt = record.gt;
    step.kidnap = record.kidnap;
    step.h_count = stats.h_count;
    step.l_count = stats.l_count;
    step.reinitialized = stats.reinitialized;
    step.pm_fallback = stats.pm_fallback;
    step.wall_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    if (record.gt) {
      step.e_pos = PositionError(step.estimate, *record.gt);
      step.e_theta = HeadingError(step.estimate, *record.gt);
    }
    trace.steps.push_back(step);
  }
  return trace;
}

std::string StepRecordToJson(const StepRecord& step, bool include_timing) {
  json j;
  j["t"] = step.t;
  if (step.gt) j["gt"] = {step.gt->x, step.gt->y, step.gt->theta};
  j["est"] = {step.estimate.x, step.estimate.y, step.estimate.theta};
  j["e_pos"] = step.e_pos;
  j["e_theta"] = step.e_theta;
  j["h"] = step.h_count;
  j["l"] = step.l_count;
  if (step.kidnap) j["kidnap"] = true;
  if (step.reinitialized) j["reinit"] = true;
  if (step.pm_fallback) j["pm_fallback"] = true;
  if (include_timing) j["wall_ms"] = step.wall_ms;
  return j.dump();
}

void WriteTrace(const EpisodeTrace& trace, const std::string& path,
                bool include_timing) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const StepRecord& s : trace.steps) out << StepRecordToJson(s, include_timing) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

Convergence ConvergenceCheck(const EpisodeTrace& trace, std::size_t first,
                             const ConvergenceRule& rule) {
  int run = 0;
  for (std::size_t i = first; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    const bool ok = s.gt.has_value() && s.e_pos < rule.max_e_pos &&
                    s.e_theta < rule.max_e_theta;
    run = ok ? run + 1 : 0;
    if (run >= rule.window) {
      return {true, static_cast<int>(i - first + 1)};
    }
  }
  return {};
}

RunSummary AggregateRuns(const std::vector<EpisodeTrace>& traces,
                         const ConvergenceRule& rule) {
  RunSummary summary;
  if (traces.empty()) return summary;
  std::size_t len = traces.front().steps.size();
  for (const EpisodeTrace& t : traces) {
    if (t.steps.size() != len) summary.truncated = true;
    len = std::min(len, t.steps.size());
  }
  if (summary.truncated) {
    std::cerr << "warning: traces differ in length; truncating to " << len
              << " steps\n";
  }
  const double n = static_cast<double>(traces.size());
  for (std::size_t step = 0; step < len; ++step) {
    double sum = 0.0;
    for (const EpisodeTrace& t : traces) sum += t.steps[step].e_pos;
    const double mean = sum / n;
    double half = 0.0;
    if (traces.size() >= 2) {
      double ss = 0.0;
      for (const EpisodeTrace& t : traces) {
        const double d = t.steps[step].e_pos - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / (n - 1.0));
      half = 1.96 * sd / std::sqrt(n);
    }
    summary.mean_e_pos.push_back(mean);
    summary.ci_lo.push_back(mean - half);
    summary.ci_hi.push_back(mean + half);
  }
  int converged = 0;
  for (const EpisodeTrace& t : traces) {
    const Convergence c = ConvergenceCheck(t, 0, rule);
    summary.runs.push_back(c);
    if (!c.converged) continue;
    ++converged;
    const int bin = c.steps <= 20 ? 0 : c.steps <= 40 ? 1 : c.steps <= 60 ? 2 : 3;
    ++summary.steps_histogram[static_cast<std::size_t>(bin)];
  }
  summary.convergence_rate = converged / n;
  return summary;
}

void WriteSummaryCsv(const RunSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.precision(10);
  out << "step,mean_E_pos,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < summary.mean_e_pos.size(); ++i) {
    out << i << "," << summary.mean_e_pos[i] << "," << summary.ci_lo[i] << ","
        << summary.ci_hi[i] << "\n";
  }
}

void WriteRunsCsv(const RunSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "rep,converged,steps\n";
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    out << i << "," << (summary.runs[i].converged ? 1 : 0) << ",";
    if (summary.runs[i].converged) out << summary.runs[i].steps;
    out << "\n";
  }
}

namespace {

// Cells within `radius` meters (square window) of (x, y) are all free.
bool ClearAround(const OccupancyGrid& grid, double x, double y, double radius) {
  const auto cell = grid.WorldToCell(x, y);
  if (!cell) return false;
  const int r = static_cast<int>(std::ceil(radius / grid.resolution()));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (grid.Blocks(cell->x + dx, cell->y + dy)) return false;
    }
  }
  return true;
}

bool SegmentClear(const OccupancyGrid& grid, const Point2& a, const Point2& b,
                  double radius) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.5 * grid.resolution()))));
  for (int i = 0; i <= n; ++i) {
    const double f = static_cast<double>(i) / n;
    if (!ClearAround(grid, a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), radius)) {
      return false;
    }
  }
  return true;
}

// Ground-truth poses every `step` meters along a polyline.
std::vector<Pose> SamplePolyline(const std::vector<Point2>& pts, double step) {
  std::vector<Pose> poses;
  if (pts.empty()) return poses;
  auto heading = [&](std::size_t seg) {
    return std::atan2(pts[seg + 1].y - pts[seg].y, pts[seg + 1].x - pts[seg].x);
  };
  if (pts.size() == 1) {
    poses.emplace_back(pts[0].x, pts[0].y, 0.0);
    return poses;
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    cumulative.push_back(cumulative.back() +
                         std::hypot(pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y));
  }
  const double total = cumulative.back();
  const int moves = static_cast<int>(std::ceil(total / step - 1e-9));
  poses.emplace_back(pts[0].x, pts[0].y, heading(0));
  std::size_t seg = 0;
  for (int m = 1; m <= moves; ++m) {
    const double s = std::min(total, m * step);
    while (seg + 2 < pts.size() && s > cumulative[seg + 1]) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double f = seg_len > 0.0 ? (s - cumulative[seg]) / seg_len : 0.0;
    poses.emplace_back(pts[seg].x + f * (pts[seg + 1].x - pts[seg].x),
                       pts[seg].y + f * (pts[seg + 1].y - pts[seg].y), heading(seg));
  }
  return poses;
}

Motion OdometryBetween(const Pose& from, const Pose& to) {
  const double c = std::cos(from.theta);
  const double s = std::sin(from.theta);
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  return {c * dx + s * dy, -s * dx + c * dy, WrapToPi(to.theta - from.theta)};
}

double Noise(double sigma, Rng& rng) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace

std::vector<EpisodeRecord> GenerateSyntheticEpisode(
    const OccupancyGrid& grid, const PathSpec& path, const ScanConfig& scan,
    std::optional<int> kidnap_at, Rng& rng) {
  scan.Validate();
  if (!(path.step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "path step must be positive");
  }
  if (path.waypoints.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "path needs at least one waypoint");
  }
  auto check_free = [&](const std::vector<Point2>& pts) {
    for (const Point2& p : pts) {
      if (!grid.IsFreeAt(p.x, p.y)) {
        std::ostringstream msg;
        msg << "waypoint (" << p.x << ", " << p.y << ") is not in free space";
        throw Error(ErrorCode::kInvalidArgument, msg.str());
      }
    }
  };
  check_free(path.waypoints);

  std::vector<Pose> truth = SamplePolyline(path.waypoints, path.step);
  std::size_t kidnap_index = truth.size();
  if (kidnap_at) {
    if (*kidnap_at < 1 || static_cast<std::size_t>(*kidnap_at) >= truth.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "kidnap_at must fall inside the pre-kidnap path");
    }
    if (path.after_kidnap.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "kidnap requested without a second path");
    }
    check_free(path.after_kidnap);
    kidnap_index = static_cast<std::size_t>(*kidnap_at);
    truth.resize(kidnap_index);
    const auto after = SamplePolyline(path.after_kidnap, path.step);
    truth.insert(truth.end(), after.begin(), after.end());
  }
  for (const Pose& p : truth) {
    if (!grid.IsFreeAt(p.x, p.y)) {
      std::ostringstream msg;
      msg << "path passes through occupied space at (" << p.x << ", " << p.y << ")";
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
  }

  OccupancyGrid world = grid;
  if (path.obstacles > 0) {
    std::vector<bool> keep(grid.cells().size(), false);
    const int r = static_cast<int>(std::ceil(path.obstacle_clearance / grid.resolution()));
    for (const Pose& p : truth) {
      const auto c = grid.WorldToCell(p.x, p.y);
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (grid.InBounds(c->x + dx, c->y + dy)) {
            keep[static_cast<std::size_t>(c->y + dy) * grid.width() + c->x + dx] = true;
          }
        }
      }
    }
    world = AddRandomObstacles(grid, rng(), path.obstacles, path.obstacle_size, &keep);
  }

  std::vector<EpisodeRecord> records;
  records.reserve(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    EpisodeRecord r;
    r.t = static_cast<std::int64_t>(t);
    r.gt = truth[t];
    r.kidnap = t == kidnap_index;
    if (t > 0 && !r.kidnap) {
      const Motion m = OdometryBetween(truth[t - 1], truth[t]);
      r.odom = {m.dx + Noise(path.odom_noise.sigma_x, rng),
                m.dy + Noise(path.odom_noise.sigma_y, rng),
                m.dtheta + Noise(path.odom_noise.sigma_theta, rng)};
    }
    r.ranges = SimulateScan(world, truth[t], scan, path.range_noise, rng).ranges;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<Point2> RandomPath(const OccupancyGrid& grid, int waypoints,
                               double clearance, double min_segment, Rng& rng) {
  if (waypoints < 1) {
    throw Error(ErrorCode::kInvalidArgument, "path needs at least one waypoint");
  }
  std::uniform_real_distribution<double> ux(grid.origin().x,
                                            grid.origin().x + grid.x_length());
  std::uniform_real_distribution<double> uy(grid.origin().y,
                                            grid.origin().y + grid.y_length());
  constexpr int kAttempts = 20000;
  std::vector<Point2> pts;
  for (int attempt = 0; attempt < kAttempts && static_cast<int>(pts.size()) < waypoints;
       ++attempt) {
    const Point2 p{ux(rng), uy(rng)};
    if (!ClearAround(grid, p.x, p.y, clearance)) continue;
    if (!pts.empty()) {
      const Point2& prev = pts.back();
      if (std::hypot(p.x - prev.x, p.y - prev.y) < min_segment) continue;
      if (!SegmentClear(grid, prev, p, clearance)) continue;
    }
    pts.push_back(p);
  }
  if (static_cast<int>(pts.size()) < waypoints) {
    throw Error(ErrorCode::kState, "could not find a collision-free random path");
  }
  return pts;
}

}  // namespace samloc
