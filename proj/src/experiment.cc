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

#include "samloc/experiment.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "samloc/error.h"
#include "samloc/pm.h"

namespace samloc {

namespace {

[[noreturn]] void ConfigError(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double ParseDouble(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    ConfigError("`" + key + "` expects a number, got `" + value + "`");
  }
  return out;
}

std::int64_t ParseInt(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    ConfigError("`" + key + "` expects an integer, got `" + value + "`");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  ConfigError("`" + key + "` expects true or false, got `" + value + "`");
}

int ParseCount(const std::string& key, const std::string& value) {
  const std::int64_t v = ParseInt(key, value);
  if (v < -1 || v > 100000000) ConfigError("`" + key + "` is out of range");
  return static_cast<int>(v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&,
                                  const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  auto str = [](std::string ExperimentConfig::*field) {
    return [field](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.*field = v;
    };
  };
  auto num = [](auto getter) {
    return [getter](ExperimentConfig& c, const std::string& k, const std::string& v) {
      getter(c) = ParseDouble(k, v);
    };
  };
  auto count = [](auto getter) {
    return [getter](ExperimentConfig& c, const std::string& k, const std::string& v) {
      getter(c) = ParseCount(k, v);
    };
  };
  static const std::map<std::string, Setter> setters = {
      {"map", str(&ExperimentConfig::map)},
      {"meta", str(&ExperimentConfig::meta)},
      {"log", str(&ExperimentConfig::log)},
      {"out", str(&ExperimentConfig::out)},
      {"model", str(&ExperimentConfig::model)},
      {"filter",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         try {
           c.filter.algorithm = ParseFilterAlgorithm(v);
         } catch (const Error& e) {
           ConfigError(e.what());
         }
       }},
      {"particles", count([](ExperimentConfig& c) -> int& { return c.filter.n_particles; })},
      {"tcut", num([](ExperimentConfig& c) -> double& { return c.filter.t_cut; })},
      {"mixture_p", num([](ExperimentConfig& c) -> double& { return c.filter.mixture_p; })},
      {"random_rate", num([](ExperimentConfig& c) -> double& { return c.filter.random_rate; })},
      {"seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const std::int64_t s = ParseInt(k, v);
         if (s < 0) ConfigError("`seed` must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"repeat", count([](ExperimentConfig& c) -> int& { return c.repeat; })},
      {"workers", count([](ExperimentConfig& c) -> int& { return c.workers; })},
      {"record_timing",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.record_timing = ParseBool(k, v);
       }},
      {"motion_sigma_x", num([](ExperimentConfig& c) -> double& { return c.filter.motion_noise.sigma_x; })},
      {"motion_sigma_y", num([](ExperimentConfig& c) -> double& { return c.filter.motion_noise.sigma_y; })},
      {"motion_sigma_theta", num([](ExperimentConfig& c) -> double& { return c.filter.motion_noise.sigma_theta; })},
      {"range_sigma", num([](ExperimentConfig& c) -> double& { return c.filter.beam.sigma; })},
      {"alpha", num([](ExperimentConfig& c) -> double& { return c.filter.beam.alpha; })},
      {"beta", num([](ExperimentConfig& c) -> double& { return c.filter.beam.beta; })},
      {"exponent", num([](ExperimentConfig& c) -> double& { return c.filter.beam.exponent; })},
      {"beams", count([](ExperimentConfig& c) -> int& { return c.scan.beam_count; })},
      {"fov", num([](ExperimentConfig& c) -> double& { return c.scan.fov; })},
      {"max_range", num([](ExperimentConfig& c) -> double& { return c.scan.max_range; })},
      {"angle_offset", num([](ExperimentConfig& c) -> double& { return c.scan.angle_offset; })},
      {"bins_x", count([](ExperimentConfig& c) -> int& { return c.bins_x; })},
      {"bins_y", count([](ExperimentConfig& c) -> int& { return c.bins_y; })},
      {"bins_theta", count([](ExperimentConfig& c) -> int& { return c.bins_theta; })},
      {"temperature", num([](ExperimentConfig& c) -> double& { return c.temperature; })},
      {"dual_q", count([](ExperimentConfig& c) -> int& { return c.dual_q; })},
      {"map_size", num([](ExperimentConfig& c) -> double& { return c.indoor.size_m; })},
      {"map_resolution", num([](ExperimentConfig& c) -> double& { return c.indoor.resolution; })},
      {"rooms_per_side", count([](ExperimentConfig& c) -> int& { return c.indoor.rooms_per_side; })},
      {"pillars", count([](ExperimentConfig& c) -> int& { return c.indoor.pillars; })},
      {"waypoints", count([](ExperimentConfig& c) -> int& { return c.waypoints; })},
      {"step_size", num([](ExperimentConfig& c) -> double& { return c.step_size; })},
      {"kidnap_at", count([](ExperimentConfig& c) -> int& { return c.kidnap_at; })},
      {"obstacles", count([](ExperimentConfig& c) -> int& { return c.obstacles; })},
      {"obstacle_min", num([](ExperimentConfig& c) -> double& { return c.obstacle_size.min; })},
      {"obstacle_max", num([](ExperimentConfig& c) -> double& { return c.obstacle_size.max; })},
      {"clearance", num([](ExperimentConfig& c) -> double& { return c.clearance; })},
      {"range_noise", num([](ExperimentConfig& c) -> double& { return c.range_noise; })},
      {"odom_sigma_x", num([](ExperimentConfig& c) -> double& { return c.odom_noise.sigma_x; })},
      {"odom_sigma_y", num([](ExperimentConfig& c) -> double& { return c.odom_noise.sigma_y; })},
      {"odom_sigma_theta", num([](ExperimentConfig& c) -> double& { return c.odom_noise.sigma_theta; })},
  };
  return setters;
}

// Runs `fn`, turning precondition failures into configuration errors.
template <typename Fn>
void AsConfig(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) ConfigError(e.what());
    throw;
  }
}

void RequirePath(const std::string& value, const char* name) {
  if (value.empty()) ConfigError(std::string("`") + name + "` is required");
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

// Experiment-level beam parameters: L_max tracks the sensor.
FilterConfig EffectiveFilter(const ExperimentConfig& config) {
  FilterConfig f = config.filter;
  f.beam.l_max = config.scan.max_range;
  return f;
}

}  // namespace

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  const auto& setters = Setters();
  const auto it = setters.find(key);
  if (it == setters.end()) ConfigError("unknown config key `" + key + "`");
  it->second(*this, key, value);
}

void ExperimentConfig::Validate() const {
  if (repeat < 1) ConfigError("`repeat` must be >= 1");
  if (workers < 1) ConfigError("`workers` must be >= 1");
  if (bins_x < 0 || bins_y < 0) ConfigError("bin counts must be >= 0");
  if (bins_theta < 1) ConfigError("`bins_theta` must be >= 1");
  if (!(temperature > 0.0)) ConfigError("`temperature` must be positive");
  if (dual_q < 1) ConfigError("`dual_q` must be >= 1");
  if (waypoints < 1) ConfigError("`waypoints` must be >= 1");
  if (!(step_size > 0.0)) ConfigError("`step_size` must be positive");
  if (obstacles < 0) ConfigError("`obstacles` must be >= 0");
  if (!(obstacle_size.min > 0.0 && obstacle_size.max >= obstacle_size.min)) {
    ConfigError("obstacle sizes need 0 < obstacle_min <= obstacle_max");
  }
  if (!(clearance >= 0.0)) ConfigError("`clearance` must be >= 0");
  if (!(range_noise >= 0.0)) ConfigError("`range_noise` must be >= 0");
  if (model != "oracle" && model != "dualfeat" && model.rfind("pmdir:", 0) != 0) {
    ConfigError("`model` must be oracle, dualfeat or pmdir:<path>, got `" + model + "`");
  }
  if (model.rfind("pmdir:", 0) == 0 && model.size() == 6) {
    ConfigError("`model` pmdir: needs a directory");
  }
  AsConfig([&] {
    scan.Validate();
    EffectiveFilter(*this).Validate();
    odom_noise.Validate();
  });
}

ExperimentConfig ParseExperimentConfig(std::istream& in, ExperimentConfig base) {
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    text = Trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      ConfigError("config line " + std::to_string(line) + ": expected `key = value`");
    }
    try {
      base.Set(Trim(text.substr(0, eq)), Trim(text.substr(eq + 1)));
    } catch (const Error& e) {
      ConfigError("config line " + std::to_string(line) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig LoadExperimentConfig(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) ConfigError("cannot open config file " + path);
  try {
    return ParseExperimentConfig(in, std::move(base));
  } catch (const Error& e) {
    ConfigError(path + ": " + e.what());
  }
}

PoseGridSpec ExperimentPoseGrid(const ExperimentConfig& config,
                                const OccupancyGrid& grid) {
  PoseGridSpec spec = DefaultPoseGridSpec(grid, config.bins_theta);
  if (config.bins_x > 0) spec.h = config.bins_x;
  if (config.bins_y > 0) spec.w = config.bins_y;
  spec.Validate();
  return spec;
}

std::unique_ptr<SamplableObservationModel> MakeObservationModel(
    const ExperimentConfig& config, const OccupancyGrid& grid,
    const PoseGridSpec& spec) {
  if (config.filter.algorithm == FilterAlgorithm::kMcl) return nullptr;
  if (config.model == "oracle") {
    return std::make_unique<GridMatcher>(grid, spec, config.scan,
                                         EffectiveFilter(config).beam,
                                         config.temperature);
  }
  if (config.model == "dualfeat") {
    return std::make_unique<DualFeatureModel>(grid, spec, config.scan, config.dual_q);
  }
  if (config.model.rfind("pmdir:", 0) == 0) {
    return PmProvider::Load(config.model.substr(6), spec);
  }
  ConfigError("unknown model `" + config.model + "`");
}

RunSummary RunLocalization(const ExperimentConfig& config) {
  config.Validate();
  RequirePath(config.map, "map");
  RequirePath(config.meta, "meta");
  RequirePath(config.log, "log");
  RequirePath(config.out, "out");

  const OccupancyGrid grid = LoadMap(config.map, config.meta);
  const std::vector<EpisodeRecord> log = ReadEpisodeLog(config.log);
  const PoseGridSpec spec = ExperimentPoseGrid(config, grid);
  const auto model = MakeObservationModel(config, grid, spec);
  EnsureDirectory(config.out);

  EpisodeSetup setup;
  setup.grid = &grid;
  setup.spec = spec;
  setup.scan = config.scan;
  setup.filter = EffectiveFilter(config);
  setup.model = model.get();

  std::vector<EpisodeTrace> traces(static_cast<std::size_t>(config.repeat));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int rep = next++; rep < config.repeat; rep = next++) {
      try {
        EpisodeSetup mine = setup;
        mine.filter.rng_seed = config.seed + static_cast<std::uint64_t>(rep);
        traces[static_cast<std::size_t>(rep)] = RunEpisode(mine, log);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.repeat;
      }
    }
  };
  const int n_workers = std::min(config.workers, config.repeat);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const std::filesystem::path out(config.out);
  for (std::size_t rep = 0; rep < traces.size(); ++rep) {
    WriteTrace(traces[rep], (out / ("trace_" + std::to_string(rep) + ".jsonl")).string(),
               config.record_timing);
  }
  const RunSummary summary = AggregateRuns(traces);
  WriteSummaryCsv(summary, (out / "summary.csv").string());
  WriteRunsCsv(summary, (out / "runs.csv").string());
  return summary;
}

void GenerateMapFiles(const ExperimentConfig& config) {
  config.Validate();
  RequirePath(config.map, "map");
  RequirePath(config.meta, "meta");
  OccupancyGrid grid(1, 1, 1.0, {0.0, 0.0});
  AsConfig([&] { grid = MakeIndoorMap(config.indoor, config.seed); });
  SaveMap(grid, config.map, config.meta);
}

void GenerateLogFile(const ExperimentConfig& config) {
  config.Validate();
  RequirePath(config.map, "map");
  RequirePath(config.meta, "meta");
  RequirePath(config.log, "log");
  const OccupancyGrid grid = LoadMap(config.map, config.meta);
  Rng rng(config.seed);
  PathSpec path;
  path.waypoints = RandomPath(grid, config.waypoints, config.clearance,
                              2.0 * config.step_size, rng);
  std::optional<int> kidnap;
  if (config.kidnap_at >= 0) {
    kidnap = config.kidnap_at;
    path.after_kidnap = RandomPath(grid, config.waypoints, config.clearance,
                                   2.0 * config.step_size, rng);
  }
  path.step = config.step_size;
  path.range_noise = config.range_noise;
  path.odom_noise = config.odom_noise;
  path.obstacles = config.obstacles;
  path.obstacle_size = config.obstacle_size;
  path.obstacle_clearance = config.clearance;
  std::vector<EpisodeRecord> records;
  AsConfig([&] {
    records = GenerateSyntheticEpisode(grid, path, config.scan, kidnap, rng);
  });
  WriteEpisodeLog(records, config.log);
}

void ExportOraclePms(const ExperimentConfig& config) {
  config.Validate();
  RequirePath(config.map, "map");
  RequirePath(config.meta, "meta");
  RequirePath(config.log, "log");
  RequirePath(config.out, "out");
  const OccupancyGrid grid = LoadMap(config.map, config.meta);
  const std::vector<EpisodeRecord> log = ReadEpisodeLog(config.log);
  const PoseGridSpec spec = ExperimentPoseGrid(config, grid);
  const GridMatcher matcher(grid, spec, config.scan, EffectiveFilter(config).beam,
                            config.temperature);
  EnsureDirectory(config.out);
  const std::filesystem::path out(config.out);
  for (const EpisodeRecord& r : log) {
    if (r.ranges.size() != static_cast<std::size_t>(config.scan.beam_count)) {
      throw Error(ErrorCode::kShape, "record t=" + std::to_string(r.t) +
                                         " does not match the scan config");
    }
    Scan scan{r.ranges, config.scan, r.t};
    ProbabilityMap pm = matcher.Infer(scan, grid);
    pm.set_frame_id(r.t);
    WritePmap(pm, (out / PmapFileName(r.t)).string());
  }
}

}  // namespace samloc
