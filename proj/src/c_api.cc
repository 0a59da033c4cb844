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

#include "samloc/samloc.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "samloc/error.h"
#include "samloc/experiment.h"

struct samloc_config {
  samloc::ExperimentConfig value;
};

struct samloc_grid {
  samloc::OccupancyGrid value;
};

struct samloc_pm {
  samloc::ProbabilityMap value;
};

struct samloc_model {
  const samloc::OccupancyGrid* grid;
  samloc::ScanConfig scan;
  std::unique_ptr<samloc::SamplableObservationModel> model;
};

struct samloc_filter {
  std::unique_ptr<samloc::ParticleFilter> filter;
  samloc::ScanConfig scan;
};

namespace {

thread_local std::string last_error;

samloc_status FromCode(samloc::ErrorCode code) {
  using samloc::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return SAMLOC_ERR_INVALID_ARGUMENT;
    case ErrorCode::kOutOfRange: return SAMLOC_ERR_OUT_OF_RANGE;
    case ErrorCode::kFormat: return SAMLOC_ERR_FORMAT;
    case ErrorCode::kIo: return SAMLOC_ERR_IO;
    case ErrorCode::kNotFound: return SAMLOC_ERR_NOT_FOUND;
    case ErrorCode::kShape: return SAMLOC_ERR_SHAPE;
    case ErrorCode::kState: return SAMLOC_ERR_STATE;
    case ErrorCode::kConfig: return SAMLOC_ERR_CONFIG;
  }
  return SAMLOC_ERR_INTERNAL;
}

samloc_status Fail(samloc_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `fn` and converts any exception into a status.
template <typename Fn>
samloc_status Guard(Fn&& fn) {
  try {
    fn();
    return SAMLOC_OK;
  } catch (const samloc::Error& e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(SAMLOC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(SAMLOC_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(SAMLOC_ERR_INTERNAL, "unknown exception");
  }
}

#define SAMLOC_REQUIRE(ptr)                                              \
  do {                                                                   \
    if ((ptr) == nullptr) {                                              \
      return Fail(SAMLOC_ERR_INVALID_ARGUMENT, #ptr " must not be null"); \
    }                                                                    \
  } while (0)

}  // namespace

extern "C" {

const char* samloc_version(void) { return "0.1.0"; }

const char* samloc_status_name(samloc_status status) {
  switch (status) {
    case SAMLOC_OK: return "ok";
    case SAMLOC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SAMLOC_ERR_OUT_OF_RANGE: return "out of range";
    case SAMLOC_ERR_FORMAT: return "format error";
    case SAMLOC_ERR_IO: return "i/o error";
    case SAMLOC_ERR_NOT_FOUND: return "not found";
    case SAMLOC_ERR_SHAPE: return "shape mismatch";
    case SAMLOC_ERR_STATE: return "invalid state";
    case SAMLOC_ERR_CONFIG: return "config error";
    case SAMLOC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* samloc_last_error(void) { return last_error.c_str(); }

int samloc_exit_code(samloc_status status) {
  if (status == SAMLOC_OK) return 0;
  if (status == SAMLOC_ERR_CONFIG) return 2;
  return 3;
}

samloc_status samloc_config_create(samloc_config** out) {
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] { *out = new samloc_config(); });
}

void samloc_config_destroy(samloc_config* config) { delete config; }

samloc_status samloc_config_load(samloc_config* config, const char* path) {
  SAMLOC_REQUIRE(config);
  SAMLOC_REQUIRE(path);
  return Guard([&] {
    config->value = samloc::LoadExperimentConfig(path, config->value);
  });
}

samloc_status samloc_config_set(samloc_config* config, const char* key,
                                const char* value) {
  SAMLOC_REQUIRE(config);
  SAMLOC_REQUIRE(key);
  SAMLOC_REQUIRE(value);
  return Guard([&] { config->value.Set(key, value); });
}

samloc_status samloc_config_validate(const samloc_config* config) {
  SAMLOC_REQUIRE(config);
  return Guard([&] { config->value.Validate(); });
}

samloc_status samloc_localize(const samloc_config* config,
                              samloc_run_summary* summary) {
  SAMLOC_REQUIRE(config);
  return Guard([&] {
    const samloc::RunSummary s = samloc::RunLocalization(config->value);
    if (summary == nullptr) return;
    summary->runs = static_cast<int>(s.runs.size());
    summary->converged = 0;
    for (const auto& r : s.runs) summary->converged += r.converged ? 1 : 0;
    summary->convergence_rate = s.convergence_rate;
    for (int i = 0; i < 4; ++i) summary->steps_histogram[i] = s.steps_histogram[i];
  });
}

samloc_status samloc_genmap(const samloc_config* config) {
  SAMLOC_REQUIRE(config);
  return Guard([&] { samloc::GenerateMapFiles(config->value); });
}

samloc_status samloc_genlog(const samloc_config* config) {
  SAMLOC_REQUIRE(config);
  return Guard([&] { samloc::GenerateLogFile(config->value); });
}

samloc_status samloc_pmexport_oracle(const samloc_config* config) {
  SAMLOC_REQUIRE(config);
  return Guard([&] { samloc::ExportOraclePms(config->value); });
}

samloc_status samloc_grid_load(const char* pgm_path, const char* meta_path,
                               samloc_grid** out) {
  SAMLOC_REQUIRE(pgm_path);
  SAMLOC_REQUIRE(meta_path);
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    *out = new samloc_grid{samloc::LoadMap(pgm_path, meta_path)};
  });
}

void samloc_grid_destroy(samloc_grid* grid) { delete grid; }

samloc_status samloc_grid_info(const samloc_grid* grid, int* width, int* height,
                               double* resolution) {
  SAMLOC_REQUIRE(grid);
  if (width) *width = grid->value.width();
  if (height) *height = grid->value.height();
  if (resolution) *resolution = grid->value.resolution();
  return SAMLOC_OK;
}

samloc_status samloc_grid_is_free(const samloc_grid* grid, double x, double y,
                                  int* free_out) {
  SAMLOC_REQUIRE(grid);
  SAMLOC_REQUIRE(free_out);
  *free_out = grid->value.IsFreeAt(x, y) ? 1 : 0;
  return SAMLOC_OK;
}

samloc_status samloc_pm_read(const char* path, samloc_pm** out) {
  SAMLOC_REQUIRE(path);
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] { *out = new samloc_pm{samloc::ReadPmap(path)}; });
}

void samloc_pm_destroy(samloc_pm* pm) { delete pm; }

samloc_status samloc_pm_dims(const samloc_pm* pm, int* h, int* w, int* k,
                             int64_t* frame_id) {
  SAMLOC_REQUIRE(pm);
  const samloc::PoseGridSpec& spec = pm->value.spec();
  if (h) *h = spec.h;
  if (w) *w = spec.w;
  if (k) *k = spec.k;
  if (frame_id) *frame_id = pm->value.frame_id();
  return SAMLOC_OK;
}

samloc_status samloc_pm_values(const samloc_pm* pm, double* out, size_t count) {
  SAMLOC_REQUIRE(pm);
  SAMLOC_REQUIRE(out);
  const auto& values = pm->value.values();
  if (count != values.size()) {
    return Fail(SAMLOC_ERR_SHAPE, "buffer holds " + std::to_string(count) +
                                      " values, PM has " +
                                      std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), out);
  return SAMLOC_OK;
}

samloc_status samloc_model_create(const samloc_config* config,
                                  const samloc_grid* grid, samloc_model** out) {
  SAMLOC_REQUIRE(config);
  SAMLOC_REQUIRE(grid);
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    config->value.Validate();
    samloc::ExperimentConfig cfg = config->value;
    // A model is wanted even when the configured filter is plain MCL.
    if (cfg.filter.algorithm == samloc::FilterAlgorithm::kMcl) {
      cfg.filter.algorithm = samloc::FilterAlgorithm::kAdam;
    }
    const samloc::PoseGridSpec spec = samloc::ExperimentPoseGrid(cfg, grid->value);
    auto handle = std::make_unique<samloc_model>();
    handle->grid = &grid->value;
    handle->scan = cfg.scan;
    handle->model = samloc::MakeObservationModel(cfg, grid->value, spec);
    *out = handle.release();
  });
}

void samloc_model_destroy(samloc_model* model) { delete model; }

samloc_status samloc_model_infer(const samloc_model* model, const double* ranges,
                                 size_t count, int64_t frame_id, samloc_pm** out) {
  SAMLOC_REQUIRE(model);
  SAMLOC_REQUIRE(ranges);
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    samloc::Scan scan{std::vector<double>(ranges, ranges + count), model->scan,
                      frame_id};
    *out = new samloc_pm{model->model->Infer(scan, *model->grid)};
  });
}

samloc_status samloc_filter_create(const samloc_config* config,
                                   const samloc_grid* grid,
                                   const samloc_model* model,
                                   samloc_filter** out) {
  SAMLOC_REQUIRE(config);
  SAMLOC_REQUIRE(grid);
  SAMLOC_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    const samloc::ExperimentConfig& cfg = config->value;
    cfg.Validate();
    const samloc::PoseGridSpec spec = samloc::ExperimentPoseGrid(cfg, grid->value);
    const samloc::SamplableObservationModel* m =
        model != nullptr ? model->model.get() : nullptr;
    if (m != nullptr && !(m->spec() == spec)) {
      throw samloc::Error(samloc::ErrorCode::kShape,
                          "model pose grid differs from the config pose grid");
    }
    samloc::FilterConfig fc = cfg.filter;
    fc.rng_seed = cfg.seed;
    fc.beam.l_max = cfg.scan.max_range;
    auto handle = std::make_unique<samloc_filter>();
    handle->scan = cfg.scan;
    handle->filter =
        std::make_unique<samloc::ParticleFilter>(grid->value, spec, fc, m);
    *out = handle.release();
  });
}

void samloc_filter_destroy(samloc_filter* filter) { delete filter; }

samloc_status samloc_filter_update(samloc_filter* filter, const double odom[3],
                                   const double* ranges, size_t count,
                                   int64_t frame_id, samloc_update_stats* stats) {
  SAMLOC_REQUIRE(filter);
  SAMLOC_REQUIRE(odom);
  SAMLOC_REQUIRE(ranges);
  return Guard([&] {
    if (count != static_cast<size_t>(filter->scan.beam_count)) {
      throw samloc::Error(samloc::ErrorCode::kShape,
                          "scan has " + std::to_string(count) +
                              " ranges, config expects " +
                              std::to_string(filter->scan.beam_count));
    }
    samloc::Scan scan{std::vector<double>(ranges, ranges + count), filter->scan,
                      frame_id};
    const samloc::UpdateStats s =
        filter->filter->Update({odom[0], odom[1], odom[2]}, scan);
    if (stats != nullptr) {
      stats->h_count = s.h_count;
      stats->l_count = s.l_count;
      stats->reinitialized = s.reinitialized ? 1 : 0;
      stats->pm_fallback = s.pm_fallback ? 1 : 0;
    }
  });
}

samloc_status samloc_filter_estimate(const samloc_filter* filter, double pose[3]) {
  SAMLOC_REQUIRE(filter);
  SAMLOC_REQUIRE(pose);
  return Guard([&] {
    const samloc::Pose p = filter->filter->Estimate();
    pose[0] = p.x;
    pose[1] = p.y;
    pose[2] = p.theta;
  });
}

samloc_status samloc_filter_particles(const samloc_filter* filter, double* out,
                                      size_t capacity, size_t* count) {
  SAMLOC_REQUIRE(filter);
  SAMLOC_REQUIRE(count);
  if (capacity > 0 && out == nullptr) {
    return Fail(SAMLOC_ERR_INVALID_ARGUMENT, "out must not be null");
  }
  const auto& particles = filter->filter->particles().particles;
  *count = particles.size();
  const size_t n = std::min(capacity, particles.size());
  for (size_t i = 0; i < n; ++i) {
    out[4 * i + 0] = particles[i].pose.x;
    out[4 * i + 1] = particles[i].pose.y;
    out[4 * i + 2] = particles[i].pose.theta;
    out[4 * i + 3] = particles[i].weight_norm;
  }
  return SAMLOC_OK;
}

}  // extern "C"
