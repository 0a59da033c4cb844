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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. `acceptance_test <name>...` runs a subset.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.h"
#include "samloc/experiment.h"
#include "samloc/filters.h"
#include "samloc/harness.h"
#include "samloc/models.h"
#include "samloc/pm.h"
#include "samloc/samplers.h"
#include "scenario.h"
#include "test_util.h"

namespace samloc {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Result {
  bool pass;
  std::string detail;
};

Result Report(bool pass, const char* fmt, ...) __attribute__((format(printf, 2, 3)));
Result Report(bool pass, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return {pass, buf};
}

PoseGridSpec Grid(int h, int w, int k) {
  PoseGridSpec s;
  s.h = h;
  s.w = w;
  s.k = k;
  s.x_len = h;
  s.y_len = w;
  return s;
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Result CheckMultimodalOptimum() {
  const auto start = Clock::now();
  const PoseGridSpec spec = Grid(6, 6, 4);
  std::mt19937_64 gen(13);
  double worst = 0.0;
  for (int m : {1, 2, 3, 5}) {
    std::vector<std::size_t> flat(spec.size());
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = i;
    std::shuffle(flat.begin(), flat.end(), gen);
    flat.resize(static_cast<std::size_t>(m));
    const auto minimized = oracle::MinimizeSummedOneHotKld(spec.size(), flat, 5000, 1e-3);
    std::vector<PoseIndex> bins;
    for (std::size_t f : flat) bins.push_back(spec.Unflatten(f));
    const ProbabilityMap closed = samloc::MultimodalOptimum(bins, spec);
    const std::set<std::size_t> support(flat.begin(), flat.end());
    for (std::size_t f = 0; f < spec.size(); ++f) {
      const double want = support.count(f) ? 1.0 / m : 0.0;
      worst = std::max(worst, std::abs(minimized[f] - want));
      worst = std::max(worst, std::abs(closed.values()[f] - want));
    }
  }
  const double secs = Seconds(start);
  return Report(worst < 1e-3 && secs < 10.0, "max entry error %.2e, %.2f s", worst, secs);
}

Result CheckKldIdentities() {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  std::uniform_int_distribution<int> dim(1, 9);
  double worst_self = 0.0;
  double worst_log = 0.0;
  for (int t = 0; t < 100; ++t) {
    const PoseGridSpec spec = Grid(dim(gen), dim(gen), dim(gen));
    std::vector<double> v(spec.size());
    for (double& x : v) x = u(gen);
    const ProbabilityMap p = Normalize(ProbabilityMap(spec, v));
    worst_self = std::max(worst_self, std::abs(KldLoss(p, p)));
    const double n = static_cast<double>(spec.size());
    const ProbabilityMap uniform(spec, std::vector<double>(spec.size(), 1.0 / n));
    std::uniform_int_distribution<std::size_t> pick(0, spec.size() - 1);
    const ProbabilityMap onehot = samloc::MultimodalOptimum({spec.Unflatten(pick(gen))}, spec);
    worst_log = std::max(worst_log, std::abs(KldLoss(onehot, uniform) - std::log(n)));
  }
  return Report(worst_self <= 1e-9 && worst_log <= 1e-9,
                "max |KL(p,p)| %.1e, max |KL(onehot,uniform) - log N| %.1e", worst_self,
                worst_log);
}

Result CheckSamplingFidelity() {
  const PoseGridSpec spec = Grid(6, 6, 4);
  std::mt19937_64 gen(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kDraws = 100000;
  int passed = 0;
  double lowest = 1.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> v(spec.size());
    for (double& x : v) x = u(gen);
    const ProbabilityMap pm = Normalize(ProbabilityMap(spec, v));
    const PoseSampler sampler(pm);
    Rng rng(1000 + t);
    std::vector<long> counts(spec.size(), 0);
    for (int i = 0; i < kDraws; ++i) ++counts[spec.Flatten(sampler.DrawBin(rng))];
    std::vector<double> expected(spec.size());
    for (std::size_t f = 0; f < spec.size(); ++f) expected[f] = kDraws * pm.values()[f];
    const double p = oracle::ChiSquarePValue(counts, expected);
    lowest = std::min(lowest, p);
    passed += p > 0.01;
  }
  return Report(passed >= 19, "%d/20 PMs pass at p > 0.01 (lowest p %.3f)", passed, lowest);
}

Result CheckObservationModel() {
  const BeamModelParams params;
  ScanConfig cfg;
  const double w_star = ReferenceWeight(cfg, params);
  std::mt19937_64 gen(55);
  std::uniform_real_distribution<double> u(0.0, params.l_max);
  int exact = 0;
  int monotone = 0;
  constexpr int kSteps = 60;
  for (int s = 0; s < 100; ++s) {
    std::vector<double> scan(static_cast<std::size_t>(cfg.beam_count));
    for (double& r : scan) r = u(gen);
    exact += ObservationScore(scan, scan, params) == w_star;
    bool ok = true;
    for (std::size_t b = 0; b < scan.size() && ok; ++b) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> pred = scan;
        double prev = w_star;
        for (int i = 1; i <= kSteps; ++i) {
          pred[b] = scan[b] + sign * 3.0 * params.sigma * i / kSteps;
          const double score = ObservationScore(scan, pred, params);
          if (!(score < prev)) ok = false;
          prev = score;
        }
      }
    }
    monotone += ok;
  }
  return Report(exact == 100 && monotone == 100,
                "Score(L, L) == w* on %d/100 scans, strict decrease on %d/100", exact,
                monotone);
}

Result CheckGridMatcherSelfConsistency() {
  OccupancyGrid g = testing::WalledGrid(30, 30, 0.2);
  // L-shaped wall plus an off-center block break every symmetry.
  for (int x = 6; x < 14; ++x) g.set(x, 8, CellState::kOccupied);
  for (int y = 8; y < 18; ++y) g.set(6, y, CellState::kOccupied);
  for (int x = 20; x < 23; ++x) {
    for (int y = 19; y < 21; ++y) g.set(x, y, CellState::kOccupied);
  }
  const PoseGridSpec spec = DefaultPoseGridSpec(g);
  ScanConfig cfg;
  BeamModelParams params;
  params.l_max = cfg.max_range;
  const GridMatcher matcher(g, spec, cfg, params);
  const auto free = FreePositionBins(g, spec);
  std::mt19937_64 gen(89);
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  std::uniform_int_distribution<int> heading(0, spec.k - 1);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    PoseIndex b = free[pick(gen)];
    b.k = heading(gen);
    const Scan scan = SimulateScan(g, CellToPose(b, spec), cfg, 0.0, 1);
    hits += matcher.Infer(scan, g).ArgMax() == b;
  }
  return Report(hits >= 90, "argmax at the true bin in %d/100 scans", hits);
}

// Post-convergence errors are read from the convergence step onward
// (up to `end`).
struct SuiteStats {
  int converged = 0;
  std::vector<double> post_e_pos;
  std::vector<double> post_e_theta;
};

void Accumulate(const EpisodeTrace& trace, std::size_t end, SuiteStats& stats) {
  const Convergence c = ConvergenceCheck(trace);
  if (!c.converged) return;
  ++stats.converged;
  for (std::size_t i = static_cast<std::size_t>(c.steps) - 1; i < end; ++i) {
    stats.post_e_pos.push_back(trace.steps[i].e_pos);
    stats.post_e_theta.push_back(trace.steps[i].e_theta);
  }
}

Result CheckGlobalLocalization() {
  const auto start = Clock::now();
  const testing::Suite suite{testing::SuiteParams{}};
  SuiteStats stats;
  for (int r = 0; r < 100; ++r) {
    const EpisodeTrace trace =
        suite.Run(suite.Episode(r, false), testing::SuiteFilter(FilterAlgorithm::kAdam, r));
    Accumulate(trace, trace.steps.size(), stats);
  }
  const double secs = Seconds(start);
  const double e_pos = Median(stats.post_e_pos);
  const double e_theta = Median(stats.post_e_theta) * 180.0 / std::numbers::pi;
  return Report(stats.converged >= 90 && e_pos <= 0.5 && e_theta <= 10.0 && secs < 300.0,
                "converged %d/100, median E_pos %.3f m, median E_theta %.2f deg, %.1f s",
                stats.converged, e_pos, e_theta, secs);
}

// Shared by the kidnapping and T_cut criteria: 100 kidnapped episodes.
class KidnapSuite {
 public:
  KidnapSuite() : suite_(testing::SuiteParams{}) {
    for (int r = 0; r < 100; ++r) logs_.push_back(suite_.Episode(r, true));
  }

  struct Outcome {
    int within_20 = 0;   // re-converged within 20 steps of the teleport
    int reconverged = 0; // re-converged before the episode ends
  };

  Outcome Run(FilterAlgorithm algorithm, double t_cut) const {
    Outcome out;
    const std::size_t first = static_cast<std::size_t>(suite_.params().kidnap_at);
    for (int r = 0; r < 100; ++r) {
      const EpisodeTrace trace =
          suite_.Run(logs_[r], testing::SuiteFilter(algorithm, r, t_cut));
      const Convergence c = ConvergenceCheck(trace, first);
      out.reconverged += c.converged;
      out.within_20 += c.converged && c.steps <= 20;
    }
    return out;
  }

 private:
  testing::Suite suite_;
  std::vector<std::vector<EpisodeRecord>> logs_;
};

const KidnapSuite& Kidnapped() {
  static const KidnapSuite suite;
  return suite;
}

Result CheckKidnapRecovery() {
  const auto adam = Kidnapped().Run(FilterAlgorithm::kAdam, 0.6);
  const auto mcl = Kidnapped().Run(FilterAlgorithm::kMcl, 0.6);
  return Report(adam.within_20 >= 80 && adam.within_20 > mcl.within_20,
                "AdaM re-converged within 20 steps in %d/100, MCL in %d/100", adam.within_20,
                mcl.within_20);
}

Result CheckTcutTrend() {
  std::vector<KidnapSuite::Outcome> out;
  for (double t : {0.3, 0.5, 0.7, 0.9}) out.push_back(Kidnapped().Run(FilterAlgorithm::kAdam, t));
  const int at_09 = out[3].reconverged;
  const bool pass =
      at_09 < out[0].reconverged && at_09 < out[1].reconverged && at_09 < out[2].reconverged;
  return Report(pass,
                "post-kidnap convergence 0.3:%d 0.5:%d 0.7:%d 0.9:%d "
                "(within 20 steps 0.3:%d 0.5:%d 0.7:%d 0.9:%d)",
                out[0].reconverged, out[1].reconverged, out[2].reconverged, at_09,
                out[0].within_20, out[1].within_20, out[2].within_20, out[3].within_20);
}

Result CheckDeterminism() {
  testing::TempDir dir;
  ExperimentConfig cfg;
  cfg.map = dir.File("map.pgm");
  cfg.meta = dir.File("map.txt");
  cfg.log = dir.File("episode.jsonl");
  cfg.seed = 5;
  cfg.obstacles = 10;
  cfg.kidnap_at = 20;
  cfg.odom_noise = {0.01, 0.01, 0.005};
  cfg.temperature = 0.1;
  cfg.repeat = 2;
  GenerateMapFiles(cfg);
  GenerateLogFile(cfg);
  cfg.out = dir.File("a");
  RunLocalization(cfg);
  cfg.out = dir.File("b");
  RunLocalization(cfg);
  int identical = 0;
  for (const char* name : {"trace_0.jsonl", "trace_1.jsonl", "summary.csv", "runs.csv"}) {
    const std::string a = testing::ReadFile(dir.File(std::string("a/") + name));
    identical += !a.empty() && a == testing::ReadFile(dir.File(std::string("b/") + name));
  }
  return Report(identical == 4, "%d/4 output files byte-identical across two runs", identical);
}

struct Criterion {
  const char* name;
  std::function<Result()> run;
};

}  // namespace
}  // namespace samloc

int main(int argc, char** argv) {
  using namespace samloc;
  const std::vector<Criterion> criteria{
      {"multimodal_optimum", CheckMultimodalOptimum},
      {"kld_identities", CheckKldIdentities},
      {"sampling_fidelity", CheckSamplingFidelity},
      {"observation_model", CheckObservationModel},
      {"grid_matcher_self_consistency", CheckGridMatcherSelfConsistency},
      {"global_localization", CheckGlobalLocalization},
      {"kidnap_recovery", CheckKidnapRecovery},
      {"tcut_trend", CheckTcutTrend},
      {"determinism", CheckDeterminism},
  };
  const std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    Result r{false, ""};
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
