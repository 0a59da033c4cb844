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

#include "samloc/pm.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "samloc/error.h"

namespace samloc {

ProbabilityMap::ProbabilityMap(const PoseGridSpec& spec, std::int64_t frame_id)
    : spec_(spec), values_(spec.size(), 0.0), frame_id_(frame_id) {
  spec_.Validate();
}

ProbabilityMap::ProbabilityMap(const PoseGridSpec& spec,
                               std::vector<double> values,
                               std::int64_t frame_id)
    : spec_(spec), values_(std::move(values)), frame_id_(frame_id) {
  spec_.Validate();
  if (values_.size() != spec_.size()) {
    std::ostringstream msg;
    msg << "probability map holds " << values_.size() << " entries, spec needs "
        << spec_.size();
    throw Error(ErrorCode::kShape, msg.str());
  }
}

double ProbabilityMap::Sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

PoseIndex ProbabilityMap::ArgMax() const {
  const auto it = std::max_element(values_.begin(), values_.end());
  return spec_.Unflatten(static_cast<std::size_t>(it - values_.begin()));
}

ProbabilityMap Normalize(const ProbabilityMap& pm) {
  double sum = 0.0;
  for (double v : pm.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probability map entries must be finite and >= 0");
    }
    sum += v;
  }
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::kState, "cannot normalize a zero-mass probability map");
  }
  std::vector<double> out(pm.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pm.values()[i] / sum;
  return ProbabilityMap(pm.spec(), std::move(out), pm.frame_id());
}

ProbabilityMap GenerateGroundTruth(const Pose& pose, const PoseGridSpec& spec,
                                   double blur_sigma) {
  if (blur_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "blur_sigma must be >= 0");
  }
  const PoseIndex center = PoseToCell(pose, spec);

  // Position raster.
  std::vector<double> position(static_cast<std::size_t>(spec.h) * spec.w, 0.0);
  if (blur_sigma == 0.0) {
    position[static_cast<std::size_t>(center.i) * spec.w + center.j] = 1.0;
  } else {
    const int radius = static_cast<int>(std::ceil(3.0 * blur_sigma));
    const double denom = 2.0 * blur_sigma * blur_sigma;
    for (int di = -radius; di <= radius; ++di) {
      for (int dj = -radius; dj <= radius; ++dj) {
        const int i = center.i + di;
        const int j = center.j + dj;
        if (i < 0 || j < 0 || i >= spec.h || j >= spec.w) continue;
        position[static_cast<std::size_t>(i) * spec.w + j] =
            std::exp(-(di * di + dj * dj) / denom);
      }
    }
  }

  // Heading split between the bracketing bins; the seam at 2*pi wraps.
  std::vector<double> heading(static_cast<std::size_t>(spec.k), 0.0);
  if (spec.k == 1) {
    heading[0] = 1.0;
  } else {
    const double t = NormalizeAngle(pose.theta) / spec.dtheta();
    const double lo = std::floor(t);
    const double frac = t - lo;
    const int k_lo = static_cast<int>(lo) % spec.k;
    const int k_hi = (k_lo + 1) % spec.k;
    heading[static_cast<std::size_t>(k_lo)] += 1.0 - frac;
    heading[static_cast<std::size_t>(k_hi)] += frac;
  }

  ProbabilityMap gt(spec);
  auto& values = gt.mutable_values();
  double sum = 0.0;
  for (int i = 0; i < spec.h; ++i) {
    for (int j = 0; j < spec.w; ++j) {
      const double p = position[static_cast<std::size_t>(i) * spec.w + j];
      if (p == 0.0) continue;
      for (int k = 0; k < spec.k; ++k) {
        const double v = p * heading[static_cast<std::size_t>(k)];
        values[spec.Flatten({i, j, k})] = v;
        sum += v;
      }
    }
  }
  for (double& v : values) v /= sum;
  return gt;
}

double KldLoss(const ProbabilityMap& gt, const ProbabilityMap& pm) {
  const PoseGridSpec& a = gt.spec();
  const PoseGridSpec& b = pm.spec();
  if (a.h != b.h || a.w != b.w || a.k != b.k) {
    throw Error(ErrorCode::kShape, "KL loss operands have different shapes");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < gt.values().size(); ++i) {
    const double p = gt.values()[i];
    if (p <= 0.0) continue;
    const double q = pm.values()[i];
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    loss += p * std::log(p / q);
  }
  return loss;
}

Pose JitterInBin(const PoseIndex& index, const PoseGridSpec& spec, Rng& rng) {
  const Pose center = CellToPose(index, spec);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  const double x_hi = std::nextafter(spec.origin.x + spec.x_len,
                                     -std::numeric_limits<double>::infinity());
  const double y_hi = std::nextafter(spec.origin.y + spec.y_len,
                                     -std::numeric_limits<double>::infinity());
  const double x = std::clamp(center.x + unit(rng) * spec.dx(), spec.origin.x, x_hi);
  const double y = std::clamp(center.y + unit(rng) * spec.dy(), spec.origin.y, y_hi);
  const double theta = center.theta + unit(rng) * spec.dtheta();
  return Pose(x, y, theta);
}

PoseSampler::PoseSampler(const ProbabilityMap& pm) : spec_(pm.spec()) {
  cdf_.resize(pm.values().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    const double v = pm.values()[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probability map entries must be finite and >= 0");
    }
    acc += v;
    cdf_[i] = acc;
  }
  if (!(std::abs(acc - 1.0) <= 1e-6)) {
    std::ostringstream msg;
    msg << "probability map is not normalized (sum " << acc << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
}

PoseIndex PoseSampler::DrawBin(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // upper_bound never lands on a zero-mass bin.
  if (it == cdf_.end()) --it;
  return spec_.Unflatten(static_cast<std::size_t>(it - cdf_.begin()));
}

Pose PoseSampler::Draw(Rng& rng) const { return JitterInBin(DrawBin(rng), spec_, rng); }

std::vector<Pose> SamplePoses(const ProbabilityMap& pm, int n, Rng& rng) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 0");
  const PoseSampler sampler(pm);
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) poses.push_back(sampler.Draw(rng));
  return poses;
}

ProbabilityMap MultimodalOptimum(const std::vector<PoseIndex>& bins,
                                 const PoseGridSpec& spec) {
  if (bins.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one pose bin");
  }
  std::set<std::tuple<int, int, int>> seen;
  for (const PoseIndex& b : bins) {
    if (!spec.Contains(b)) {
      throw Error(ErrorCode::kOutOfRange, "pose bin outside the pose grid");
    }
    if (!seen.emplace(b.i, b.j, b.k).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate pose bin");
    }
  }
  ProbabilityMap pm(spec);
  const double mass = 1.0 / static_cast<double>(bins.size());
  for (const PoseIndex& b : bins) pm.at(b) = mass;
  return pm;
}

namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFFu));
}

std::uint32_t GetU32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  return v;
}

}  // namespace

std::string EncodePmap(const ProbabilityMap& pm) {
  const PoseGridSpec& spec = pm.spec();
  if (pm.frame_id() < 0 || pm.frame_id() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "frame_id does not fit in u32");
  }
  std::string out = "PMAP";
  out.reserve(kPmapHeaderBytes + 4 * spec.size());
  PutU32(out, kPmapVersion);
  PutU32(out, static_cast<std::uint32_t>(pm.frame_id()));
  PutU32(out, static_cast<std::uint32_t>(spec.h));
  PutU32(out, static_cast<std::uint32_t>(spec.w));
  PutU32(out, static_cast<std::uint32_t>(spec.k));
  for (double v : pm.values()) {
    PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

ProbabilityMap DecodePmap(const std::string& bytes, const PoseGridSpec* extent) {
  if (bytes.size() < kPmapHeaderBytes || bytes.compare(0, 4, "PMAP") != 0) {
    throw Error(ErrorCode::kFormat, "PMAP: bad magic");
  }
  if (GetU32(bytes, 4) != kPmapVersion) {
    throw Error(ErrorCode::kFormat, "PMAP: unsupported version");
  }
  const std::uint32_t frame = GetU32(bytes, 8);
  const std::uint32_t h = GetU32(bytes, 12);
  const std::uint32_t w = GetU32(bytes, 16);
  const std::uint32_t k = GetU32(bytes, 20);
  if (h == 0 || w == 0 || k == 0 || h > (1u << 16) || w > (1u << 16) || k > (1u << 16)) {
    throw Error(ErrorCode::kFormat, "PMAP: invalid dimensions");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(h) * w * k;
  if (bytes.size() != kPmapHeaderBytes + 4 * count) {
    std::ostringstream msg;
    msg << "PMAP: expected " << kPmapHeaderBytes + 4 * count << " bytes, got "
        << bytes.size();
    throw Error(ErrorCode::kFormat, msg.str());
  }
  PoseGridSpec spec;
  if (extent != nullptr) {
    spec = *extent;
    if (spec.h != static_cast<int>(h) || spec.w != static_cast<int>(w) ||
        spec.k != static_cast<int>(k)) {
      throw Error(ErrorCode::kShape, "PMAP dimensions differ from the pose grid");
    }
  } else {
    spec.h = static_cast<int>(h);
    spec.w = static_cast<int>(w);
    spec.k = static_cast<int>(k);
    spec.x_len = spec.h;
    spec.y_len = spec.w;
  }
  std::vector<double> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(GetU32(bytes, kPmapHeaderBytes + 4 * i));
  }
  return ProbabilityMap(spec, std::move(values), frame);
}

void WritePmap(const ProbabilityMap& pm, const std::string& path) {
  const std::string bytes = EncodePmap(pm);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

ProbabilityMap ReadPmap(const std::string& path, const PoseGridSpec* extent) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return DecodePmap(ss.str(), extent);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace samloc
