/*
 * Copyright 2026 The accelplug Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "accelplug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "accelplug/shared_region.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace accelplug {

void PipelineCostModel::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(k1) || !finite(k2) || !finite(k3) || !finite(a)) {
    throw ConfigError("cost model coefficients must be finite");
  }
  if (k1 <= 0 || k2 <= 0 || k3 <= 0) throw ConfigError("k1, k2, k3 must be positive");
  if (a < 0) throw ConfigError("call cost a must be non-negative");
  if (d < 1) throw ConfigError("d must be at least 1");
}

double total_time_at(const PipelineCostModel& m, double s) {
  const double b = static_cast<double>(m.d) / s;
  const double tn = m.k1 * b;
  const double tc = m.a + m.k2 * b;
  const double tu = m.k3 * b;
  return tn + std::max(tn, tc) + (s - 2.0) * std::max({tn, tc, tu}) + std::max(tc, tu) + tu;
}

double total_time(const PipelineCostModel& m, std::uint64_t s) {
  if (s < 1 || s > m.d) {
    throw ConfigError("block count " + std::to_string(s) + " outside [1, " +
                      std::to_string(m.d) + "]");
  }
  return total_time_at(m, static_cast<double>(s));
}

BlockSizeOptimum optimal_block_size(const PipelineCostModel& m) {
  m.validate();
  const double d = static_cast<double>(m.d);
  const double q = std::sqrt(m.a * d / (m.k1 + m.k3));

  const bool k1_max = m.k1 > m.k2 && m.k1 > m.k3;
  const bool k3_max = m.k3 > m.k2 && m.k3 > m.k1;
  if (m.a == 0.0 && !k1_max && !k3_max) throw NoInteriorOptimum();

  BlockSizeOptimum out;
  out.q = q;
  if (k1_max) {
    const double b = m.a / (m.k1 - m.k2);
    // a = 0 is the limit of this branch: b -> 0, T -> k1*d
    if (b < q || m.a == 0.0) {
      out.b_opt = b;
      out.t_min = m.a * (m.k1 + m.k3) / (m.k1 - m.k2) + m.k1 * d;
      out.which = OptimumCase::DownloadBound;
      return out;
    }
  }
  if (k3_max) {
    const double b = m.a / (m.k3 - m.k2);
    if (b < q || m.a == 0.0) {
      out.b_opt = b;
      out.t_min = m.a * (m.k1 + m.k3) / (m.k3 - m.k2) + m.k3 * d;
      out.which = OptimumCase::UploadBound;
      return out;
    }
  }
  out.b_opt = q;
  out.t_min = m.k2 * d + 2.0 * std::sqrt((m.k1 + m.k3) * m.a * d);
  out.which = OptimumCase::Balanced;
  return out;
}

BlockPlan integerize(const PipelineCostModel& m, double b_opt) {
  auto plan_for = [&](std::uint64_t s) {
    s = std::clamp<std::uint64_t>(s, 1, m.d);
    return BlockPlan{s, (m.d + s - 1) / s, total_time(m, s)};
  };
  if (!(b_opt > 0.0)) return plan_for(m.d);
  const double s_opt = static_cast<double>(m.d) / b_opt;
  const double lo = std::floor(s_opt);
  const double hi = std::ceil(s_opt);
  const double limit = static_cast<double>(m.d);
  BlockPlan a = plan_for(static_cast<std::uint64_t>(std::clamp(lo, 1.0, limit)));
  BlockPlan b = plan_for(static_cast<std::uint64_t>(std::clamp(hi, 1.0, limit)));
  if (b.t < a.t) return b;
  return a;
}

BlockPlan sweep_block_count_serial(const PipelineCostModel& m) {
  BlockPlan best{1, m.d, total_time(m, 1)};
  for (std::uint64_t s = 2; s <= m.d; ++s) {
    const double t = total_time_at(m, static_cast<double>(s));
    if (t < best.t) best = BlockPlan{s, 0, t};
  }
  best.b = (m.d + best.s - 1) / best.s;
  return best;
}

BlockPlan sweep_block_count(const PipelineCostModel& m) {
  const long long n = static_cast<long long>(m.d);
  double best_t = std::numeric_limits<double>::infinity();
  long long best_s = 1;
#pragma omp parallel
  {
    double local_t = std::numeric_limits<double>::infinity();
    long long local_s = 1;
#pragma omp for schedule(static) nowait
    for (long long s = 1; s <= n; ++s) {
      const double t = total_time_at(m, static_cast<double>(s));
      if (t < local_t) {
        local_t = t;
        local_s = s;
      }
    }
#pragma omp critical
    {
      if (local_t < best_t || (local_t == best_t && local_s < best_s)) {
        best_t = local_t;
        best_s = local_s;
      }
    }
  }
  const auto s = static_cast<std::uint64_t>(best_s);
  return BlockPlan{s, (m.d + s - 1) / s, best_t};
}

BlockChoice choose_block_count(const PipelineCostModel& m) {
  try {
    auto opt = optimal_block_size(m);
    return BlockChoice{integerize(m, opt.b_opt), true};
  } catch (const NoInteriorOptimum&) {
    return BlockChoice{sweep_block_count(m), false};
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(Role role) {
  switch (role) {
    case Role::New: return "New";
    case Role::Compute: return "Compute";
    case Role::Upload: return "Upload";
  }
  return "?";
}

std::size_t RotationState::buffer_for(Role role) const {
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i] == role) return i;
  }
  throw std::logic_error("role labels are not a permutation");
}

void RotationState::advance() {
  for (auto& r : roles_) {
    switch (r) {
      case Role::New: r = Role::Compute; break;
      case Role::Compute: r = Role::Upload; break;
      case Role::Upload: r = Role::New; break;
    }
  }
  ++cycle_count_;
}

void rotate(SharedRegion& region) { region.rotation().advance(); }

PipelineTiming simulate_pipeline(std::span<const StageTimes> blocks) {
  PipelineTiming t;
  const std::size_t s = blocks.size();
  if (s == 0) return t;
  for (const auto& b : blocks) {
    t.download += b.download;
    t.compute += b.compute;
    t.upload += b.upload;
  }
  t.span = blocks[0].download;
  for (std::size_t r = 1; r <= s + 1; ++r) {
    double cycle = 0.0;
    if (r < s) cycle = std::max(cycle, blocks[r].download);
    if (r - 1 < s) cycle = std::max(cycle, blocks[r - 1].compute);
    if (r >= 2) cycle = std::max(cycle, blocks[r - 2].upload);
    t.span += cycle;
  }
  return t;
}

}  // namespace accelplug
