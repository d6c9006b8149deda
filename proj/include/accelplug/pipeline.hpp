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

#ifndef ACCELPLUG_PIPELINE_HPP
#define ACCELPLUG_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "accelplug/types.hpp"

namespace accelplug {

/// Three-stage pipeline cost model. Per-unit download (k1), compute (k2) and
/// upload (k3) costs, fixed device-call cost `a`, and `d` units to process.
///
/// With b = d/s, one block costs T_n = k1*b, T_c = a + k2*b, T_u = k3*b and
///
///   T_total = T_n + max(T_n, T_c) + (s-2)*max(T_n, T_c, T_u) + max(T_c, T_u) + T_u
///
/// evaluated literally for every s > 0.
struct PipelineCostModel {
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 1.0;
  double a = 0.0;
  std::uint64_t d = 1;

  void validate() const;
};

/// Continuous form: s may be any positive real.
double total_time_at(const PipelineCostModel& model, double s);

/// Integer block count, 1 <= s <= d.
double total_time(const PipelineCostModel& model, std::uint64_t s);

enum class OptimumCase { DownloadBound, UploadBound, Balanced };

struct BlockSizeOptimum {
  double b_opt = 0.0;
  double t_min = 0.0;
  double q = 0.0;
  OptimumCase which = OptimumCase::Balanced;
};

/// Raised when a = 0 and compute dominates: the cost has no interior optimum
/// and callers fall back to an integer sweep.
class NoInteriorOptimum : public Error {
 public:
  NoInteriorOptimum() : Error("no interior optimum (a = 0 and k2 >= max(k1, k3))") {}
};

/// Closed-form optimal block size. With Q = sqrt(a*d/(k1+k3)):
///   k1 strictly largest and a/(k1-k2) < Q  ->  b = a/(k1-k2), T = a(k1+k3)/(k1-k2) + k1*d
///   k3 strictly largest and a/(k3-k2) < Q  ->  b = a/(k3-k2), T = a(k1+k3)/(k3-k2) + k3*d
///   otherwise                              ->  b = Q,          T = k2*d + 2*sqrt((k1+k3)*a*d)
BlockSizeOptimum optimal_block_size(const PipelineCostModel& model);

struct BlockPlan {
  std::uint64_t s = 1;  // number of blocks
  std::uint64_t b = 1;  // triplets per block (ceil(d/s))
  double t = 0.0;       // total_time at s
};

/// Evaluates floor/ceil of d/b_opt (clamped to [1, d]) and keeps the cheaper.
/// b_opt <= 0 maps to s = d.
BlockPlan integerize(const PipelineCostModel& model, double b_opt);

/// Exhaustive minimization over s in [1, d]; ties resolve to the smaller s.
BlockPlan sweep_block_count_serial(const PipelineCostModel& model);
BlockPlan sweep_block_count(const PipelineCostModel& model);

/// Closed form + integerize, or the sweep when the model is degenerate.
struct BlockChoice {
  BlockPlan plan;
  bool closed_form = true;
};
BlockChoice choose_block_count(const PipelineCostModel& model);

// ---------------------------------------------------------------------------
// Buffer roles

enum class Role : std::uint8_t { New, Compute, Upload };
std::string_view to_string(Role role);

/// Role label of each of the three buffers. Starts as (New, Compute, Upload)
/// and advances by the 3-cycle New -> Compute -> Upload -> New.
class RotationState {
 public:
  Role role_of(std::size_t buffer) const { return roles_[buffer]; }
  std::size_t buffer_for(Role role) const;
  std::uint64_t cycle_count() const { return cycle_count_; }
  void advance();

 private:
  std::array<Role, 3> roles_{Role::New, Role::Compute, Role::Upload};
  std::uint64_t cycle_count_ = 0;
};

class SharedRegion;

/// Advances the region's role labels one step; buffer contents are untouched.
void rotate(SharedRegion& region);

// ---------------------------------------------------------------------------
// Schedule simulation

struct StageTimes {
  double download = 0.0;
  double compute = 0.0;
  double upload = 0.0;
};

struct PipelineTiming {
  double span = 0.0;
  double download = 0.0;  // busy time per stage
  double compute = 0.0;
  double upload = 0.0;
};

/// Span of the rotation schedule: block 0 is downloaded first, then each
/// rotation r overlaps download(r), compute(r-1) and upload(r-2), and the
/// cycle lasts as long as its slowest stage.
PipelineTiming simulate_pipeline(std::span<const StageTimes> blocks);

}  // namespace accelplug

#endif  // ACCELPLUG_PIPELINE_HPP
