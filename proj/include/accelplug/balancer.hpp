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

#ifndef ACCELPLUG_BALANCER_HPP
#define ACCELPLUG_BALANCER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "accelplug/types.hpp"

namespace accelplug {

/// max_j c_j * d_j
double makespan(std::span<const double> sizes, std::span<const double> costs);
double makespan(std::span<const std::int64_t> sizes, std::span<const double> costs);

/// d_j = (1/c_j) / sum(1/c_j) * D, unrounded.
std::vector<double> balance_data_real(std::int64_t total, std::span<const double> costs);

/// balance_data_real rounded by largest remainder (ties to the lower index);
/// the parts sum to `total` exactly.
std::vector<std::int64_t> balance_data(std::int64_t total, std::span<const double> costs);

/// Capacity factors 1/c'_j = f * d_j / d*, with d* = max d_j. The makespan of
/// the result is d*/f. `costs`, when given, are checked against f >= 1/c_j.
std::vector<double> balance_capacity(double f, std::span<const std::int64_t> sizes,
                                     std::span<const double> costs = {});

/// One measured iteration of one node.
struct CostSample {
  double units = 0.0;   // d_j
  double blocks = 0.0;  // s
  double time = 0.0;    // simulated time
};

struct CostFit {
  double c = 0.0;
  std::optional<double> t_call;  // known only when s varied
};

/// Least-squares fit of time = c*units + blocks*T_call.
CostFit calibrate(std::span<const CostSample> samples);

}  // namespace accelplug

#endif  // ACCELPLUG_BALANCER_HPP
