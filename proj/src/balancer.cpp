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

#include "accelplug/balancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace accelplug {

namespace {

void check_costs(std::span<const double> costs) {
  if (costs.empty()) throw ConfigError("at least one node is required");
  for (double c : costs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("node costs must be finite and positive");
  }
}

template <typename T>
double makespan_impl(std::span<const T> sizes, std::span<const double> costs) {
  if (sizes.size() != costs.size()) {
    throw ConfigError("sizes and costs differ in length (" + std::to_string(sizes.size()) +
                      " vs " + std::to_string(costs.size()) + ")");
  }
  double m = 0.0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    m = std::max(m, costs[j] * static_cast<double>(sizes[j]));
  }
  return m;
}

}  // namespace

double makespan(std::span<const double> sizes, std::span<const double> costs) {
  return makespan_impl(sizes, costs);
}

double makespan(std::span<const std::int64_t> sizes, std::span<const double> costs) {
  return makespan_impl(sizes, costs);
}

std::vector<double> balance_data_real(std::int64_t total, std::span<const double> costs) {
  check_costs(costs);
  if (total < 0) throw ConfigError("total data must be non-negative");
  double inv_sum = 0.0;
  for (double c : costs) inv_sum += 1.0 / c;
  std::vector<double> out;
  out.reserve(costs.size());
  for (double c : costs) out.push_back((1.0 / c) / inv_sum * static_cast<double>(total));
  return out;
}

std::vector<std::int64_t> balance_data(std::int64_t total, std::span<const double> costs) {
  const auto real = balance_data_real(total, costs);
  std::vector<std::int64_t> out(real.size());
  std::vector<double> frac(real.size());
  std::int64_t assigned = 0;
  for (std::size_t j = 0; j < real.size(); ++j) {
    const double f = std::floor(real[j]);
    out[j] = static_cast<std::int64_t>(f);
    frac[j] = real[j] - f;
    assigned += out[j];
  }
  std::vector<std::size_t> order(real.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  // floating error can leave the floors one short of the expected count per node
  for (std::size_t k = 0; assigned < total; ++k) {
    ++out[order[k % order.size()]];
    ++assigned;
  }
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  return out;
}

std::vector<double> balance_capacity(double f, std::span<const std::int64_t> sizes,
                                     std::span<const double> costs) {
  if (sizes.empty()) throw ConfigError("at least one node is required");
  if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("capacity factor f must be positive");
  std::int64_t d_star = 0;
  for (auto d : sizes) {
    if (d < 0) throw ConfigError("sizes must be non-negative");
    d_star = std::max(d_star, d);
  }
  if (d_star == 0) throw ConfigError("all partition sizes are zero");
  if (!costs.empty()) {
    check_costs(costs);
    if (costs.size() != sizes.size()) throw ConfigError("sizes and costs differ in length");
    for (double c : costs) {
      if (f < 1.0 / c) {
        throw ConfigError("f must be at least every current capacity factor 1/c_j");
      }
    }
  }
  std::vector<double> out;
  out.reserve(sizes.size());
  for (auto d : sizes) out.push_back(f * (static_cast<double>(d) / static_cast<double>(d_star)));
  return out;
}

CostFit calibrate(std::span<const CostSample> samples) {
  if (samples.size() < 2) throw ConfigError("calibration needs at least two measurements");
  std::set<double> distinct_s;
  std::set<double> distinct_d;
  for (const auto& x : samples) {
    distinct_s.insert(x.blocks);
    distinct_d.insert(x.units);
  }
  // normal equations for time = c*d + t*s
  double dd = 0, ds = 0, ss = 0, dt = 0, st = 0;
  for (const auto& x : samples) {
    dd += x.units * x.units;
    ds += x.units * x.blocks;
    ss += x.blocks * x.blocks;
    dt += x.units * x.time;
    st += x.blocks * x.time;
  }
  const double det = dd * ss - ds * ds;
  const double scale = std::max(dd * ss, 1e-300);
  if (distinct_s.size() >= 2 && std::abs(det) > 1e-12 * scale) {
    CostFit fit;
    fit.c = (dt * ss - ds * st) / det;
    fit.t_call = (dd * st - ds * dt) / det;
    return fit;
  }
  if (distinct_d.size() >= 2) {
    // block count fixed: fit time = c*d + intercept, the intercept absorbing s*T_call
    const double n = static_cast<double>(samples.size());
    double sd = 0, st2 = 0, sdd = 0, sdt = 0;
    for (const auto& x : samples) {
      sd += x.units;
      st2 += x.time;
      sdd += x.units * x.units;
      sdt += x.units * x.time;
    }
    CostFit fit;
    fit.c = (n * sdt - sd * st2) / (n * sdd - sd * sd);
    return fit;
  }
  throw ConfigError("calibration is under-determined; rerun with varied block counts");
}

}  // namespace accelplug
