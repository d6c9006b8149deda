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

#include "accelplug/kernels.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace accelplug::kernels {

namespace {

/// Runs body(lane) for every lane on an OpenMP team; the first exception
/// thrown by any lane is rethrown after the region.
template <typename Body>
void for_each_lane(unsigned lanes, Body&& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int threads = team_size(lanes);
  const long n = static_cast<long>(lanes);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (long lane = 0; lane < n; ++lane) {
    try {
      body(static_cast<unsigned>(lane));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

unsigned effective_lanes(std::size_t n, unsigned lanes) {
  if (lanes == 0) lanes = 1;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(lanes, n)));
}

}  // namespace

std::pair<std::size_t, std::size_t> lane_range(std::size_t n, unsigned lanes, unsigned lane) {
  const std::size_t begin = n * lane / lanes;
  const std::size_t end = n * (lane + 1) / lanes;
  return {begin, end};
}

int team_size(unsigned lanes) {
#ifdef _OPENMP
  return std::max(1, std::min(static_cast<int>(lanes), omp_get_max_threads()));
#else
  (void)lanes;
  return 1;
#endif
}

std::vector<Message> generate(const Algorithm& algorithm, std::span<const EdgeTriplet> triplets,
                              unsigned lanes) {
  std::vector<Message> out(triplets.size());
  const unsigned l = effective_lanes(triplets.size(), lanes);
  for_each_lane(l, [&](unsigned lane) {
    auto [b, e] = lane_range(triplets.size(), l, lane);
    for (std::size_t i = b; i < e; ++i) out[i] = algorithm.generate(triplets[i]);
  });
  return out;
}

std::vector<Message> merge(const Algorithm& algorithm, std::span<const Message> messages,
                           unsigned lanes) {
  const unsigned l = effective_lanes(messages.size(), lanes);
  std::vector<MessageSet> partial(l);
  for_each_lane(l, [&](unsigned lane) {
    auto [b, e] = lane_range(messages.size(), l, lane);
    partial[lane] = msg_merge(algorithm, messages.subspan(b, e - b));
  });
  if (l == 1) return std::move(partial.front().entries);

  // k-way fold in lane order; each partial is sorted by target
  std::vector<Message> out;
  std::vector<std::size_t> pos(l, 0);
  for (;;) {
    bool any = false;
    VertexId next = 0;
    for (unsigned k = 0; k < l; ++k) {
      if (pos[k] < partial[k].entries.size()) {
        VertexId t = partial[k].entries[pos[k]].target;
        if (!any || t < next) next = t;
        any = true;
      }
    }
    if (!any) break;
    bool first = true;
    for (unsigned k = 0; k < l; ++k) {
      auto& entries = partial[k].entries;
      if (pos[k] < entries.size() && entries[pos[k]].target == next) {
        if (first) {
          out.push_back(std::move(entries[pos[k]]));
          first = false;
        } else {
          algorithm.combine(out.back().payload, entries[pos[k]].payload);
        }
        ++pos[k];
      }
    }
  }
  return out;
}

std::vector<ApplyResult> apply(const Algorithm& algorithm, const Partition& partition,
                               std::span<const ApplyItem> items, unsigned lanes) {
  std::vector<ApplyResult> out(items.size());
  const unsigned l = effective_lanes(items.size(), lanes);
  for_each_lane(l, [&](unsigned lane) {
    auto [b, e] = lane_range(items.size(), l, lane);
    auto chunk = apply_items(algorithm, partition, items.subspan(b, e - b));
    std::move(chunk.begin(), chunk.end(), out.begin() + static_cast<std::ptrdiff_t>(b));
  });
  return out;
}

}  // namespace accelplug::kernels
