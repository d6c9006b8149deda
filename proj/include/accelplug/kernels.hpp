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

#ifndef ACCELPLUG_KERNELS_HPP
#define ACCELPLUG_KERNELS_HPP

#include <span>
#include <vector>

#include "accelplug/algo_template.hpp"

// Lane-parallel versions of the template operations, as executed by a daemon.
// A block of n items is cut into `lanes` contiguous chunks; chunks run on an
// OpenMP team capped at the host's thread count. The serial counterparts in
// algo_template.hpp are the references these are tested against.
namespace accelplug::kernels {

/// Chunk boundaries [begin, end) for lane `lane` of `lanes` over `n` items.
std::pair<std::size_t, std::size_t> lane_range(std::size_t n, unsigned lanes, unsigned lane);

/// OpenMP threads actually used for `lanes` logical lanes.
int team_size(unsigned lanes);

/// One message per triplet, in triplet order (identical for any lane count).
std::vector<Message> generate(const Algorithm& algorithm, std::span<const EdgeTriplet> triplets,
                              unsigned lanes);

/// Lane-local merge then an in-lane-order fold of the partial sets. Result is
/// sorted by target with one entry per target.
std::vector<Message> merge(const Algorithm& algorithm, std::span<const Message> messages,
                           unsigned lanes);

/// Reads old attributes in place from `partition`; throws on a non-owned id.
std::vector<ApplyResult> apply(const Algorithm& algorithm, const Partition& partition,
                               std::span<const ApplyItem> items, unsigned lanes);

}  // namespace accelplug::kernels

#endif  // ACCELPLUG_KERNELS_HPP
