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

#ifndef ACCELPLUG_GENERATORS_HPP
#define ACCELPLUG_GENERATORS_HPP

#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "accelplug/graph_store.hpp"

namespace accelplug {

enum class GraphKind { Path, Cycle, Star, Components, Random };
GraphKind parse_graph_kind(std::string_view name);

struct GraphSpec {
  GraphKind kind = GraphKind::Path;
  std::uint64_t n = 1;
  std::uint64_t k = 2;   // components
  double p = 0.05;       // extra-edge probability (components, random)
  std::uint64_t seed = 1;
  bool weighted = false; // integer weights in [1, 10]
};

/// path:       i -> i+1
/// cycle:      i -> i+1 mod n
/// star:       0 -> i
/// components: k contiguous id ranges (sizes as even_sizes), each a cycle over
///             a shuffled order plus random intra-range edges; no edge leaves
///             its range
/// random:     a cycle over a shuffled order of all ids plus each ordered
///             pair (u, v), u != v, with probability p
/// Deterministic for a given spec.
EdgeList generate_graph(const GraphSpec& spec);

/// "src dst" lines, or "src dst weight" when any weight differs from 1.
void write_edge_list(std::ostream& out, const EdgeList& graph);

}  // namespace accelplug

#endif  // ACCELPLUG_GENERATORS_HPP
