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

#include "accelplug/generators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace accelplug {

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "path") return GraphKind::Path;
  if (name == "cycle") return GraphKind::Cycle;
  if (name == "star") return GraphKind::Star;
  if (name == "components") return GraphKind::Components;
  if (name == "random") return GraphKind::Random;
  throw ConfigError("unknown graph kind '" + std::string(name) + "'");
}

namespace {

class Builder {
 public:
  Builder(std::uint64_t seed, bool weighted) : rng_(seed), weighted_(weighted) {}

  void edge(VertexId u, VertexId v) {
    double w = 1.0;
    if (weighted_) w = static_cast<double>(1 + rng_() % 10);
    edges_.push_back(Edge{u, v, w});
  }

  /// Cycle over a shuffled order of [lo, hi), plus every ordered pair with
  /// probability p (geometric skipping over the pair index).
  void random_block(VertexId lo, VertexId hi, double p) {
    const std::uint64_t n = hi - lo;
    if (n == 0) return;
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), lo);
    std::shuffle(order.begin(), order.end(), rng_);
    if (n == 1) {
      edge(lo, lo);
    } else {
      for (std::uint64_t i = 0; i < n; ++i) edge(order[i], order[(i + 1) % n]);
    }
    if (p <= 0.0 || n < 2) return;
    const std::uint64_t pairs = n * (n - 1);
    if (p >= 1.0) {
      for (std::uint64_t idx = 0; idx < pairs; ++idx) pair_edge(lo, n, idx);
      return;
    }
    std::geometric_distribution<std::uint64_t> gap(p);
    for (std::uint64_t idx = gap(rng_); idx < pairs; idx += 1 + gap(rng_)) pair_edge(lo, n, idx);
  }

  EdgeList finish() { return make_edge_list(std::move(edges_)); }

 private:
  void pair_edge(VertexId lo, std::uint64_t n, std::uint64_t idx) {
    const VertexId u = idx / (n - 1);
    VertexId v = idx % (n - 1);
    if (v >= u) ++v;
    edge(lo + u, lo + v);
  }

  std::mt19937_64 rng_;
  bool weighted_;
  std::vector<Edge> edges_;
};

}  // namespace

EdgeList generate_graph(const GraphSpec& spec) {
  if (spec.n < 1) throw ConfigError("n must be at least 1");
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("p must be in [0, 1]");
  Builder b(spec.seed, spec.weighted);
  const std::uint64_t n = spec.n;
  switch (spec.kind) {
    case GraphKind::Path:
      for (VertexId i = 0; i + 1 < n; ++i) b.edge(i, i + 1);
      break;
    case GraphKind::Cycle:
      for (VertexId i = 0; i < n; ++i) b.edge(i, (i + 1) % n);
      break;
    case GraphKind::Star:
      for (VertexId i = 1; i < n; ++i) b.edge(0, i);
      break;
    case GraphKind::Components: {
      if (spec.k < 1 || spec.k > n) throw ConfigError("components needs 1 <= k <= n");
      VertexId lo = 0;
      for (auto size : even_sizes(n, spec.k)) {
        b.random_block(lo, lo + static_cast<VertexId>(size), spec.p);
        lo += static_cast<VertexId>(size);
      }
      break;
    }
    case GraphKind::Random:
      b.random_block(0, n, spec.p);
      break;
  }
  return b.finish();
}

void write_edge_list(std::ostream& out, const EdgeList& graph) {
  const bool weighted =
      std::any_of(graph.edges.begin(), graph.edges.end(), [](const Edge& e) { return e.weight != 1.0; });
  char buf[32];
  for (const auto& e : graph.edges) {
    out << e.src << ' ' << e.dst;
    if (weighted) {
      std::snprintf(buf, sizeof buf, "%.17g", e.weight);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

}  // namespace accelplug
