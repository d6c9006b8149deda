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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "accelplug/algo_template.hpp"
#include "accelplug/generators.hpp"

using namespace accelplug;

namespace {

EdgeTriplet triplet(VertexId s, VertexId d, double w, AttributeValue sa, AttributeValue da) {
  return EdgeTriplet{Edge{s, d, w}, std::move(sa), std::move(da)};
}

Distance dist0(double v) {
  Distance d;
  d.d[0] = v;
  return d;
}

LabelVotes votes(std::vector<std::pair<std::uint64_t, std::uint64_t>> c) { return LabelVotes{std::move(c)}; }

// Dijkstra from one source; independent of the relaxation rounds under test.
std::map<VertexId, double> dijkstra(const EdgeList& g, VertexId source) {
  std::map<VertexId, std::vector<std::pair<VertexId, double>>> adj;
  for (const auto& e : g.edges) adj[e.src].push_back({e.dst, e.weight});
  std::map<VertexId, double> dist;
  for (auto v : g.vertices) dist[v] = kInfinity;
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
    }
  }
  return dist;
}

// Dense synchronous PageRank: r' = 0.15 + 0.85 * sum(r_u / deg_u).
std::map<VertexId, double> power_iteration(const EdgeList& g, int& iterations) {
  std::map<VertexId, double> r, deg;
  for (auto v : g.vertices) r[v] = 1.0;
  for (const auto& e : g.edges) deg[e.src] += 1.0;
  for (iterations = 1; iterations <= 100; ++iterations) {
    std::map<VertexId, double> in;
    for (const auto& e : g.edges) in[e.dst] += r[e.src] / deg[e.src];
    double delta = 0.0;
    for (auto v : g.vertices) {
      const double next = 0.15 + 0.85 * in[v];
      delta = std::max(delta, std::abs(next - r[v]));
      r[v] = next;
    }
    if (delta < 1e-9) break;
  }
  return r;
}

// Synchronous label propagation: every vertex that heard from an updated
// neighbour takes the most frequent incoming label, smallest on ties.
std::map<VertexId, std::uint64_t> label_rounds(const EdgeList& g, int rounds) {
  std::map<VertexId, std::uint64_t> label;
  for (auto v : g.vertices) label[v] = v;
  std::set<VertexId> active(g.vertices.begin(), g.vertices.end());
  for (int r = 0; r < rounds && !active.empty(); ++r) {
    std::map<VertexId, std::map<std::uint64_t, int>> heard;
    for (const auto& e : g.edges)
      if (active.count(e.src)) heard[e.dst][label[e.src]]++;
    std::set<VertexId> next;
    auto old = label;
    for (auto& [v, h] : heard) {
      std::uint64_t best = 0;
      int count = -1;
      for (auto [l, c] : h)
        if (c > count) best = l, count = c;
      if (best != old[v]) next.insert(v);
      label[v] = best;
    }
    active = next;
  }
  return label;
}

}  // namespace

TEST_CASE("msg_gen examples") {
  SsspAlgorithm sssp({0});
  std::vector<TripletBlock> blocks{{triplet(0, 1, 2.0, dist0(0.0), Distance{})}};
  auto out = msg_gen(sssp, blocks);
  REQUIRE(out.size() == 1);
  CHECK(out[0].target == 1);
  CHECK(std::get<Distance>(out[0].payload) == dist0(2.0));

  PageRankAlgorithm pr;
  blocks = {{triplet(0, 1, 1.0, Rank{1.0, 2}, Rank{1.0, 0})}};
  out = msg_gen(pr, blocks);
  REQUIRE(out.size() == 1);
  CHECK(std::get<double>(out[0].payload) == 0.5);

  LabelPropagationAlgorithm lp;
  blocks = {{triplet(0, 2, 1.0, Label{7}, Label{2})}, {triplet(1, 2, 1.0, Label{7}, Label{2})}};
  out = msg_gen(lp, blocks);
  REQUIRE(out.size() == 2);
  for (const auto& m : out) {
    CHECK(m.target == 2);
    CHECK(std::get<LabelVotes>(m.payload) == votes({{7, 1}}));
  }
}

TEST_CASE("msg_gen is pure") {
  LabelPropagationAlgorithm lp;
  auto g = generate_graph({GraphKind::Random, 40, 2, 0.1, 9});
  std::vector<std::int64_t> one{40};
  auto p = partition_graph(g, one);
  initialize_partition(p.partitions[0], lp);
  auto blocks = build_blocks(p.partitions[0], g.vertices, 7);
  auto a = msg_gen(lp, blocks);
  auto b = msg_gen(lp, blocks);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].target == b[i].target);
    CHECK(a[i].payload == b[i].payload);
  }
}

TEST_CASE("msg_merge examples") {
  SsspAlgorithm sssp({0});
  std::vector<Message> in{{4, dist0(3.0)}, {4, dist0(1.0)}};
  auto m = msg_merge(sssp, in);
  REQUIRE(m.size() == 1);
  CHECK(std::get<Distance>(*m.find(4)) == dist0(1.0));

  PageRankAlgorithm pr;
  in = {{4, 0.5}, {4, 0.25}};
  m = msg_merge(pr, in);
  CHECK(std::get<double>(*m.find(4)) == 0.75);

  LabelPropagationAlgorithm lp;
  in = {{4, votes({{7, 1}})}, {4, votes({{9, 2}})}};
  m = msg_merge(lp, in);
  CHECK(std::get<LabelVotes>(*m.find(4)) == votes({{7, 1}, {9, 2}}));
  CHECK(m.find(5) == nullptr);
  CHECK(msg_merge(lp, {}).empty());
}

TEST_CASE("msg_merge is order independent") {
  std::mt19937_64 rng(17);
  SsspAlgorithm sssp({0});
  PageRankAlgorithm pr;
  LabelPropagationAlgorithm lp;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Message> s, p, l;
    for (int i = 0; i < 60; ++i) {
      const VertexId t = rng() % 8;
      Distance d;
      for (auto& x : d.d) x = (rng() % 4 == 0) ? kInfinity : static_cast<double>(rng() % 100);
      s.push_back({t, d});
      p.push_back({t, std::ldexp(static_cast<double>(rng() % 1000000), -10)
                          + 1.0 / static_cast<double>(1 + rng() % 7)});
      l.push_back({t, votes({{rng() % 5, 1 + rng() % 3}})});
    }
    auto s0 = msg_merge(sssp, s), p0 = msg_merge(pr, p), l0 = msg_merge(lp, l);
    std::shuffle(s.begin(), s.end(), rng);
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(l.begin(), l.end(), rng);
    auto s1 = msg_merge(sssp, s), p1 = msg_merge(pr, p), l1 = msg_merge(lp, l);
    REQUIRE(s0.size() == s1.size());
    REQUIRE(p0.size() == p1.size());
    REQUIRE(l0.size() == l1.size());
    for (std::size_t i = 0; i < s0.size(); ++i) {
      CHECK(s0.entries[i].target == s1.entries[i].target);
      CHECK(s0.entries[i].payload == s1.entries[i].payload);
      CHECK(l0.entries[i].payload == l1.entries[i].payload);
      const double a = std::get<double>(p0.entries[i].payload);
      const double b = std::get<double>(p1.entries[i].payload);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)));
    }
  }
}

TEST_CASE("msg_apply examples") {
  SsspAlgorithm sssp({0});
  auto g = make_edge_list({{0, 1, 1.0}, {1, 2, 1.0}});
  std::vector<std::int64_t> one{3};
  auto p = partition_graph(g, one);
  auto& part = p.partitions[0];
  initialize_partition(part, sssp);
  std::vector<VertexUpdate> five{{1, dist0(5.0)}};
  apply_updates(part, five, sssp);
  MessageSet msgs{{{1, dist0(5.0)}}};
  auto step = msg_apply(part, msgs, sssp);
  CHECK(step.updates.empty());
  CHECK(step.next_active.empty());

  msgs = MessageSet{{{1, dist0(4.0)}}};
  step = msg_apply(part, msgs, sssp);
  REQUIRE(step.updates.size() == 1);
  CHECK(step.next_active == VertexSet{1});

  msgs = MessageSet{{{9, dist0(4.0)}}};
  CHECK_THROWS(msg_apply(part, msgs, sssp));

  // PageRank: a vertex fed only by a sink hears nothing and settles at 0.15
  PageRankAlgorithm pr;
  initialize_partition(part, pr);
  step = msg_apply(part, MessageSet{}, pr);
  for (const auto& u : step.updates) CHECK(std::get<Rank>(u.attr).rank == doctest::Approx(0.15).epsilon(1e-12));

  LabelPropagationAlgorithm lp;
  auto out = lp.apply(Label{3}, nullptr);
  CHECK(std::get<Label>(out.attr).label == 3);
  CHECK_FALSE(out.active);
  Payload vote = votes({{1, 2}, {3, 1}});
  out = lp.apply(Label{3}, &vote);
  CHECK(std::get<Label>(out.attr).label == 1);
  CHECK(out.active);
  Payload tie = votes({{4, 2}, {6, 2}});
  CHECK(std::get<Label>(lp.apply(Label{9}, &tie).attr).label == 4);
}

TEST_CASE("run_reference small cases") {
  SsspAlgorithm sssp({0});
  auto path = generate_graph({GraphKind::Path, 3});
  auto r = run_reference(sssp, path);
  CHECK(r.converged);
  CHECK(std::get<Distance>(r.attributes.at(2)).d[0] == 2.0);

  PageRankAlgorithm pr;
  auto two = generate_graph({GraphKind::Cycle, 2});
  r = run_reference(pr, two);
  CHECK(r.converged);
  CHECK(std::get<Rank>(r.attributes.at(0)).rank == std::get<Rank>(r.attributes.at(1)).rank);
  CHECK(std::get<Rank>(r.attributes.at(0)).rank == doctest::Approx(1.0));

  LabelPropagationAlgorithm lp;
  EdgeList k3 = make_edge_list({{1, 2, 1}, {1, 3, 1}, {2, 1, 1}, {2, 3, 1}, {3, 1, 1}, {3, 2, 1}});
  r = run_reference(lp, k3);
  CHECK(r.converged);
  CHECK(r.iterations <= 15);
  for (auto v : {1, 2, 3}) CHECK(std::get<Label>(r.attributes.at(v)).label == 1);
}

TEST_CASE("run_reference agrees with independent oracles") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    GraphSpec spec{trial % 2 ? GraphKind::Random : GraphKind::Components, 20 + rng() % 60, 2, 0.06, rng(),
                   true};
    auto g = generate_graph(spec);
    std::vector<VertexId> sources{g.vertices[0], g.vertices[g.vertices.size() / 2]};
    SsspAlgorithm sssp(sources);
    auto r = run_reference(sssp, g);
    CHECK(r.converged);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      auto want = dijkstra(g, sources[s]);
      for (auto v : g.vertices) CHECK(std::get<Distance>(r.attributes.at(v)).d[s] == want[v]);
    }

    PageRankAlgorithm pr;
    auto rp = run_reference(pr, g);
    int iters = 0;
    auto ranks = power_iteration(g, iters);
    CHECK(rp.iterations == std::min(iters, 100));
    double total = 0.0;
    for (auto v : g.vertices) {
      const double got = std::get<Rank>(rp.attributes.at(v)).rank;
      CHECK(got == doctest::Approx(ranks[v]).epsilon(1e-12));
      total += got;
    }
    // every vertex lies on the spanning cycle, so nothing dangles
    if (rp.converged) CHECK(total == doctest::Approx(static_cast<double>(g.vertices.size())).epsilon(1e-6));

    LabelPropagationAlgorithm lp;
    auto rl = run_reference(lp, g);
    auto labels = label_rounds(g, 15);
    for (auto v : g.vertices) CHECK(std::get<Label>(rl.attributes.at(v)).label == labels[v]);
  }
}

TEST_CASE("SSSP distances never increase") {
  auto g = generate_graph({GraphKind::Random, 80, 2, 0.05, 4, true});
  SsspAlgorithm sssp({0, 40});
  std::map<VertexId, Distance> last;
  for (int cap = 1; cap <= 12; ++cap) {
    SsspAlgorithm capped({0, 40}, cap);
    auto r = run_reference(capped, g);
    for (auto& [v, a] : r.attributes) {
      const auto& d = std::get<Distance>(a);
      if (last.count(v))
        for (std::size_t i = 0; i < kSsspSources; ++i) CHECK(d.d[i] <= last[v].d[i]);
      last[v] = d;
    }
  }
}

TEST_CASE("make_algorithm defaults") {
  VertexSet vs{3, 5, 8, 9, 12};
  auto a = make_algorithm(AlgorithmKind::Sssp, vs);
  auto* s = dynamic_cast<const SsspAlgorithm*>(a.get());
  REQUIRE(s != nullptr);
  CHECK(s->sources() == std::vector<VertexId>{3, 5, 8, 9});
  CHECK(make_algorithm(AlgorithmKind::LabelPropagation, vs)->max_iterations() == 15);
  CHECK(make_algorithm(AlgorithmKind::PageRank, vs, {{}, 7})->max_iterations() == 7);
  CHECK(parse_algorithm_kind("pagerank") == AlgorithmKind::PageRank);
  CHECK_THROWS_AS(parse_algorithm_kind("bfs"), ConfigError);
  CHECK_THROWS_AS(SsspAlgorithm({1, 2, 3, 4, 5}), ConfigError);
}

TEST_CASE("attribute formatting and matching") {
  CHECK(format_attribute(dist0(2.0)) == "2 inf inf inf");
  CHECK(format_attribute(Label{4}) == "4");
  CHECK(format_attribute(Rank{0.5, 1}) == "0.5");
  CHECK(attributes_match(Rank{1.0, 1}, Rank{1.0 + 1e-12, 1}, 1e-9));
  CHECK_FALSE(attributes_match(Rank{1.0, 1}, Rank{1.1, 1}, 1e-9));
  CHECK_FALSE(attributes_match(Label{1}, Rank{1.0, 1}, 1e-9));
}
