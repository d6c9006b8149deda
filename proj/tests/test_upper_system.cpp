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

#include <atomic>
#include <regex>
#include <sstream>
#include <thread>

#include "accelplug/generators.hpp"
#include "accelplug/upper_system.hpp"

using namespace accelplug;

namespace {

RunResult run_on(const EdgeList& g, std::size_t m, std::shared_ptr<const Algorithm> alg,
                 const EngineConfig& cfg) {
  return run(partition_graph(g, even_sizes(g.vertices.size(), m)), std::move(alg), cfg);
}

bool same_attributes(const std::map<VertexId, AttributeValue>& a,
                     const std::map<VertexId, AttributeValue>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [id, v] : a) {
    auto it = b.find(id);
    if (it == b.end() || !attributes_match(v, it->second, 1e-9)) return false;
  }
  return true;
}

std::string without_wall(const std::string& records) {
  return std::regex_replace(records, std::regex(" wall_ms=[^ \n]*"), "");
}

std::vector<EdgeList> small_corpus() {
  return {generate_graph({GraphKind::Path, 12}),
          generate_graph({GraphKind::Cycle, 9, 2, 0.0, 1, true}),
          generate_graph({GraphKind::Star, 10}),
          generate_graph({GraphKind::Components, 24, 2, 0.15, 3, true}),
          generate_graph({GraphKind::Components, 32, 4, 0.2, 4}),
          generate_graph({GraphKind::Random, 60, 2, 0.05, 5, true})};
}

}  // namespace

TEST_CASE("round barrier") {
  RoundBarrier b(3, std::chrono::milliseconds(5000));
  std::atomic<int> completions{0};
  std::atomic<int> passed{0};
  {
    std::vector<std::jthread> ts;
    for (int j = 0; j < 3; ++j) {
      ts.emplace_back([&, j] {
        for (int r = 0; r < 50; ++r) {
          b.arrive_and_wait(j, "x", [&] { ++completions; });
          ++passed;
        }
      });
    }
  }
  CHECK(completions == 50);
  CHECK(passed == 150);
  CHECK_FALSE(b.broken());
}

TEST_CASE("barrier timeout names the straggler") {
  RoundBarrier b(3, std::chrono::milliseconds(100));
  std::string message;
  {
    std::jthread t([&] {
      try {
        b.arrive_and_wait(0, "data");
      } catch (const BarrierBroken& e) {
        message = e.what();
      }
    });
    try {
      b.arrive_and_wait(2, "data");
    } catch (const BarrierBroken&) {
    }
  }
  CHECK(message == "barrier timeout at data: waiting for node 1");
  CHECK(b.broken());
  CHECK_THROWS_AS(b.arrive_and_wait(1, "data"), BarrierBroken);
}

TEST_CASE("engine reports a stalled node") {
  auto g = generate_graph({GraphKind::Path, 8});
  EngineConfig cfg;
  cfg.barrier_timeout = std::chrono::milliseconds(200);
  cfg.before_iteration = [](int node, int iter) {
    if (node == 1 && iter == 2) std::this_thread::sleep_for(std::chrono::milliseconds(800));
  };
  try {
    run_on(g, 2, make_algorithm(AlgorithmKind::Sssp, g.vertices), cfg);
    FAIL("expected a barrier timeout");
  } catch (const BarrierBroken& e) {
    CHECK(std::string(e.what()).find("waiting for node 1") != std::string::npos);
  }
}

TEST_CASE("convergence vote") {
  std::vector<std::optional<bool>> tt{true, true}, tf{true, false}, missing{true, std::nullopt};
  CHECK(convergence_vote(tt));
  CHECK_FALSE(convergence_vote(tf));
  CHECK_THROWS_AS(convergence_vote(missing), Error);
}

TEST_CASE("run examples") {
  auto two = generate_graph({GraphKind::Cycle, 2});
  auto r = run_on(two, 1, make_algorithm(AlgorithmKind::PageRank, two.vertices), {});
  CHECK(r.converged);
  CHECK(std::get<Rank>(r.attributes.at(0)).rank == doctest::Approx(1.0));
  CHECK(std::get<Rank>(r.attributes.at(1)).rank == doctest::Approx(1.0));

  // LP flips forever on a 2-cycle
  r = run_on(two, 2, make_algorithm(AlgorithmKind::LabelPropagation, two.vertices), {});
  CHECK_FALSE(r.converged);
  CHECK(r.metrics.iterations.size() == 15);
  CHECK_FALSE(r.metrics.converged);

  auto g = generate_graph({GraphKind::Random, 80, 2, 0.04, 12, true});
  auto sssp = make_algorithm(AlgorithmKind::Sssp, g.vertices);
  EngineConfig bsp, gas;
  gas.model = ComputationModel::Gas;
  auto rb = run_on(g, 3, sssp, bsp);
  auto rg = run_on(g, 3, sssp, gas);
  CHECK(rb.attributes == rg.attributes);
  CHECK(rb.metrics.iterations.size() == rg.metrics.iterations.size());

  // a source with no out-edges: nothing is ever active after iteration 1
  auto lonely = make_edge_list({{1, 0, 1.0}, {2, 1, 1.0}});
  r = run_on(lonely, 2, make_algorithm(AlgorithmKind::Sssp, lonely.vertices, {{0}, 0}), {});
  CHECK(r.converged);
  CHECK(r.metrics.iterations.size() == 1);
}

TEST_CASE("bad configurations") {
  auto g = generate_graph({GraphKind::Path, 4});
  auto alg = make_algorithm(AlgorithmKind::Sssp, g.vertices);
  EngineConfig cfg;
  cfg.block_size = 0;
  CHECK_THROWS_AS(run_on(g, 1, alg, cfg), ConfigError);
  cfg = {};
  cfg.node_daemons = {{AcceleratorProfile::cpu_like()}};
  CHECK_THROWS_AS(run_on(g, 2, alg, cfg), ConfigError);
  cfg.node_daemons = {{AcceleratorProfile::cpu_like()}, {}};
  CHECK_THROWS_AS(run_on(g, 2, alg, cfg), ConfigError);
  CHECK_THROWS_AS(parse_model("async"), ConfigError);
}

TEST_CASE("engine properties over a small corpus") {
  for (const auto& g : small_corpus()) {
    for (auto kind : {AlgorithmKind::Sssp, AlgorithmKind::PageRank, AlgorithmKind::LabelPropagation}) {
      auto alg = make_algorithm(kind, g.vertices);
      auto ref = run_reference(*alg, g);
      for (std::size_t m : {1u, 2u, 4u}) {
        for (int flags = 0; flags < 4; ++flags) {
          EngineConfig cfg;
          cfg.enable_cache = flags & 1;
          cfg.cache_capacity = 3;
          cfg.enable_skip = flags & 2;
          cfg.block_size = 5;
          cfg.check_mirrors = true;
          cfg.record_audit = true;
          cfg.node_daemons.assign(m, {AcceleratorProfile::cpu_like(), AcceleratorProfile{3, 0.02, 0.5}});
          auto r = run_on(g, m, alg, cfg);
          INFO("kind=", to_string(kind), " m=", m, " flags=", flags);
          CHECK(same_attributes(r.attributes, ref.attributes));
          CHECK(r.converged == ref.converged);
          CHECK(r.metrics.iterations.size() == static_cast<std::size_t>(ref.iterations));
          CHECK(r.flush_complete);
          CHECK(r.region_copies == 0);
          for (int n : r.init_counts) CHECK(n == 1);
          for (const auto& t : r.traces) CHECK(trace_conforms(t));
          for (const auto& round : r.audit)
            for (const auto& up : round.uploaded)
              for (VertexId id : up)
                if (cfg.enable_cache) CHECK(std::binary_search(round.gqq.begin(), round.gqq.end(), id));
        }
      }
    }
  }
}

TEST_CASE("cache capacity never changes results") {
  auto g = generate_graph({GraphKind::Random, 70, 2, 0.06, 21, true});
  for (auto kind : {AlgorithmKind::Sssp, AlgorithmKind::PageRank, AlgorithmKind::LabelPropagation}) {
    auto alg = make_algorithm(kind, g.vertices);
    EngineConfig plain;
    auto base = run_on(g, 3, alg, plain);
    for (std::size_t cap : {0u, 1u, 4u, 1000u}) {
      EngineConfig cfg;
      cfg.enable_cache = true;
      cfg.cache_capacity = cap;
      cfg.check_mirrors = true;
      auto r = run_on(g, 3, alg, cfg);
      CHECK(same_attributes(r.attributes, base.attributes));
      CHECK(r.metrics.iterations.size() == base.metrics.iterations.size());
    }
  }
}

TEST_CASE("skipping on disconnected components") {
  auto g = generate_graph({GraphKind::Components, 40, 2, 0.1, 6, true});
  std::vector<VertexId> sources{0, 25};
  auto alg = make_algorithm(AlgorithmKind::Sssp, g.vertices, {sources, 0});
  EngineConfig cfg;
  cfg.enable_skip = true;
  cfg.enable_cache = true;
  auto r = run_on(g, 2, alg, cfg);
  CHECK(r.converged);
  std::size_t intermediate = 0;
  for (const auto& it : r.metrics.iterations) {
    if (it.final_round) continue;
    ++intermediate;
    CHECK(it.skipped);
    CHECK(it.cross_messages == 0);
  }
  CHECK(intermediate > 0);
  CHECK(r.metrics.skipped_rounds == static_cast<int>(intermediate));
  EngineConfig off;
  CHECK(same_attributes(r.attributes, run_on(g, 2, alg, off).attributes));
}

TEST_CASE("skipping is decided per round") {
  // 0..4 on node 0, 5..9 on node 1; only 4 -> 5 crosses
  std::vector<Edge> edges;
  for (VertexId i = 0; i < 9; ++i) edges.push_back({i, i + 1, 1.0});
  auto g = make_edge_list(std::move(edges));
  auto alg = make_algorithm(AlgorithmKind::Sssp, g.vertices, {{0}, 0});
  EngineConfig cfg;
  cfg.enable_skip = true;
  auto r = run_on(g, 2, alg, cfg);
  // iteration t settles vertex t; the round after 4 is updated is not closed
  REQUIRE(r.metrics.iterations.size() >= 6);
  for (int t = 1; t <= 3; ++t) CHECK(r.metrics.iterations[t - 1].skipped);
  CHECK_FALSE(r.metrics.iterations[3].skipped);
  EngineConfig off;
  CHECK(same_attributes(r.attributes, run_on(g, 2, alg, off).attributes));
}

TEST_CASE("global_sync moves exactly the queried value") {
  auto g = make_edge_list({{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  auto alg = std::make_shared<SsspAlgorithm>(std::vector<VertexId>{0});
  std::vector<std::int64_t> split{2, 2};
  auto parts = partition_graph(g, split);
  ChannelRegistry reg;
  AttributeStore store;
  std::vector<std::unique_ptr<Agent>> agents;
  AgentOptions opt;
  opt.enable_cache = true;
  opt.cache_capacity = 8;
  for (auto& p : parts.partitions) {
    initialize_partition(p, *alg);
    for (const auto& v : p.vertices()) store.put(v.id, v.attr);
    agents.push_back(std::make_unique<Agent>(p, alg, reg, opt));
    agents.back()->connect({AcceleratorProfile::cpu_like()});
  }
  // node 1 updates vertex 2; node 0 will need it once 1 is on its frontier
  Distance d;
  d.d[0] = 5.0;
  agents[1]->inbox() = {{2, d}};
  agents[1]->request(OpKind::Merge);
  agents[1]->request(OpKind::Apply);
  agents[0]->set_frontier({1});
  std::vector<Agent*> raw{agents[0].get(), agents[1].get()};
  auto res = global_sync(raw, store, true);
  CHECK(res.gqq == VertexSet{2});
  CHECK(res.uploaded[0].empty());
  CHECK(res.uploaded[1] == VertexSet{2});
  CHECK(*parts.partitions[0].mirror(2) == AttributeValue{d});

  // the plain path pushes every dirty value, queried or not
  for (auto& a : agents) a->end_iteration();
  agents[1]->inbox() = {{3, d}};
  agents[1]->request(OpKind::Merge);
  agents[1]->request(OpKind::Apply);
  res = global_sync(raw, store, false);
  CHECK(res.uploaded[0].empty());
  CHECK(res.uploaded[1] == VertexSet{3});
  CHECK(store.get(3) == AttributeValue{d});
}

TEST_CASE("plain and cached sync agree") {
  for (const auto& g : small_corpus()) {
    auto alg = make_algorithm(AlgorithmKind::LabelPropagation, g.vertices);
    EngineConfig plain, cached;
    cached.enable_cache = true;
    cached.cache_capacity = 2;
    CHECK(same_attributes(run_on(g, 3, alg, plain).attributes, run_on(g, 3, alg, cached).attributes));
  }
}

TEST_CASE("lane count does not change results") {
  auto g = generate_graph({GraphKind::Random, 90, 2, 0.05, 33, true});
  for (auto kind : {AlgorithmKind::Sssp, AlgorithmKind::PageRank, AlgorithmKind::LabelPropagation}) {
    auto alg = make_algorithm(kind, g.vertices);
    std::optional<std::map<VertexId, AttributeValue>> first;
    for (unsigned lanes : {1u, 8u, 64u}) {
      EngineConfig cfg;
      cfg.node_daemons.assign(2, {AcceleratorProfile{lanes, 0.01, 1.0}});
      auto r = run_on(g, 2, alg, cfg);
      if (!first) {
        first = r.attributes;
        continue;
      }
      for (const auto& [id, v] : *first) CHECK(attributes_match(v, r.attributes.at(id), 1e-12));
    }
  }
}

TEST_CASE("metrics records") {
  auto g = generate_graph({GraphKind::Random, 50, 2, 0.08, 2});
  auto alg = make_algorithm(AlgorithmKind::PageRank, g.vertices);
  EngineConfig cfg;
  cfg.enable_cache = true;
  cfg.enable_skip = true;
  auto a = run_on(g, 2, alg, cfg);
  auto b = run_on(g, 2, alg, cfg);
  const auto ra = to_records(a.metrics);
  CHECK(without_wall(ra) == without_wall(to_records(b.metrics)));
  CHECK(a.attributes == b.attributes);

  std::istringstream in(ra);
  std::string line;
  std::size_t iterations = 0;
  const std::regex field("[a-z_]+=[^ ]*");
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string w;
    std::map<std::string, std::string> kv;
    while (words >> w) {
      CHECK(std::regex_match(w, field));
      kv[w.substr(0, w.find('='))] = w.substr(w.find('=') + 1);
    }
    if (kv["record"] == "iteration") {
      ++iterations;
      for (const char* key : {"iter", "model", "t_download", "t_compute", "t_upload", "skipped", "cache_hits",
                              "cache_misses", "uploads", "uploads_avoided", "converged"})
        CHECK(kv.count(key) == 1);
      CHECK(kv["model"] == "bsp");
    } else {
      CHECK(kv["record"] == "summary");
      CHECK(kv["iterations"] == std::to_string(a.metrics.iterations.size()));
    }
  }
  CHECK(iterations == a.metrics.iterations.size());

  double sum = 0.0;
  for (const auto& it : a.metrics.iterations) {
    sum += it.t_total;
    CHECK(it.t_total == *std::max_element(it.node_time.begin(), it.node_time.end()));
  }
  CHECK(a.metrics.sim_time == doctest::Approx(sum));
}

TEST_CASE("flush leaves no stale value") {
  auto g = generate_graph({GraphKind::Random, 60, 2, 0.05, 17, true});
  auto alg = make_algorithm(AlgorithmKind::Sssp, g.vertices);
  EngineConfig cfg;
  cfg.enable_cache = true;
  cfg.cache_capacity = 1;
  auto r = run_on(g, 4, alg, cfg);
  CHECK(r.flush_complete);
  auto ref = run_reference(*alg, g);
  CHECK(r.attributes == ref.attributes);
  CHECK(r.metrics.flush_uploads > 0);
}

TEST_CASE("auto block size follows the cost model") {
  auto g = generate_graph({GraphKind::Random, 200, 2, 0.05, 3});
  auto alg = make_algorithm(AlgorithmKind::PageRank, g.vertices, {{}, 2});
  EngineConfig cfg;
  cfg.node_daemons.assign(2, {AcceleratorProfile::cpu_like()});
  auto pg = partition_graph(g, even_sizes(200, 2));
  std::vector<std::size_t> edges;
  for (const auto& p : pg.partitions) edges.push_back(p.edges().size());
  auto r = run(std::move(pg), alg, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    PipelineCostModel m{cfg.download_cost, 0.05, cfg.upload_cost, 1.0, edges[j]};
    auto plan = choose_block_count(m).plan;
    CHECK(r.metrics.block_size[j] == plan.b);
    CHECK(r.metrics.block_count[j] == plan.s);
  }
}
