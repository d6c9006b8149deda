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

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

#include "accelplug/algo_template.hpp"
#include "accelplug/generators.hpp"
#include "accelplug/graph_store.hpp"
#include "accelplug/kernels.hpp"
#include "accelplug/pipeline.hpp"

using namespace accelplug;

namespace {

double best_ms(int reps, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void line(const char* what, const char* variant, double ms, double base) {
  std::printf("%-10s %-12s %10.3f ms  x%.2f\n", what, variant, ms, base / ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs lane-parallel kernels"};
  bool quick = false;
  std::uint64_t n = 20000;
  int reps = 5;
  app.add_flag("--quick", quick, "small sizes, one repetition");
  app.add_option("--n", n, "vertices");
  app.add_option("--reps", reps, "repetitions (best time is reported)");
  CLI11_PARSE(app, argc, argv);
  if (quick) {
    n = 2000;
    reps = 1;
  }

  const EdgeList g = generate_graph({GraphKind::Random, n, 2, 8.0 / static_cast<double>(n), 1, true});
  PartitionedGraph pg = partition_graph(g, std::vector<std::int64_t>{static_cast<std::int64_t>(n)});
  Partition& part = pg.partitions.front();
  std::printf("graph: %zu vertices, %zu edges, threads %d\n", g.vertices.size(), g.edges.size(),
              kernels::team_size(1024));

  for (auto kind : {AlgorithmKind::PageRank, AlgorithmKind::LabelPropagation}) {
    auto algo = make_algorithm(kind, g.vertices);
    initialize_partition(part, *algo);
    const auto blocks = build_blocks(part, g.vertices, g.edges.size());
    const auto& triplets = blocks.front();
    std::printf("-- %s\n", std::string(to_string(kind)).c_str());

    std::vector<Message> msgs;
    const double gen_ref = best_ms(reps, [&] { msgs = msg_gen(*algo, blocks); });
    line("generate", "serial", gen_ref, gen_ref);
    for (unsigned lanes : {1u, 8u, 64u}) {
      const double ms = best_ms(reps, [&] { (void)kernels::generate(*algo, triplets, lanes); });
      line("generate", ("lanes=" + std::to_string(lanes)).c_str(), ms, gen_ref);
    }

    MessageSet merged;
    const double merge_ref = best_ms(reps, [&] { merged = msg_merge(*algo, msgs); });
    line("merge", "serial", merge_ref, merge_ref);
    for (unsigned lanes : {1u, 8u, 64u}) {
      const double ms = best_ms(reps, [&] { (void)kernels::merge(*algo, msgs, lanes); });
      line("merge", ("lanes=" + std::to_string(lanes)).c_str(), ms, merge_ref);
    }

    std::vector<ApplyItem> items;
    for (VertexId id : g.vertices) {
      const Payload* p = merged.find(id);
      items.push_back({id, p ? std::optional<Payload>(*p) : std::nullopt});
    }
    const double apply_ref = best_ms(reps, [&] { (void)apply_items(*algo, part, items); });
    line("apply", "serial", apply_ref, apply_ref);
    for (unsigned lanes : {1u, 8u, 64u}) {
      const double ms = best_ms(reps, [&] { (void)kernels::apply(*algo, part, items, lanes); });
      line("apply", ("lanes=" + std::to_string(lanes)).c_str(), ms, apply_ref);
    }
  }

  std::printf("-- block-count sweep\n");
  const PipelineCostModel model{0.02, 0.58, 0.1, 1970, quick ? 100000u : 10000000u};
  BlockPlan serial, parallel;
  const double sweep_ref = best_ms(reps, [&] { serial = sweep_block_count_serial(model); });
  const double sweep_par = best_ms(reps, [&] { parallel = sweep_block_count(model); });
  line("sweep", "serial", sweep_ref, sweep_ref);
  line("sweep", "openmp", sweep_par, sweep_ref);
  if (serial.s != parallel.s) {
    std::printf("sweep mismatch: serial s=%llu openmp s=%llu\n", static_cast<unsigned long long>(serial.s),
                static_cast<unsigned long long>(parallel.s));
    return 1;
  }
  std::printf("sweep s=%llu b=%llu\n", static_cast<unsigned long long>(serial.s),
              static_cast<unsigned long long>(serial.b));
  return 0;
}
