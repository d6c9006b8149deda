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

#ifndef ACCELPLUG_UPPER_SYSTEM_HPP
#define ACCELPLUG_UPPER_SYSTEM_HPP

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "accelplug/agent.hpp"
#include "accelplug/algo_template.hpp"
#include "accelplug/graph_store.hpp"
#include "accelplug/sync.hpp"

namespace accelplug {

enum class ComputationModel { Bsp, Gas };
std::string_view to_string(ComputationModel model);
ComputationModel parse_model(std::string_view name);

class BarrierBroken : public Error {
 public:
  using Error::Error;
};

/// Reusable barrier for a fixed set of parties. The last party to arrive runs
/// the completion step before anyone is released. A wait longer than the
/// timeout breaks the barrier and reports the parties that never arrived; a
/// broken barrier fails every current and future wait.
class RoundBarrier {
 public:
  RoundBarrier(std::size_t parties, std::chrono::milliseconds timeout);

  void arrive_and_wait(int party, std::string_view where,
                       const std::function<void()>& on_complete = {});
  void abort(const std::string& reason);
  bool broken() const;

 private:
  std::size_t parties_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<bool> arrived_;
  std::size_t count_ = 0;
  std::uint64_t generation_ = 0;
  std::optional<std::string> broken_;
};

/// Logical AND of one vote per node; a missing vote is fatal.
bool convergence_vote(std::span<const std::optional<bool>> votes);

struct EngineConfig {
  ComputationModel model = ComputationModel::Bsp;
  /// Daemon profiles per node; empty means one cpu-like daemon per node.
  std::vector<std::vector<AcceleratorProfile>> node_daemons;
  /// nullopt: per-node block size from the pipeline cost model.
  std::optional<std::size_t> block_size;
  double download_cost = 0.01;
  double upload_cost = 0.01;
  bool enable_cache = false;
  std::size_t cache_capacity = 1024;
  double cache_decay = SyncCache::kDefaultDecay;
  double cache_boost = SyncCache::kDefaultBoost;
  bool enable_skip = false;
  std::chrono::milliseconds barrier_timeout{120000};

  // test instrumentation
  bool check_mirrors = false;  // compare every pulled mirror with its owner
  bool record_audit = false;   // keep per-round query and upload sets
  std::function<void(int node, int iteration)> before_iteration;
};

struct IterationMetrics {
  int iter = 0;
  ComputationModel model = ComputationModel::Bsp;
  double t_download = 0.0;
  double t_compute = 0.0;
  double t_upload = 0.0;
  double t_total = 0.0;  // slowest node
  bool skipped = false;
  bool final_round = false;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t uploads = 0;
  std::uint64_t uploads_avoided = 0;
  bool converged = false;
  std::uint64_t cross_messages = 0;
  std::vector<double> node_time;
  std::vector<std::size_t> node_blocks;
  std::vector<std::size_t> node_units;
  double wall_ms = 0.0;
};

struct RunMetrics {
  ComputationModel model = ComputationModel::Bsp;
  std::vector<IterationMetrics> iterations;
  bool converged = false;
  int skipped_rounds = 0;
  std::vector<std::size_t> block_size;   // per node
  std::vector<std::size_t> block_count;  // per node, planned Gen blocks
  std::uint64_t flush_uploads = 0;
  double sim_time = 0.0;
  double wall_ms = 0.0;
};

/// Line-delimited key=value records: one per iteration, then a summary.
/// Fields whose names start with "wall_" are host timings.
std::string to_records(const RunMetrics& metrics);

struct RoundAudit {
  int iter = 0;
  VertexSet gqq;
  std::vector<VertexSet> uploaded;  // per node
};

struct RunResult {
  std::map<VertexId, AttributeValue> attributes;
  RunMetrics metrics;
  bool converged = false;

  std::vector<std::vector<ControlMessage>> traces;  // one per daemon
  std::uint64_t region_copies = 0;
  std::vector<int> init_counts;  // one per daemon
  std::vector<std::vector<std::size_t>> daemon_blocks;  // per node, per daemon
  std::vector<RoundAudit> audit;
  std::map<VertexId, std::uint64_t> uploads_before_flush;
  /// Authoritative store equals the nodes' final local state.
  bool flush_complete = false;
};

/// Runs `algorithm` over the partitioned graph until convergence or the
/// algorithm's iteration cap.
RunResult run(PartitionedGraph graph, std::shared_ptr<const Algorithm> algorithm,
              const EngineConfig& config);

/// Counting upper-link over the authoritative store; pulls read the round's
/// data queue first when one is given.
class StoreLink : public UpperLink {
 public:
  StoreLink(AttributeStore& store, const GlobalDataQueue* gdq = nullptr)
      : store_(store), gdq_(gdq) {}
  AttributeValue fetch(VertexId id) override;
  void upload(VertexId id, const AttributeValue& attr) override;
  const VertexSet& uploaded() const { return uploaded_; }

 private:
  AttributeStore& store_;
  const GlobalDataQueue* gdq_;
  VertexSet uploaded_;
};

struct SyncRoundResult {
  VertexSet gqq;
  std::vector<VertexSet> uploaded;  // per agent
};

/// One synchronization round over agents that all finished Apply, run in a
/// single thread: the lazy-upload round when `lazy`, otherwise every agent
/// pushes all dirty vertices and then pulls what it needs.
SyncRoundResult global_sync(std::span<Agent* const> agents, AttributeStore& store, bool lazy);

}  // namespace accelplug

#endif  // ACCELPLUG_UPPER_SYSTEM_HPP
