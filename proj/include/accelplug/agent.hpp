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

#ifndef ACCELPLUG_AGENT_HPP
#define ACCELPLUG_AGENT_HPP

#include <atomic>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "accelplug/accel_daemon.hpp"
#include "accelplug/algo_template.hpp"
#include "accelplug/shared_region.hpp"
#include "accelplug/sync.hpp"

namespace accelplug {

enum class AgentPhase { Disconnected, Connected, InIteration, Closed };
std::string_view to_string(AgentPhase phase);

enum class Direction { PushToUpper, PullFromUpper };

/// The agent's view of the upper system.
class UpperLink {
 public:
  virtual ~UpperLink() = default;
  /// Current value of a vertex for a pull.
  virtual AttributeValue fetch(VertexId id) = 0;
  /// Write-back of an updated vertex to the authoritative store.
  virtual void upload(VertexId id, const AttributeValue& attr) = 0;
};

struct AgentOptions {
  std::size_t block_size = 256;  // slot capacity, in items
  double download_cost = 0.01;   // simulated time per item moved in
  double upload_cost = 0.01;     // simulated time per item moved out
  bool enable_cache = false;
  std::size_t cache_capacity = 0;
  double cache_decay = SyncCache::kDefaultDecay;
  double cache_boost = SyncCache::kDefaultBoost;
};

/// Simulated-time account of one pass.
struct PassStats {
  OpKind op = OpKind::Gen;
  std::size_t blocks = 0;
  std::size_t units = 0;
  double t_download = 0.0;  // busy time summed over daemons
  double t_compute = 0.0;
  double t_upload = 0.0;
  double span = 0.0;        // slowest daemon's pipeline span
};

/// Counters accumulated between two take_stats() calls.
struct AgentStats {
  double t_download = 0.0;
  double t_compute = 0.0;
  double t_upload = 0.0;
  double node_time = 0.0;  // sum of pass spans
  std::size_t blocks = 0;
  std::size_t units = 0;
  std::uint64_t uploads = 0;
  std::uint64_t uploads_avoided = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

/// Per-node bridge between the upper system and the node's daemons.
///
///   connect -> update(pull) -> request(Gen/Merge/Apply)... -> update(push)
///   -> disconnect, and shutdown once at the end.
///
/// Messages produced by Gen are left in the outbox; the upper system routes
/// them to the owners' inboxes before Merge.
class Agent {
 public:
  Agent(Partition& partition, std::shared_ptr<const Algorithm> algorithm,
        ChannelRegistry& registry, AgentOptions options = {});
  ~Agent();
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  int node_id() const { return partition_.node_id(); }
  AgentPhase phase() const { return phase_.load(); }

  void connect(const std::vector<AcceleratorProfile>& profiles);
  void disconnect();
  void shutdown();

  /// Places a block in the New-role buffer of region `key`.
  void transfer(BlockContent block, ChannelKey key);
  void update(Direction direction, UpperLink& upper);
  void request(OpKind op);

  // Lazy-upload round pieces (cache enabled).
  VertexSet needed() const;
  void publish_needed(GlobalQueryQueue& gqq);
  VertexSet upload_queried(const GlobalQueryQueue& gqq, GlobalDataQueue& gdq,
                           AttributeStore& store);
  void refresh_from(const GlobalDataQueue& gdq);
  void end_round();

  /// Every out-edge of this iteration's updated vertices and of the next
  /// frontier stays on this node.
  bool closed() const;
  /// Local convergence vote for the last Apply.
  bool locally_converged() const;
  /// Called at each iteration boundary.
  void end_iteration();

  const VertexSet& frontier() const { return frontier_; }
  void set_frontier(VertexSet frontier) { frontier_ = std::move(frontier); }
  const VertexSet& updated() const { return updated_; }
  std::vector<Message>& outbox() { return outbox_; }
  std::vector<Message>& inbox() { return inbox_; }
  const MessageSet& merged() const { return merged_; }
  std::size_t dirty_count() const;

  std::vector<ChannelKey> keys() const;
  std::vector<std::shared_ptr<SharedRegion>> regions() const { return regions_; }
  const std::vector<std::unique_ptr<Daemon>>& daemons() const { return daemons_; }
  const std::vector<PassStats>& passes() const { return passes_; }
  const SyncCache* cache() const { return cache_ ? &*cache_ : nullptr; }
  std::size_t block_size() const { return options_.block_size; }
  void set_block_size(std::size_t b);
  AgentStats take_stats();

 private:
  void require_connected(const char* what) const;
  std::vector<BlockContent> run_pass(OpKind op, std::vector<BlockContent> blocks);
  void drive(std::size_t daemon, OpKind op, std::vector<BlockContent>& blocks,
             std::vector<BlockContent>& outputs);
  void record_pass(OpKind op, const std::vector<BlockContent>& inputs,
                   const std::vector<BlockContent>& outputs,
                   const std::vector<std::size_t>& in_units);
  void mark_dirty(VertexId id, const AttributeValue& attr);

  Partition& partition_;
  std::shared_ptr<const Algorithm> algorithm_;
  ChannelRegistry& registry_;
  AgentOptions options_;
  std::atomic<AgentPhase> phase_{AgentPhase::Disconnected};

  std::vector<std::shared_ptr<SharedRegion>> regions_;
  std::vector<std::unique_ptr<Daemon>> daemons_;
  std::uint64_t seq_ = 0;

  VertexSet frontier_;
  VertexSet updated_;
  std::vector<Message> outbox_;
  std::vector<Message> inbox_;
  MessageSet merged_;
  std::size_t last_active_ = 0;
  double last_residual_ = 0.0;
  bool applied_ = false;

  std::optional<SyncCache> cache_;
  std::set<VertexId> dirty_;  // cache disabled
  bool published_ = false;

  std::vector<PassStats> passes_;
  AgentStats stats_;
  std::uint64_t hits_seen_ = 0;
  std::uint64_t misses_seen_ = 0;
};

}  // namespace accelplug

#endif  // ACCELPLUG_AGENT_HPP
