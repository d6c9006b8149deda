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

#ifndef ACCELPLUG_SYNC_HPP
#define ACCELPLUG_SYNC_HPP

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "accelplug/graph_store.hpp"
#include "accelplug/types.hpp"

namespace accelplug {

struct CacheEntry {
  AttributeValue attr;
  double weight = 0.0;
  bool dirty = false;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t dirty_evictions = 0;
};

/// One eviction as observed: the victim and the smallest weight present.
struct EvictionRecord {
  VertexId id = 0;
  double weight = 0.0;
  bool dirty = false;
  double min_weight = 0.0;
};

/// Weighted-recency vertex cache of one agent. Weights are multiplied by
/// `decay` once per iteration and raised by `boost` on every use. Overflow
/// evicts the entry with the smallest weight (smallest id on ties); a dirty
/// victim is parked in the pending set so its value still reaches the upper
/// system. Capacity 0 caches nothing: reads go straight upstream and writes
/// go straight to pending.
class SyncCache {
 public:
  static constexpr double kDefaultDecay = 0.5;
  static constexpr double kDefaultBoost = 1.0;

  using Fetch = std::function<AttributeValue(VertexId)>;

  explicit SyncCache(std::size_t capacity, double decay = kDefaultDecay,
                     double boost = kDefaultBoost);

  AttributeValue get(VertexId id, const Fetch& fetch);
  /// Local write: the value is dirty until uploaded.
  void update(VertexId id, AttributeValue attr);
  /// Overwrites a clean cached copy with a fresher value; no-op otherwise.
  void refresh(VertexId id, const AttributeValue& attr);
  void decay_all();

  const CacheEntry* entry(VertexId id) const;
  bool contains(VertexId id) const { return entries_.contains(id); }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// Dirty values (cached or pending) whose ids are in `ids` (sorted).
  /// They are removed from pending and their cache entries become clean.
  std::vector<VertexUpdate> take_dirty(const VertexSet& ids);
  std::vector<VertexUpdate> take_all_dirty();
  std::size_t dirty_count() const;
  const std::map<VertexId, AttributeValue>& pending() const { return pending_; }

  const CacheStats& stats() const { return stats_; }
  const std::vector<EvictionRecord>& evictions() const { return evictions_; }

 private:
  void insert(VertexId id, AttributeValue attr, bool dirty);
  void evict_one();

  std::size_t capacity_;
  double decay_;
  double boost_;
  std::unordered_map<VertexId, CacheEntry> entries_;
  std::map<VertexId, AttributeValue> pending_;
  CacheStats stats_;
  std::vector<EvictionRecord> evictions_;
};

/// Union of the ids every node needs next iteration. Each node publishes
/// once per round; the union is readable after seal().
class GlobalQueryQueue {
 public:
  explicit GlobalQueryQueue(std::size_t nodes = 0) { reset(nodes); }
  void reset(std::size_t nodes);
  void publish(int node, VertexSet ids);
  void seal();
  bool sealed() const { return sealed_; }
  const VertexSet& ids() const { return merged_; }
  bool contains(VertexId id) const;
  const VertexSet& published(int node) const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::optional<VertexSet>> lists_;
  VertexSet merged_;
  bool sealed_ = false;
};

/// Values uploaded in the current round; only queried ids are admitted.
class GlobalDataQueue {
 public:
  void reset();
  void put(const GlobalQueryQueue& gqq, VertexId id, AttributeValue attr);
  const AttributeValue* find(VertexId id) const;
  std::size_t size() const { return data_.size(); }
  const std::map<VertexId, AttributeValue>& data() const { return data_; }

 private:
  mutable std::mutex mutex_;
  std::map<VertexId, AttributeValue> data_;
};

/// The upper system's authoritative attribute table.
class AttributeStore {
 public:
  void put(VertexId id, AttributeValue attr);
  AttributeValue get(VertexId id) const;
  std::map<VertexId, AttributeValue> snapshot() const;
  std::uint64_t writes() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<VertexId, AttributeValue> values_;
  std::uint64_t writes_ = 0;
};

/// Remote destinations of the out-edges of `frontier`, sorted.
VertexSet needed_remote(const Partition& partition, const VertexSet& frontier);

/// True when every out-edge of every vertex in `updated` and `frontier`
/// stays inside the partition.
bool partition_closed(const Partition& partition, const VertexSet& updated,
                      const VertexSet& frontier);

/// AND over per-node closure votes.
bool skip_check(std::span<const bool> closed);

// ---------------------------------------------------------------------------
// Lazy-upload round phases. A round is: every node publishes its needed ids,
// barrier, every node uploads its dirty values that were queried, barrier,
// every node refreshes its cache from the data queue and resolves its needs.

VertexSet upload_queried(SyncCache& cache, const GlobalQueryQueue& gqq, GlobalDataQueue& gdq,
                         AttributeStore& store);

/// Refreshes cached copies from `gdq`, then resolves `needed` through the
/// cache (data queue first, authoritative store second on a miss).
std::vector<VertexUpdate> pull_needed(SyncCache& cache, const VertexSet& needed,
                                      const GlobalDataQueue& gdq, const AttributeStore& store);

struct LazyParticipant {
  int node = 0;
  SyncCache* cache = nullptr;
  VertexSet needed;
  VertexSet uploaded;                // out
  std::vector<VertexUpdate> pulled;  // out
};

/// Runs one whole round for all participants in sequence (phase order kept).
void lazy_upload_round(std::span<LazyParticipant> participants, GlobalQueryQueue& gqq,
                       GlobalDataQueue& gdq, AttributeStore& store);

}  // namespace accelplug

#endif  // ACCELPLUG_SYNC_HPP
