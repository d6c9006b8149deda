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

#include "accelplug/sync.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace accelplug {

SyncCache::SyncCache(std::size_t capacity, double decay, double boost)
    : capacity_(capacity), decay_(decay), boost_(boost) {
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("cache decay must be in (0, 1)");
  if (!(boost > 0.0) || !std::isfinite(boost)) throw ConfigError("cache boost must be positive");
}

AttributeValue SyncCache::get(VertexId id, const Fetch& fetch) {
  if (auto it = entries_.find(id); it != entries_.end()) {
    ++stats_.hits;
    it->second.weight += boost_;
    return it->second.attr;
  }
  ++stats_.misses;
  AttributeValue value = fetch(id);
  if (capacity_ > 0) insert(id, value, false);
  return value;
}

void SyncCache::update(VertexId id, AttributeValue attr) {
  if (capacity_ == 0) {
    pending_.insert_or_assign(id, std::move(attr));
    return;
  }
  pending_.erase(id);
  if (auto it = entries_.find(id); it != entries_.end()) {
    it->second.attr = std::move(attr);
    it->second.dirty = true;
    it->second.weight += boost_;
    return;
  }
  insert(id, std::move(attr), true);
}

void SyncCache::refresh(VertexId id, const AttributeValue& attr) {
  auto it = entries_.find(id);
  if (it != entries_.end() && !it->second.dirty) it->second.attr = attr;
}

void SyncCache::decay_all() {
  for (auto& [id, e] : entries_) e.weight *= decay_;
}

const CacheEntry* SyncCache::entry(VertexId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

void SyncCache::insert(VertexId id, AttributeValue attr, bool dirty) {
  entries_.insert_or_assign(id, CacheEntry{std::move(attr), boost_, dirty});
  while (entries_.size() > capacity_) evict_one();
}

void SyncCache::evict_one() {
  auto victim = entries_.begin();
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    const auto& [id, e] = *it;
    if (e.weight < victim->second.weight ||
        (e.weight == victim->second.weight && id < victim->first)) {
      victim = it;
    }
  }
  const double min_weight = victim->second.weight;
  evictions_.push_back({victim->first, victim->second.weight, victim->second.dirty, min_weight});
  ++stats_.evictions;
  if (victim->second.dirty) {
    ++stats_.dirty_evictions;
    pending_.insert_or_assign(victim->first, std::move(victim->second.attr));
  }
  entries_.erase(victim);
}

std::vector<VertexUpdate> SyncCache::take_dirty(const VertexSet& ids) {
  std::vector<VertexUpdate> out;
  auto wanted = [&](VertexId id) { return std::binary_search(ids.begin(), ids.end(), id); };
  for (auto& [id, e] : entries_) {
    if (e.dirty && wanted(id)) {
      out.push_back({id, e.attr});
      e.dirty = false;
    }
  }
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (wanted(it->first)) {
      out.push_back({it->first, std::move(it->second)});
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<VertexUpdate> SyncCache::take_all_dirty() {
  std::vector<VertexUpdate> out;
  for (auto& [id, e] : entries_) {
    if (e.dirty) {
      out.push_back({id, e.attr});
      e.dirty = false;
    }
  }
  for (auto& [id, attr] : pending_) out.push_back({id, std::move(attr)});
  pending_.clear();
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::size_t SyncCache::dirty_count() const {
  std::size_t n = pending_.size();
  for (const auto& [id, e] : entries_) n += e.dirty ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------

void GlobalQueryQueue::reset(std::size_t nodes) {
  std::lock_guard lock(mutex_);
  lists_.assign(nodes, std::nullopt);
  merged_.clear();
  sealed_ = false;
}

void GlobalQueryQueue::publish(int node, VertexSet ids) {
  std::lock_guard lock(mutex_);
  if (node < 0 || static_cast<std::size_t>(node) >= lists_.size()) {
    throw Error("query list from unknown node " + std::to_string(node));
  }
  if (sealed_) throw LifecycleError("query queue already sealed for this round");
  if (lists_[node]) {
    throw LifecycleError("node " + std::to_string(node) + " published twice in one round");
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  lists_[node] = std::move(ids);
}

void GlobalQueryQueue::seal() {
  std::lock_guard lock(mutex_);
  std::set<VertexId> all;
  for (std::size_t j = 0; j < lists_.size(); ++j) {
    if (!lists_[j]) throw Error("missing query list from node " + std::to_string(j));
    all.insert(lists_[j]->begin(), lists_[j]->end());
  }
  merged_.assign(all.begin(), all.end());
  sealed_ = true;
}

bool GlobalQueryQueue::contains(VertexId id) const {
  return std::binary_search(merged_.begin(), merged_.end(), id);
}

const VertexSet& GlobalQueryQueue::published(int node) const {
  std::lock_guard lock(mutex_);
  const auto& list = lists_.at(node);
  if (!list) throw Error("node " + std::to_string(node) + " has not published");
  return *list;
}

void GlobalDataQueue::reset() {
  std::lock_guard lock(mutex_);
  data_.clear();
}

void GlobalDataQueue::put(const GlobalQueryQueue& gqq, VertexId id, AttributeValue attr) {
  if (!gqq.sealed() || !gqq.contains(id)) {
    throw std::logic_error("upload of vertex " + std::to_string(id) + " that nobody queried");
  }
  std::lock_guard lock(mutex_);
  data_.insert_or_assign(id, std::move(attr));
}

const AttributeValue* GlobalDataQueue::find(VertexId id) const {
  auto it = data_.find(id);
  return it == data_.end() ? nullptr : &it->second;
}

void AttributeStore::put(VertexId id, AttributeValue attr) {
  std::lock_guard lock(mutex_);
  values_.insert_or_assign(id, std::move(attr));
  ++writes_;
}

AttributeValue AttributeStore::get(VertexId id) const {
  std::lock_guard lock(mutex_);
  auto it = values_.find(id);
  if (it == values_.end()) throw Error("vertex " + std::to_string(id) + " not in store");
  return it->second;
}

std::map<VertexId, AttributeValue> AttributeStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return {values_.begin(), values_.end()};
}

std::uint64_t AttributeStore::writes() const {
  std::lock_guard lock(mutex_);
  return writes_;
}

// ---------------------------------------------------------------------------

VertexSet needed_remote(const Partition& partition, const VertexSet& frontier) {
  std::set<VertexId> out;
  for (VertexId v : frontier) {
    for (std::uint32_t idx : partition.out_edges(v)) {
      const VertexId dst = partition.edges()[idx].dst;
      if (!partition.owns(dst)) out.insert(dst);
    }
  }
  return {out.begin(), out.end()};
}

bool partition_closed(const Partition& partition, const VertexSet& updated,
                      const VertexSet& frontier) {
  auto closed = [&](VertexId v) {
    for (std::uint32_t idx : partition.out_edges(v)) {
      if (!partition.owns(partition.edges()[idx].dst)) return false;
    }
    return true;
  };
  return std::all_of(updated.begin(), updated.end(), closed) &&
         std::all_of(frontier.begin(), frontier.end(), closed);
}

bool skip_check(std::span<const bool> closed) {
  return std::all_of(closed.begin(), closed.end(), [](bool b) { return b; });
}

VertexSet upload_queried(SyncCache& cache, const GlobalQueryQueue& gqq, GlobalDataQueue& gdq,
                         AttributeStore& store) {
  VertexSet uploaded;
  for (auto& u : cache.take_dirty(gqq.ids())) {
    store.put(u.id, u.attr);
    gdq.put(gqq, u.id, std::move(u.attr));
    uploaded.push_back(u.id);
  }
  return uploaded;
}

std::vector<VertexUpdate> pull_needed(SyncCache& cache, const VertexSet& needed,
                                      const GlobalDataQueue& gdq, const AttributeStore& store) {
  for (const auto& [id, attr] : gdq.data()) cache.refresh(id, attr);
  auto fetch = [&](VertexId id) {
    if (const AttributeValue* v = gdq.find(id)) return *v;
    return store.get(id);
  };
  std::vector<VertexUpdate> out;
  out.reserve(needed.size());
  for (VertexId id : needed) out.push_back({id, cache.get(id, fetch)});
  return out;
}

void lazy_upload_round(std::span<LazyParticipant> participants, GlobalQueryQueue& gqq,
                       GlobalDataQueue& gdq, AttributeStore& store) {
  gqq.reset(participants.size());
  gdq.reset();
  for (auto& p : participants) gqq.publish(p.node, p.needed);
  gqq.seal();
  for (auto& p : participants) p.uploaded = upload_queried(*p.cache, gqq, gdq, store);
  for (auto& p : participants) p.pulled = pull_needed(*p.cache, p.needed, gdq, store);
}

}  // namespace accelplug
