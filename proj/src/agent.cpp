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

#include "accelplug/agent.hpp"

#include <algorithm>
#include <thread>

namespace accelplug {

std::string_view to_string(AgentPhase phase) {
  switch (phase) {
    case AgentPhase::Disconnected: return "Disconnected";
    case AgentPhase::Connected: return "Connected";
    case AgentPhase::InIteration: return "InIteration";
    case AgentPhase::Closed: return "Closed";
  }
  return "?";
}

namespace {

template <typename T>
std::vector<BlockContent> chunk(std::vector<T> items, std::size_t b) {
  std::vector<BlockContent> out;
  out.reserve((items.size() + b - 1) / b);
  for (std::size_t i = 0; i < items.size(); i += b) {
    const std::size_t end = std::min(items.size(), i + b);
    std::vector<T> block(std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(i)),
                         std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(end)));
    out.emplace_back(std::move(block));
  }
  return out;
}

void fill_new(SharedRegion& region, BlockContent block, std::int64_t tag) {
  const std::size_t n = unit_count(block);
  if (n > region.capacity()) {
    throw ConfigError("block of " + std::to_string(n) + " items exceeds slot capacity " +
                      std::to_string(region.capacity()));
  }
  BlockBuffer& slot = region.slot(Role::New);
  if (!slot.empty()) {
    throw LifecycleError("New buffer of channel " + std::to_string(region.key()) +
                         " is still occupied");
  }
  slot.content = std::move(block);
  slot.tag = tag;
}

}  // namespace

Agent::Agent(Partition& partition, std::shared_ptr<const Algorithm> algorithm,
             ChannelRegistry& registry, AgentOptions options)
    : partition_(partition),
      algorithm_(std::move(algorithm)),
      registry_(registry),
      options_(options) {
  if (!algorithm_) throw ConfigError("agent requires an algorithm");
  if (options_.block_size == 0) throw ConfigError("block size must be at least 1");
  if (options_.download_cost < 0 || options_.upload_cost < 0) {
    throw ConfigError("transfer costs must be non-negative");
  }
}

Agent::~Agent() {
  const AgentPhase p = phase_.load();
  if (p == AgentPhase::Connected || p == AgentPhase::InIteration) {
    try {
      shutdown();
    } catch (...) {
    }
  }
}

void Agent::require_connected(const char* what) const {
  const AgentPhase p = phase_.load();
  if (p == AgentPhase::Connected || p == AgentPhase::InIteration) return;
  throw LifecycleError(std::string(what) + " on node " + std::to_string(node_id()) +
                       " in phase " + std::string(to_string(p)));
}

void Agent::connect(const std::vector<AcceleratorProfile>& profiles) {
  if (phase_.load() != AgentPhase::Disconnected) {
    throw LifecycleError("connect on node " + std::to_string(node_id()) + " in phase " +
                         std::string(to_string(phase_.load())));
  }
  if (profiles.empty()) throw ConfigError("an agent needs at least one daemon");
  for (const auto& p : profiles) p.validate();
  for (const auto& profile : profiles) {
    auto region = registry_.create(options_.block_size);
    auto daemon = std::make_unique<Daemon>(registry_);
    daemon->init(profile, algorithm_, region->key());
    regions_.push_back(std::move(region));
    daemons_.push_back(std::move(daemon));
  }
  if (options_.enable_cache) {
    cache_.emplace(options_.cache_capacity, options_.cache_decay, options_.cache_boost);
  }
  phase_.store(AgentPhase::Connected);
}

void Agent::disconnect() {
  require_connected("disconnect");
  phase_.store(AgentPhase::Connected);
}

void Agent::shutdown() {
  const AgentPhase p = phase_.load();
  if (p == AgentPhase::Closed) {
    throw LifecycleError("shutdown on node " + std::to_string(node_id()) + " twice");
  }
  for (auto& region : regions_) region->send_to_daemon({ControlKind::Shutdown, ++seq_});
  for (auto& daemon : daemons_) daemon->join();
  for (auto& region : regions_) registry_.release(region->key());
  phase_.store(AgentPhase::Closed);
}

std::vector<ChannelKey> Agent::keys() const {
  std::vector<ChannelKey> out;
  for (const auto& r : regions_) out.push_back(r->key());
  return out;
}

void Agent::set_block_size(std::size_t b) {
  if (b == 0) throw ConfigError("block size must be at least 1");
  options_.block_size = b;
  for (auto& r : regions_) r->set_capacity(b);
}

void Agent::transfer(BlockContent block, ChannelKey key) {
  require_connected("transfer");
  for (auto& r : regions_) {
    if (r->key() == key) {
      fill_new(*r, std::move(block), 0);
      return;
    }
  }
  throw Error("channel key " + std::to_string(key) + " is not bound to node " +
              std::to_string(node_id()));
}

void Agent::mark_dirty(VertexId id, const AttributeValue& attr) {
  if (cache_) {
    cache_->update(id, attr);
  } else {
    dirty_.insert(id);
  }
}

std::size_t Agent::dirty_count() const { return cache_ ? cache_->dirty_count() : dirty_.size(); }

void Agent::update(Direction direction, UpperLink& upper) {
  require_connected("update");
  phase_.store(AgentPhase::InIteration);
  if (direction == Direction::PushToUpper) {
    if (cache_) {
      for (const auto& u : cache_->take_all_dirty()) {
        upper.upload(u.id, u.attr);
        ++stats_.uploads;
      }
    } else {
      for (VertexId id : dirty_) {
        upper.upload(id, partition_.vertex(id).attr);
        ++stats_.uploads;
      }
      dirty_.clear();
    }
    return;
  }
  const VertexSet ids = needed();
  partition_.clear_mirrors();
  auto fetch = [&upper](VertexId id) { return upper.fetch(id); };
  for (VertexId id : ids) {
    partition_.set_mirror(id, cache_ ? cache_->get(id, fetch) : upper.fetch(id));
  }
}

void Agent::request(OpKind op) {
  require_connected("request");
  phase_.store(AgentPhase::InIteration);
  const std::size_t b = options_.block_size;
  switch (op) {
    case OpKind::Gen: {
      std::vector<BlockContent> blocks;
      for (auto& block : build_blocks(partition_, frontier_, b)) blocks.emplace_back(std::move(block));
      outbox_.clear();
      for (auto& out : run_pass(op, std::move(blocks))) {
        auto& msgs = std::get<std::vector<Message>>(out);
        outbox_.insert(outbox_.end(), std::make_move_iterator(msgs.begin()),
                       std::make_move_iterator(msgs.end()));
      }
      return;
    }
    case OpKind::Merge: {
      std::vector<Message> input = std::move(inbox_);
      inbox_.clear();
      std::vector<Message> partial;
      for (auto& out : run_pass(op, chunk(std::move(input), b))) {
        auto& msgs = std::get<std::vector<Message>>(out);
        partial.insert(partial.end(), std::make_move_iterator(msgs.begin()),
                       std::make_move_iterator(msgs.end()));
      }
      // blocks are merged on the daemons; partial sets meet here in block order
      merged_ = msg_merge(*algorithm_, partial);
      return;
    }
    case OpKind::Apply: {
      std::vector<ApplyItem> items;
      if (algorithm_->applies_to_all()) {
        items.reserve(partition_.vertices().size());
        for (const auto& v : partition_.vertices()) {
          const Payload* p = merged_.find(v.id);
          items.push_back(ApplyItem{v.id, p ? std::optional<Payload>(*p) : std::nullopt});
        }
      } else {
        for (auto& m : merged_.entries) {
          if (!partition_.owns(m.target)) {
            throw Error("message to vertex " + std::to_string(m.target) +
                        " not owned by node " + std::to_string(node_id()));
          }
          items.push_back(ApplyItem{m.target, std::move(m.payload)});
        }
      }
      merged_ = MessageSet{};
      VertexSet next_active;
      VertexSet changed;
      double residual = 0.0;
      for (auto& out : run_pass(op, chunk(std::move(items), b))) {
        for (auto& r : std::get<std::vector<ApplyResult>>(out)) {
          residual = std::max(residual, r.residual);
          if (r.active) next_active.push_back(r.id);
          if (r.changed) {
            Vertex* v = partition_.find(r.id);
            v->attr = std::move(r.attr);
            v->updated = true;
            mark_dirty(v->id, v->attr);
            changed.push_back(v->id);
          }
        }
      }
      for (auto& v : partition_.vertices()) v.active = false;
      for (VertexId id : next_active) partition_.find(id)->active = true;
      frontier_ = std::move(next_active);
      updated_ = std::move(changed);
      last_active_ = frontier_.size();
      last_residual_ = residual;
      applied_ = true;
      return;
    }
  }
  throw Error("unknown op kind " + std::to_string(static_cast<int>(op)));
}

std::vector<BlockContent> Agent::run_pass(OpKind op, std::vector<BlockContent> blocks) {
  std::vector<std::size_t> in_units;
  in_units.reserve(blocks.size());
  for (const auto& b : blocks) in_units.push_back(unit_count(b));
  std::vector<BlockContent> outputs(blocks.size());
  if (!blocks.empty()) {
    for (auto& r : regions_) r->set_pass(op, &partition_);
    const std::size_t used = std::min(daemons_.size(), blocks.size());
    if (used == 1) {
      drive(0, op, blocks, outputs);
    } else {
      std::vector<std::exception_ptr> errors(used);
      {
        std::vector<std::jthread> drivers;
        for (std::size_t d = 0; d < used; ++d) {
          drivers.emplace_back([&, d] {
            try {
              drive(d, op, blocks, outputs);
            } catch (...) {
              errors[d] = std::current_exception();
            }
          });
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
  }
  record_pass(op, blocks, outputs, in_units);
  return outputs;
}

// Agent side of one pass on one daemon. After every RotateFinished the
// previous result is collected and the next block staged, concurrently and
// while the daemon computes; ExchangeFinished goes out only once both are done.
void Agent::drive(std::size_t daemon, OpKind op, std::vector<BlockContent>& blocks,
                  std::vector<BlockContent>& outputs) {
  SharedRegion& region = *regions_[daemon];
  const std::size_t k = daemons_.size();
  std::vector<std::size_t> mine;
  for (std::size_t i = daemon; i < blocks.size(); i += k) mine.push_back(i);
  const std::uint64_t seq = ++seq_;
  (void)op;

  std::size_t next = 0;
  auto download = [&] {
    if (next < mine.size()) {
      const std::size_t i = mine[next++];
      fill_new(region, std::move(blocks[i]), static_cast<std::int64_t>(i));
    }
  };
  auto upload = [&] {
    BlockBuffer& u = region.slot(Role::Upload);
    if (!u.empty()) {
      outputs[static_cast<std::size_t>(u.tag)] = std::move(u.content);
      u.clear();
    }
  };
  auto rethrow_compute_error = [&] {
    if (auto e = region.take_error()) std::rethrow_exception(e);
  };

  download();
  region.send_to_daemon({ControlKind::ExchangeFinished, seq});
  std::jthread up;
  std::jthread down;
  for (;;) {
    auto msg = region.receive_at_agent();
    if (!msg) {
      throw ProtocolError("channel " + std::to_string(region.key()) +
                          " closed: " + region.diagnostic());
    }
    switch (msg->kind) {
      case ControlKind::RotateFinished:
        up = std::jthread(upload);
        down = std::jthread(download);
        break;
      case ControlKind::ComputeFinished:
        if (up.joinable()) up.join();
        if (down.joinable()) down.join();
        rethrow_compute_error();
        region.send_to_daemon({ControlKind::ExchangeFinished, seq});
        break;
      case ControlKind::ComputeAllFinished:
        if (up.joinable()) up.join();
        if (down.joinable()) down.join();
        rethrow_compute_error();
        return;
      default:
        region.fail("agent on node " + std::to_string(node_id()) + ": unexpected " +
                    std::string(to_string(msg->kind)));
        throw ProtocolError(region.diagnostic());
    }
  }
}

void Agent::record_pass(OpKind op, const std::vector<BlockContent>& inputs,
                        const std::vector<BlockContent>& outputs,
                        const std::vector<std::size_t>& in_units) {
  (void)inputs;
  PassStats pass;
  pass.op = op;
  pass.blocks = outputs.size();
  const std::size_t k = daemons_.size();
  for (std::size_t d = 0; d < k; ++d) {
    const AcceleratorProfile& prof = daemons_[d]->profile();
    std::vector<StageTimes> times;
    for (std::size_t i = d; i < outputs.size(); i += k) {
      const double n = static_cast<double>(in_units[i]);
      times.push_back({options_.download_cost * n, prof.call_overhead + prof.per_unit_cost * n,
                       options_.upload_cost * static_cast<double>(unit_count(outputs[i]))});
    }
    const PipelineTiming t = simulate_pipeline(times);
    pass.t_download += t.download;
    pass.t_compute += t.compute;
    pass.t_upload += t.upload;
    pass.span = std::max(pass.span, t.span);
  }
  for (std::size_t n : in_units) pass.units += n;
  stats_.t_download += pass.t_download;
  stats_.t_compute += pass.t_compute;
  stats_.t_upload += pass.t_upload;
  stats_.node_time += pass.span;
  stats_.blocks += pass.blocks;
  stats_.units += pass.units;
  passes_.push_back(pass);
}

VertexSet Agent::needed() const { return needed_remote(partition_, frontier_); }

void Agent::publish_needed(GlobalQueryQueue& gqq) {
  require_connected("publish_needed");
  if (published_) {
    throw LifecycleError("node " + std::to_string(node_id()) + " published twice in one round");
  }
  gqq.publish(node_id(), needed());
  published_ = true;
}

VertexSet Agent::upload_queried(const GlobalQueryQueue& gqq, GlobalDataQueue& gdq,
                                AttributeStore& store) {
  require_connected("upload_queried");
  if (!cache_) throw LifecycleError("lazy upload requires the sync cache");
  VertexSet ids = accelplug::upload_queried(*cache_, gqq, gdq, store);
  stats_.uploads += ids.size();
  stats_.uploads_avoided += cache_->dirty_count();
  return ids;
}

void Agent::refresh_from(const GlobalDataQueue& gdq) {
  if (!cache_) return;
  for (const auto& [id, attr] : gdq.data()) cache_->refresh(id, attr);
}

void Agent::end_round() { published_ = false; }

bool Agent::closed() const { return partition_closed(partition_, updated_, frontier_); }

bool Agent::locally_converged() const {
  if (!applied_) return false;
  return algorithm_->converged(last_active_, last_residual_);
}

void Agent::end_iteration() {
  if (cache_) cache_->decay_all();
  updated_.clear();
}

AgentStats Agent::take_stats() {
  AgentStats out = stats_;
  if (cache_) {
    out.cache_hits = cache_->stats().hits - hits_seen_;
    out.cache_misses = cache_->stats().misses - misses_seen_;
    hits_seen_ = cache_->stats().hits;
    misses_seen_ = cache_->stats().misses;
  }
  stats_ = AgentStats{};
  return out;
}

}  // namespace accelplug
