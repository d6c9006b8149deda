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

#include "accelplug/upper_system.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

#include "accelplug/pipeline.hpp"

namespace accelplug {

std::string_view to_string(ComputationModel model) {
  return model == ComputationModel::Bsp ? "bsp" : "gas";
}

ComputationModel parse_model(std::string_view name) {
  if (name == "bsp" || name == "BSP") return ComputationModel::Bsp;
  if (name == "gas" || name == "GAS") return ComputationModel::Gas;
  throw ConfigError("unknown computation model '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

RoundBarrier::RoundBarrier(std::size_t parties, std::chrono::milliseconds timeout)
    : parties_(parties), timeout_(timeout), arrived_(parties, false) {
  if (parties == 0) throw ConfigError("barrier needs at least one party");
}

void RoundBarrier::arrive_and_wait(int party, std::string_view where,
                                   const std::function<void()>& on_complete) {
  std::unique_lock lock(mutex_);
  if (broken_) throw BarrierBroken(*broken_);
  if (arrived_.at(static_cast<std::size_t>(party))) {
    throw std::logic_error("node " + std::to_string(party) + " arrived twice at " +
                           std::string(where));
  }
  arrived_[party] = true;
  if (++count_ == parties_) {
    if (on_complete) {
      try {
        on_complete();
      } catch (const std::exception& e) {
        broken_ = std::string(e.what());
        cv_.notify_all();
        throw;
      }
    }
    std::fill(arrived_.begin(), arrived_.end(), false);
    count_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  const std::uint64_t gen = generation_;
  const bool released = cv_.wait_for(lock, timeout_, [&] { return generation_ != gen || broken_; });
  if (generation_ != gen) return;
  if (!released && !broken_) {
    std::string missing;
    for (std::size_t j = 0; j < parties_; ++j) {
      if (!arrived_[j]) missing += (missing.empty() ? "" : ",") + std::to_string(j);
    }
    broken_ = "barrier timeout at " + std::string(where) + ": waiting for node " + missing;
    cv_.notify_all();
  }
  throw BarrierBroken(*broken_);
}

void RoundBarrier::abort(const std::string& reason) {
  std::lock_guard lock(mutex_);
  if (!broken_) broken_ = reason;
  cv_.notify_all();
}

bool RoundBarrier::broken() const {
  std::lock_guard lock(mutex_);
  return broken_.has_value();
}

bool convergence_vote(std::span<const std::optional<bool>> votes) {
  bool all = true;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    if (!votes[j]) throw Error("missing convergence vote from node " + std::to_string(j));
    all = all && *votes[j];
  }
  return all;
}

// ---------------------------------------------------------------------------

AttributeValue StoreLink::fetch(VertexId id) {
  if (gdq_ != nullptr) {
    if (const AttributeValue* v = gdq_->find(id)) return *v;
  }
  return store_.get(id);
}

void StoreLink::upload(VertexId id, const AttributeValue& attr) {
  store_.put(id, attr);
  uploaded_.push_back(id);
}

SyncRoundResult global_sync(std::span<Agent* const> agents, AttributeStore& store, bool lazy) {
  SyncRoundResult out;
  out.uploaded.resize(agents.size());
  if (lazy) {
    GlobalQueryQueue gqq(agents.size());
    GlobalDataQueue gdq;
    for (Agent* a : agents) a->publish_needed(gqq);
    gqq.seal();
    for (std::size_t j = 0; j < agents.size(); ++j) {
      out.uploaded[j] = agents[j]->upload_queried(gqq, gdq, store);
    }
    StoreLink link(store, &gdq);
    for (Agent* a : agents) {
      a->refresh_from(gdq);
      a->update(Direction::PullFromUpper, link);
      a->end_round();
    }
    out.gqq = gqq.ids();
    return out;
  }
  for (std::size_t j = 0; j < agents.size(); ++j) {
    StoreLink link(store);
    agents[j]->update(Direction::PushToUpper, link);
    out.uploaded[j] = link.uploaded();
    std::sort(out.uploaded[j].begin(), out.uploaded[j].end());
  }
  StoreLink link(store);
  for (Agent* a : agents) a->update(Direction::PullFromUpper, link);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Decision {
  bool skipped = false;
  bool converged = false;
};

class Engine {
 public:
  Engine(PartitionedGraph graph, std::shared_ptr<const Algorithm> algorithm,
         const EngineConfig& config)
      : graph_(std::move(graph)),
        algorithm_(std::move(algorithm)),
        config_(config),
        m_(graph_.size()),
        barrier_(m_ == 0 ? 1 : m_, config.barrier_timeout),
        gqq_(m_) {}

  RunResult run();

 private:
  void setup();
  void node_loop(int j);
  void gen_route(int j, int iter);
  void sync_round(int j, int iter);
  void check_mirrors(int j) const;
  void grow(int iter);
  RunResult collect(double wall_ms);

  PartitionedGraph graph_;
  std::shared_ptr<const Algorithm> algorithm_;
  EngineConfig config_;
  std::size_t m_;
  RoundBarrier barrier_;
  ChannelRegistry registry_;
  AttributeStore store_;
  GlobalQueryQueue gqq_;
  GlobalDataQueue gdq_;
  std::vector<std::unique_ptr<Agent>> agents_;

  std::vector<std::optional<bool>> conv_votes_;
  std::vector<std::optional<bool>> closed_votes_;
  bool last_skipped_ = false;

  // per node, per iteration (index iter-1)
  std::vector<std::vector<AgentStats>> stats_;
  std::vector<std::vector<double>> wall_;
  std::vector<std::uint64_t> cross_;
  std::vector<Decision> decisions_;
  std::vector<char> final_;
  std::vector<VertexSet> round_uploads_;
  std::vector<RoundAudit> audit_;
  std::map<VertexId, std::uint64_t> upload_counts_;
  std::vector<std::size_t> block_size_;
  std::vector<std::size_t> block_count_;
};

void Engine::setup() {
  if (m_ == 0) throw ConfigError("partition count must be at least 1");
  if (!algorithm_) throw ConfigError("no algorithm");
  if (!config_.node_daemons.empty() && config_.node_daemons.size() != m_) {
    throw ConfigError("daemon profiles given for " + std::to_string(config_.node_daemons.size()) +
                      " nodes, expected " + std::to_string(m_));
  }
  if (config_.block_size && *config_.block_size == 0) {
    throw ConfigError("block size must be at least 1");
  }

  for (auto& p : graph_.partitions) {
    initialize_partition(p, *algorithm_);
    for (const auto& v : p.vertices()) store_.put(v.id, v.attr);
  }

  for (std::size_t j = 0; j < m_; ++j) {
    std::vector<AcceleratorProfile> profiles =
        config_.node_daemons.empty() ? std::vector<AcceleratorProfile>{AcceleratorProfile::cpu_like()}
                                     : config_.node_daemons[j];
    if (profiles.empty()) throw ConfigError("node " + std::to_string(j) + " has no daemons");
    const Partition& part = graph_.partitions[j];
    std::size_t b = 0;
    std::size_t s = 0;
    const std::size_t edges = part.edges().size();
    if (config_.block_size) {
      b = *config_.block_size;
      s = std::max<std::size_t>(1, (edges + b - 1) / b);
    } else {
      const std::size_t per_daemon = (edges + profiles.size() - 1) / profiles.size();
      PipelineCostModel model{config_.download_cost, profiles[0].per_unit_cost,
                              config_.upload_cost, profiles[0].call_overhead,
                              std::max<std::size_t>(1, per_daemon)};
      if (model.k1 <= 0 || model.k2 <= 0 || model.k3 <= 0) {
        // degenerate costs: one block per pass
        b = std::max<std::size_t>(1, per_daemon);
        s = 1;
      } else {
        const BlockPlan plan = choose_block_count(model).plan;
        b = plan.b;
        s = plan.s;
      }
    }
    block_size_.push_back(b);
    block_count_.push_back(s);

    AgentOptions opts;
    opts.block_size = b;
    opts.download_cost = config_.download_cost;
    opts.upload_cost = config_.upload_cost;
    opts.enable_cache = config_.enable_cache;
    opts.cache_capacity = config_.cache_capacity;
    opts.cache_decay = config_.cache_decay;
    opts.cache_boost = config_.cache_boost;
    auto agent = std::make_unique<Agent>(graph_.partitions[j], algorithm_, registry_, opts);
    agent->connect(profiles);
    VertexSet frontier;
    for (const auto& v : part.vertices()) {
      if (v.active) frontier.push_back(v.id);
    }
    agent->set_frontier(std::move(frontier));
    agents_.push_back(std::move(agent));
  }

  // mirrors for the first Gen
  for (auto& a : agents_) {
    StoreLink link(store_);
    a->update(Direction::PullFromUpper, link);
  }
  if (config_.check_mirrors) {
    for (std::size_t j = 0; j < m_; ++j) check_mirrors(static_cast<int>(j));
  }

  stats_.assign(m_, {});
  wall_.assign(m_, {});
  conv_votes_.assign(m_, std::nullopt);
  closed_votes_.assign(m_, std::nullopt);
  round_uploads_.assign(m_, VertexSet{});
}

// Per-iteration slots; only called from barrier completions, while every
// node thread is parked.
void Engine::grow(int iter) {
  const auto n = static_cast<std::size_t>(iter);
  if (cross_.size() >= n) return;
  const std::size_t size = std::max(n, 2 * cross_.size());
  for (auto& v : stats_) v.resize(size);
  for (auto& v : wall_) v.resize(size);
  cross_.resize(size);
  decisions_.resize(size);
  final_.resize(size);
}

void Engine::gen_route(int j, int iter) {
  agents_[j]->request(OpKind::Gen);
  barrier_.arrive_and_wait(j, "route", [this, iter] {
    grow(iter);
    std::uint64_t cross = 0;
    for (std::size_t src = 0; src < m_; ++src) {
      auto& out = agents_[src]->outbox();
      for (auto& msg : out) {
        const int owner = graph_.owner(msg.target);
        if (owner != static_cast<int>(src)) ++cross;
        agents_[owner]->inbox().push_back(std::move(msg));
      }
      out.clear();
    }
    if (last_skipped_ && cross > 0) {
      throw std::logic_error("messages crossed partitions after a skipped round");
    }
    cross_[iter - 1] += cross;
  });
}

void Engine::sync_round(int j, int iter) {
  Agent& a = *agents_[j];
  auto finish = [this, iter] {
    if (config_.record_audit) audit_.push_back(RoundAudit{iter, gqq_.ids(), round_uploads_});
    for (const auto& ids : round_uploads_) {
      for (VertexId id : ids) ++upload_counts_[id];
    }
  };
  if (config_.enable_cache) {
    a.publish_needed(gqq_);
    barrier_.arrive_and_wait(j, "query", [this] { gqq_.seal(); });
    round_uploads_[j] = a.upload_queried(gqq_, gdq_, store_);
    barrier_.arrive_and_wait(j, "data", finish);
    a.refresh_from(gdq_);
    StoreLink link(store_, &gdq_);
    a.update(Direction::PullFromUpper, link);
  } else {
    StoreLink push(store_);
    a.update(Direction::PushToUpper, push);
    round_uploads_[j] = push.uploaded();
    std::sort(round_uploads_[j].begin(), round_uploads_[j].end());
    barrier_.arrive_and_wait(j, "data", finish);
    StoreLink pull(store_);
    a.update(Direction::PullFromUpper, pull);
  }
  if (config_.check_mirrors) check_mirrors(j);
}

void Engine::check_mirrors(int j) const {
  const Partition& p = graph_.partitions[j];
  for (VertexId id : agents_[j]->needed()) {
    const AttributeValue* mirror = p.mirror(id);
    if (mirror == nullptr) {
      throw std::logic_error("node " + std::to_string(j) + " has no mirror of vertex " +
                             std::to_string(id));
    }
    const Partition& owner = graph_.partitions[graph_.owner(id)];
    if (!algorithm_->same(*mirror, owner.vertex(id).attr)) {
      throw std::logic_error("node " + std::to_string(j) + " holds a stale mirror of vertex " +
                             std::to_string(id));
    }
  }
}

void Engine::node_loop(int j) {
  Agent& a = *agents_[j];
  const int cap = algorithm_->max_iterations();
  const bool gas = config_.model == ComputationModel::Gas;
  if (gas) gen_route(j, 1);
  for (int t = 1; t <= cap; ++t) {
    const auto start = std::chrono::steady_clock::now();
    if (config_.before_iteration) config_.before_iteration(j, t);
    if (!gas) gen_route(j, t);
    a.request(OpKind::Merge);
    a.request(OpKind::Apply);

    conv_votes_[j] = a.locally_converged();
    closed_votes_[j] = config_.enable_skip ? a.closed() : false;
    barrier_.arrive_and_wait(j, "vote", [this, t, cap] {
      grow(t);
      Decision d;
      d.converged = convergence_vote(conv_votes_);
      bool all_closed = true;
      for (const auto& v : closed_votes_) {
        if (!v) throw Error("missing skip vote");
        all_closed = all_closed && *v;
      }
      const bool stop = d.converged || t == cap;
      d.skipped = config_.enable_skip && all_closed && !stop;
      decisions_[t - 1] = d;
      final_[t - 1] = stop ? 1 : 0;
      last_skipped_ = d.skipped;
      std::fill(conv_votes_.begin(), conv_votes_.end(), std::nullopt);
      std::fill(closed_votes_.begin(), closed_votes_.end(), std::nullopt);
      gqq_.reset(m_);
      gdq_.reset();
      for (auto& u : round_uploads_) u.clear();
    });
    const Decision d = decisions_[t - 1];
    const bool stop = final_[t - 1] != 0;

    if (!stop && !d.skipped) sync_round(j, t);
    a.end_iteration();
    a.end_round();
    if (!stop && gas) gen_route(j, t);
    stats_[j][t - 1] = a.take_stats();
    wall_[j][t - 1] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (stop) return;
  }
}

RunResult Engine::run() {
  const auto start = std::chrono::steady_clock::now();
  setup();

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::exception_ptr first_broken;
  {
    std::vector<std::jthread> nodes;
    for (std::size_t j = 0; j < m_; ++j) {
      nodes.emplace_back([&, j] {
        try {
          node_loop(static_cast<int>(j));
        } catch (const BarrierBroken&) {
          std::lock_guard lock(error_mutex);
          if (!first_broken) first_broken = std::current_exception();
        } catch (const std::exception& e) {
          {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
          barrier_.abort("node " + std::to_string(j) + " failed: " + e.what());
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  if (first_broken) std::rethrow_exception(first_broken);

  const double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return collect(wall);
}

RunResult Engine::collect(double wall_ms) {
  RunResult result;
  RunMetrics& metrics = result.metrics;
  metrics.model = config_.model;
  metrics.block_size = block_size_;
  metrics.block_count = block_count_;
  result.uploads_before_flush = upload_counts_;
  result.audit = std::move(audit_);

  // final flush: every value not yet in the store
  for (auto& a : agents_) {
    StoreLink link(store_);
    a->update(Direction::PushToUpper, link);
    metrics.flush_uploads += link.uploaded().size();
    a->disconnect();
  }

  for (int t = 1; t <= static_cast<int>(final_.size()); ++t) {
    IterationMetrics it;
    it.iter = t;
    it.model = config_.model;
    it.skipped = decisions_[t - 1].skipped;
    it.converged = decisions_[t - 1].converged;
    it.final_round = final_[t - 1] != 0;
    it.cross_messages = cross_[t - 1];
    for (std::size_t j = 0; j < m_; ++j) {
      const AgentStats& s = stats_[j][t - 1];
      it.t_download += s.t_download;
      it.t_compute += s.t_compute;
      it.t_upload += s.t_upload;
      it.t_total = std::max(it.t_total, s.node_time);
      it.cache_hits += s.cache_hits;
      it.cache_misses += s.cache_misses;
      it.uploads += s.uploads;
      it.uploads_avoided += s.uploads_avoided;
      it.node_time.push_back(s.node_time);
      it.node_blocks.push_back(s.blocks);
      it.node_units.push_back(s.units);
      it.wall_ms = std::max(it.wall_ms, wall_[j][t - 1]);
    }
    metrics.sim_time += it.t_total;
    if (it.skipped) ++metrics.skipped_rounds;
    metrics.iterations.push_back(std::move(it));
    if (final_[t - 1]) {
      metrics.converged = decisions_[t - 1].converged;
      break;
    }
  }
  metrics.wall_ms = wall_ms;
  result.converged = metrics.converged;

  for (auto& a : agents_) {
    a->shutdown();
    std::vector<std::size_t> per_daemon;
    for (const auto& d : a->daemons()) {
      result.init_counts.push_back(d->init_count());
      per_daemon.push_back(d->blocks_computed());
    }
    result.daemon_blocks.push_back(std::move(per_daemon));
    for (const auto& r : a->regions()) {
      result.traces.push_back(r->trace());
      result.region_copies += r->copies();
    }
  }

  result.attributes = store_.snapshot();
  result.flush_complete = true;
  std::size_t owned = 0;
  for (const auto& p : graph_.partitions) {
    for (const auto& v : p.vertices()) {
      ++owned;
      auto it = result.attributes.find(v.id);
      if (it == result.attributes.end() || !algorithm_->same(it->second, v.attr)) {
        result.flush_complete = false;
      }
    }
  }
  if (owned != result.attributes.size()) result.flush_complete = false;
  return result;
}

}  // namespace

std::string to_records(const RunMetrics& metrics) {
  std::ostringstream out;
  for (const auto& it : metrics.iterations) {
    out << "record=iteration iter=" << it.iter << " model=" << to_string(it.model)
        << " t_download=" << fmt(it.t_download) << " t_compute=" << fmt(it.t_compute)
        << " t_upload=" << fmt(it.t_upload) << " t_total=" << fmt(it.t_total)
        << " skipped=" << (it.skipped ? 1 : 0) << " cache_hits=" << it.cache_hits
        << " cache_misses=" << it.cache_misses << " uploads=" << it.uploads
        << " uploads_avoided=" << it.uploads_avoided << " converged=" << (it.converged ? 1 : 0)
        << " final=" << (it.final_round ? 1 : 0) << " cross_messages=" << it.cross_messages
        << " node_time=" << join(it.node_time) << " node_blocks=" << join(it.node_blocks)
        << " wall_ms=" << fmt(it.wall_ms) << '\n';
  }
  out << "record=summary model=" << to_string(metrics.model)
      << " iterations=" << metrics.iterations.size() << " converged=" << (metrics.converged ? 1 : 0)
      << " iterations_skipped=" << metrics.skipped_rounds << " sim_time=" << fmt(metrics.sim_time)
      << " block_size=" << join(metrics.block_size) << " block_count=" << join(metrics.block_count)
      << " flush_uploads=" << metrics.flush_uploads << " wall_ms=" << fmt(metrics.wall_ms) << '\n';
  return out.str();
}

RunResult run(PartitionedGraph graph, std::shared_ptr<const Algorithm> algorithm,
              const EngineConfig& config) {
  Engine engine(std::move(graph), std::move(algorithm), config);
  return engine.run();
}

}  // namespace accelplug
