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

#ifndef ACCELPLUG_ACCEL_DAEMON_HPP
#define ACCELPLUG_ACCEL_DAEMON_HPP

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "accelplug/algo_template.hpp"
#include "accelplug/shared_region.hpp"

namespace accelplug {

/// Simulated accelerator. `lanes` is the parallel width a block is split
/// across; costs are simulated time units (per triplet and per dispatch).
struct AcceleratorProfile {
  unsigned lanes = 1;
  double per_unit_cost = 0.0;
  double call_overhead = 0.0;

  static AcceleratorProfile cpu_like() { return {20, 0.05, 1.0}; }
  static AcceleratorProfile gpu_like() { return {1024, 0.002, 20.0}; }

  void validate() const;
};

enum class DaemonPhase { Uninitialized, Ready, Computing, Terminated };
std::string_view to_string(DaemonPhase phase);

/// Runs one template operation over the block held in `content`, in place.
void execute_request(OpKind op, BlockContent& content, const Algorithm& algorithm,
                     const Partition* partition, unsigned lanes);

/// A persistent worker bound to one shared region. Initialized exactly once;
/// afterwards it serves compute passes until it receives Shutdown:
///
///   ExchangeFinished -> rotate roles, reply RotateFinished, then
///                       compute the Compute buffer and reply ComputeFinished,
///                       or reply ComputeAllFinished when it is empty.
///   Shutdown         -> terminate.
///
/// Any other message is a protocol violation and ends the daemon.
class Daemon {
 public:
  explicit Daemon(ChannelRegistry& registry) : registry_(registry) {}
  ~Daemon();
  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  void init(const AcceleratorProfile& profile, std::shared_ptr<const Algorithm> algorithm,
            ChannelKey key);

  DaemonPhase phase() const { return phase_.load(); }
  int init_count() const { return init_count_.load(); }
  ChannelKey channel_key() const { return key_; }
  const AcceleratorProfile& profile() const { return profile_; }
  std::uint64_t blocks_computed() const { return blocks_computed_.load(); }

  /// Waits for the serving loop to end (after Shutdown or a protocol failure).
  void join();

 private:
  void serve();

  ChannelRegistry& registry_;
  AcceleratorProfile profile_;
  std::shared_ptr<const Algorithm> algorithm_;
  std::shared_ptr<SharedRegion> region_;
  ChannelKey key_ = 0;
  std::atomic<DaemonPhase> phase_{DaemonPhase::Uninitialized};
  std::atomic<int> init_count_{0};
  std::atomic<std::uint64_t> blocks_computed_{0};
  std::thread worker_;
};

}  // namespace accelplug

#endif  // ACCELPLUG_ACCEL_DAEMON_HPP
