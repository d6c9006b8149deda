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

#include "accelplug/accel_daemon.hpp"

#include <cmath>

#include "accelplug/kernels.hpp"

namespace accelplug {

void AcceleratorProfile::validate() const {
  if (lanes < 1) throw ConfigError("accelerator lanes must be at least 1");
  if (!(per_unit_cost >= 0.0) || !std::isfinite(per_unit_cost)) {
    throw ConfigError("per_unit_cost must be finite and non-negative");
  }
  if (!(call_overhead >= 0.0) || !std::isfinite(call_overhead)) {
    throw ConfigError("call_overhead must be finite and non-negative");
  }
}

std::string_view to_string(DaemonPhase phase) {
  switch (phase) {
    case DaemonPhase::Uninitialized: return "Uninitialized";
    case DaemonPhase::Ready: return "Ready";
    case DaemonPhase::Computing: return "Computing";
    case DaemonPhase::Terminated: return "Terminated";
  }
  return "?";
}

void execute_request(OpKind op, BlockContent& content, const Algorithm& algorithm,
                     const Partition* partition, unsigned lanes) {
  switch (op) {
    case OpKind::Gen: {
      auto* triplets = std::get_if<std::vector<EdgeTriplet>>(&content);
      if (triplets == nullptr) throw ProtocolError("Gen request on a non-triplet block");
      content = kernels::generate(algorithm, *triplets, lanes);
      return;
    }
    case OpKind::Merge: {
      auto* messages = std::get_if<std::vector<Message>>(&content);
      if (messages == nullptr) throw ProtocolError("Merge request on a non-message block");
      content = kernels::merge(algorithm, *messages, lanes);
      return;
    }
    case OpKind::Apply: {
      auto* items = std::get_if<std::vector<ApplyItem>>(&content);
      if (items == nullptr) throw ProtocolError("Apply request on a non-apply block");
      if (partition == nullptr) throw ProtocolError("Apply request without a partition");
      content = kernels::apply(algorithm, *partition, *items, lanes);
      return;
    }
  }
  throw Error("unknown op kind " + std::to_string(static_cast<int>(op)));
}

Daemon::~Daemon() {
  if (worker_.joinable()) {
    if (phase_.load() != DaemonPhase::Terminated && region_) region_->fail("daemon destroyed");
    worker_.join();
  }
}

void Daemon::init(const AcceleratorProfile& profile, std::shared_ptr<const Algorithm> algorithm,
                  ChannelKey key) {
  if (phase_.load() != DaemonPhase::Uninitialized) {
    throw LifecycleError("daemon on channel " + std::to_string(key_) +
                         " is already initialized");
  }
  profile.validate();
  if (!algorithm) throw ConfigError("daemon requires an algorithm");
  region_ = registry_.bind(key);
  profile_ = profile;
  algorithm_ = std::move(algorithm);
  key_ = key;
  init_count_.fetch_add(1);
  phase_.store(DaemonPhase::Ready);
  worker_ = std::thread([this] { serve(); });
}

void Daemon::join() {
  if (worker_.joinable()) worker_.join();
}

void Daemon::serve() {
  // warm the lane team once; it is reused for every block
  const int team = kernels::team_size(profile_.lanes);
#pragma omp parallel num_threads(team) if (team > 1)
  { (void)0; }

  SharedRegion& region = *region_;
  for (;;) {
    auto msg = region.receive_at_daemon();
    if (!msg) {
      phase_.store(DaemonPhase::Terminated);
      return;
    }
    switch (msg->kind) {
      case ControlKind::Shutdown:
        phase_.store(DaemonPhase::Terminated);
        return;
      case ControlKind::ExchangeFinished: {
        rotate(region);
        region.send_to_agent({ControlKind::RotateFinished, msg->seq});
        BlockBuffer& c = region.slot(Role::Compute);
        if (c.empty()) {
          region.send_to_agent({ControlKind::ComputeAllFinished, msg->seq});
          break;
        }
        phase_.store(DaemonPhase::Computing);
        try {
          execute_request(region.op(), c.content, *algorithm_, region.partition(), profile_.lanes);
        } catch (...) {
          region.set_error(std::current_exception());
        }
        blocks_computed_.fetch_add(1);
        phase_.store(DaemonPhase::Ready);
        region.send_to_agent({ControlKind::ComputeFinished, msg->seq});
        break;
      }
      default:
        region.fail("daemon on channel " + std::to_string(key_) + ": unexpected " +
                    std::string(to_string(msg->kind)) + " in phase " +
                    std::string(to_string(phase_.load())));
        phase_.store(DaemonPhase::Terminated);
        return;
    }
  }
}

}  // namespace accelplug
