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

#ifndef ACCELPLUG_SHARED_REGION_HPP
#define ACCELPLUG_SHARED_REGION_HPP

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "accelplug/pipeline.hpp"
#include "accelplug/types.hpp"

namespace accelplug {

class Partition;

using ChannelKey = std::uint64_t;

enum class ControlKind : std::uint8_t {
  ExchangeFinished,
  RotateFinished,
  ComputeFinished,
  ComputeAllFinished,
  Shutdown,
};

std::string_view to_string(ControlKind kind);

struct ControlMessage {
  ControlKind kind = ControlKind::ExchangeFinished;
  std::uint64_t seq = 0;
  bool operator==(const ControlMessage&) const = default;
};

/// True when `trace` is a sequence of complete passes
/// (ExchangeFinished RotateFinished ComputeFinished)* ExchangeFinished
/// RotateFinished ComputeAllFinished, optionally followed by one Shutdown.
bool trace_conforms(std::span<const ControlMessage> trace);

enum class OpKind : std::uint8_t { Gen, Merge, Apply };
std::string_view to_string(OpKind op);

/// Contents of one region buffer. Compute replaces the input alternative
/// with the output alternative in place (triplets -> messages, messages ->
/// merged messages, apply items -> apply results).
using BlockContent = std::variant<std::monostate, std::vector<EdgeTriplet>, std::vector<Message>,
                                  std::vector<ApplyItem>, std::vector<ApplyResult>>;

std::size_t unit_count(const BlockContent& content);
std::uint64_t checksum(const BlockContent& content);

struct BlockBuffer {
  BlockContent content;
  std::int64_t tag = -1;  // index of the block in the current pass

  BlockBuffer() = default;
  BlockBuffer(const BlockBuffer&) = delete;
  BlockBuffer& operator=(const BlockBuffer&) = delete;

  bool empty() const { return std::holds_alternative<std::monostate>(content); }
  void clear() {
    content = std::monostate{};
    tag = -1;
  }
};

/// Blocking FIFO of control messages; close() wakes every receiver.
class MessageQueue {
 public:
  void push(ControlMessage msg);
  /// Blocks until a message arrives; nullopt once the queue is closed and drained.
  std::optional<ControlMessage> pop();
  void close();

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<ControlMessage> items_;
  bool closed_ = false;
};

/// Memory area shared by exactly one agent and one daemon: three
/// equal-capacity block buffers with rotating role labels and a pair of
/// ordered control-message queues. Both endpoints address the same buffers;
/// nothing is copied across the boundary. The queues are the only
/// synchronization for buffer access.
class SharedRegion {
 public:
  SharedRegion(ChannelKey key, std::size_t capacity) : key_(key), capacity_(capacity) {}

  ChannelKey key() const { return key_; }
  std::size_t capacity() const { return capacity_; }
  void set_capacity(std::size_t capacity) { capacity_ = capacity; }

  BlockBuffer& buffer(std::size_t i) { return buffers_[i]; }
  BlockBuffer& slot(Role role) { return buffers_[rotation_.buffer_for(role)]; }
  RotationState& rotation() { return rotation_; }
  const RotationState& rotation() const { return rotation_; }

  void send_to_daemon(ControlMessage msg);
  void send_to_agent(ControlMessage msg);
  std::optional<ControlMessage> receive_at_daemon() { return to_daemon_.pop(); }
  std::optional<ControlMessage> receive_at_agent() { return to_agent_.pop(); }
  /// Fatal protocol failure: records the diagnostic and unblocks both ends.
  void fail(std::string diagnostic);
  std::string diagnostic() const;

  void set_pass(OpKind op, const Partition* partition) {
    op_ = op;
    partition_ = partition;
  }
  OpKind op() const { return op_; }
  const Partition* partition() const { return partition_; }

  /// Error raised while computing a block, surfaced to the agent.
  void set_error(std::exception_ptr e) { error_ = std::move(e); }
  std::exception_ptr take_error() { return std::exchange(error_, nullptr); }

  /// Explicit copy of a buffer's content; every call is counted.
  BlockContent copy_out(Role role);
  std::uint64_t copies() const { return copies_; }

  std::vector<ControlMessage> trace() const;

 private:
  void record(ControlMessage msg);

  ChannelKey key_;
  std::size_t capacity_;
  std::array<BlockBuffer, 3> buffers_;
  RotationState rotation_;
  MessageQueue to_daemon_;
  MessageQueue to_agent_;
  OpKind op_ = OpKind::Gen;
  const Partition* partition_ = nullptr;
  std::exception_ptr error_;
  std::uint64_t copies_ = 0;

  mutable std::mutex trace_mutex_;
  std::vector<ControlMessage> trace_;
  std::string diagnostic_;
};

/// In-process key space standing in for System V shared memory keys.
class ChannelRegistry {
 public:
  std::shared_ptr<SharedRegion> create(std::size_t capacity);
  std::shared_ptr<SharedRegion> bind(ChannelKey key) const;
  void release(ChannelKey key);

 private:
  mutable std::mutex mutex_;
  ChannelKey next_key_ = 1;
  std::unordered_map<ChannelKey, std::shared_ptr<SharedRegion>> regions_;
};

}  // namespace accelplug

#endif  // ACCELPLUG_SHARED_REGION_HPP
