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

#include "accelplug/shared_region.hpp"

#include <bit>

namespace accelplug {

std::string_view to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::ExchangeFinished: return "ExchangeFinished";
    case ControlKind::RotateFinished: return "RotateFinished";
    case ControlKind::ComputeFinished: return "ComputeFinished";
    case ControlKind::ComputeAllFinished: return "ComputeAllFinished";
    case ControlKind::Shutdown: return "Shutdown";
  }
  return "?";
}

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Gen: return "Gen";
    case OpKind::Merge: return "Merge";
    case OpKind::Apply: return "Apply";
  }
  return "?";
}

bool trace_conforms(std::span<const ControlMessage> trace) {
  std::string letters;
  letters.reserve(trace.size());
  for (const auto& m : trace) {
    switch (m.kind) {
      case ControlKind::ExchangeFinished: letters += 'E'; break;
      case ControlKind::RotateFinished: letters += 'R'; break;
      case ControlKind::ComputeFinished: letters += 'C'; break;
      case ControlKind::ComputeAllFinished: letters += 'A'; break;
      case ControlKind::Shutdown: letters += 'S'; break;
    }
  }
  // ^((ERC)*ERA)*S?$
  std::size_t i = 0;
  const std::size_t n = letters.size();
  while (i < n && letters[i] != 'S') {
    if (i + 3 > n || letters[i] != 'E' || letters[i + 1] != 'R') return false;
    if (letters[i + 2] != 'C' && letters[i + 2] != 'A') return false;
    i += 3;
    if (letters[i - 1] == 'C' && (i >= n || letters[i] == 'S')) return false;
  }
  if (i < n) return i + 1 == n;
  return true;
}

std::size_t unit_count(const BlockContent& content) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
          return 0;
        } else {
          return v.size();
        }
      },
      content);
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  void real(double v) { bytes(std::bit_cast<std::uint64_t>(v)); }
  void attr(const AttributeValue& a) {
    bytes(a.index());
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Distance>) {
            for (double x : v.d) real(x);
          } else if constexpr (std::is_same_v<T, Rank>) {
            real(v.rank);
            bytes(v.out_degree);
          } else {
            bytes(v.label);
          }
        },
        a);
  }
  void payload(const Payload& p) {
    bytes(p.index());
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Distance>) {
            for (double x : v.d) real(x);
          } else if constexpr (std::is_same_v<T, double>) {
            real(v);
          } else {
            for (const auto& [label, count] : v.counts) {
              bytes(label);
              bytes(count);
            }
          }
        },
        p);
  }
};

}  // namespace

std::uint64_t checksum(const BlockContent& content) {
  Fnv f;
  f.bytes(content.index());
  std::visit(
      [&f](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::vector<EdgeTriplet>>) {
          for (const auto& t : v) {
            f.bytes(t.edge.src);
            f.bytes(t.edge.dst);
            f.real(t.edge.weight);
            f.attr(t.src_attr);
            f.attr(t.dst_attr);
          }
        } else if constexpr (std::is_same_v<T, std::vector<Message>>) {
          for (const auto& m : v) {
            f.bytes(m.target);
            f.payload(m.payload);
          }
        } else if constexpr (std::is_same_v<T, std::vector<ApplyItem>>) {
          for (const auto& item : v) {
            f.bytes(item.id);
            f.bytes(item.msg.has_value());
            if (item.msg) f.payload(*item.msg);
          }
        } else if constexpr (std::is_same_v<T, std::vector<ApplyResult>>) {
          for (const auto& r : v) {
            f.bytes(r.id);
            f.attr(r.attr);
            f.bytes(r.changed);
            f.bytes(r.active);
            f.real(r.residual);
          }
        }
      },
      content);
  return f.h;
}

// ---------------------------------------------------------------------------

void MessageQueue::push(ControlMessage msg) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    items_.push_back(msg);
  }
  ready_.notify_one();
}

std::optional<ControlMessage> MessageQueue::pop() {
  std::unique_lock lock(mutex_);
  ready_.wait(lock, [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;
  ControlMessage m = items_.front();
  items_.pop_front();
  return m;
}

void MessageQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

// ---------------------------------------------------------------------------

void SharedRegion::record(ControlMessage msg) {
  std::lock_guard lock(trace_mutex_);
  trace_.push_back(msg);
}

void SharedRegion::send_to_daemon(ControlMessage msg) {
  record(msg);
  to_daemon_.push(msg);
}

void SharedRegion::send_to_agent(ControlMessage msg) {
  record(msg);
  to_agent_.push(msg);
}

void SharedRegion::fail(std::string diagnostic) {
  {
    std::lock_guard lock(trace_mutex_);
    if (diagnostic_.empty()) diagnostic_ = std::move(diagnostic);
  }
  to_daemon_.close();
  to_agent_.close();
}

std::string SharedRegion::diagnostic() const {
  std::lock_guard lock(trace_mutex_);
  return diagnostic_;
}

BlockContent SharedRegion::copy_out(Role role) {
  ++copies_;
  return slot(role).content;
}

std::vector<ControlMessage> SharedRegion::trace() const {
  std::lock_guard lock(trace_mutex_);
  return trace_;
}

// ---------------------------------------------------------------------------

std::shared_ptr<SharedRegion> ChannelRegistry::create(std::size_t capacity) {
  std::lock_guard lock(mutex_);
  const ChannelKey key = next_key_++;
  auto region = std::make_shared<SharedRegion>(key, capacity);
  regions_.emplace(key, region);
  return region;
}

std::shared_ptr<SharedRegion> ChannelRegistry::bind(ChannelKey key) const {
  std::lock_guard lock(mutex_);
  auto it = regions_.find(key);
  if (it == regions_.end()) throw Error("channel key " + std::to_string(key) + " is unbound");
  return it->second;
}

void ChannelRegistry::release(ChannelKey key) {
  std::lock_guard lock(mutex_);
  regions_.erase(key);
}

}  // namespace accelplug
