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

#ifndef ACCELPLUG_TYPES_HPP
#define ACCELPLUG_TYPES_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace accelplug {

using VertexId = std::uint64_t;

/// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<VertexId>;

inline constexpr std::size_t kSsspSources = 4;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Per-source shortest distances; also the SSSP message payload.
struct Distance {
  std::array<double, kSsspSources> d{kInfinity, kInfinity, kInfinity, kInfinity};
  bool operator==(const Distance&) const = default;
};

struct Rank {
  double rank = 1.0;
  std::uint64_t out_degree = 0;
  bool operator==(const Rank&) const = default;
};

struct Label {
  std::uint64_t label = 0;
  bool operator==(const Label&) const = default;
};

using AttributeValue = std::variant<Distance, Rank, Label>;

/// Label multiset as (label, count) pairs sorted by label.
struct LabelVotes {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;
  bool operator==(const LabelVotes&) const = default;
};

/// Merge-able message payload: distances (SSSP), rank share (PR) or votes (LP).
using Payload = std::variant<Distance, double, LabelVotes>;

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  double weight = 1.0;
  bool operator==(const Edge&) const = default;
};

struct EdgeTriplet {
  Edge edge;
  AttributeValue src_attr;
  AttributeValue dst_attr;
};

struct Message {
  VertexId target = 0;
  Payload payload;
};

/// Input of an apply step: a vertex plus its merged message, if any.
struct ApplyItem {
  VertexId id = 0;
  std::optional<Payload> msg;
};

struct ApplyResult {
  VertexId id = 0;
  AttributeValue attr;
  bool changed = false;
  bool active = false;
  double residual = 0.0;
};

struct VertexUpdate {
  VertexId id = 0;
  AttributeValue attr;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Out-of-order interface call or daemon/agent state-machine violation.
class LifecycleError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace accelplug

#endif  // ACCELPLUG_TYPES_HPP
