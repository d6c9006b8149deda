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

#ifndef ACCELPLUG_ALGO_TEMPLATE_HPP
#define ACCELPLUG_ALGO_TEMPLATE_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "accelplug/graph_store.hpp"
#include "accelplug/types.hpp"

namespace accelplug {

enum class AlgorithmKind { Sssp, PageRank, LabelPropagation };

std::string_view to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm_kind(std::string_view name);

struct ApplyOutcome {
  AttributeValue attr;
  bool active = false;
};

/// The three-operation vertex program: per-triplet generation, an
/// associative/commutative combiner, and per-vertex application.
class Algorithm {
 public:
  virtual ~Algorithm() = default;

  virtual AlgorithmKind kind() const = 0;
  virtual AttributeValue initial(VertexId id, std::uint64_t out_degree) const = 0;
  virtual bool initially_active(VertexId id) const = 0;

  virtual Message generate(const EdgeTriplet& t) const = 0;
  virtual void combine(Payload& acc, const Payload& in) const = 0;
  /// `msg` is null when the vertex received nothing this iteration.
  virtual ApplyOutcome apply(const AttributeValue& old, const Payload* msg) const = 0;

  /// True when apply runs on every owned vertex, not only message targets.
  virtual bool applies_to_all() const { return false; }

  /// Attribute equality used for change detection (bitwise for floats).
  virtual bool same(const AttributeValue& a, const AttributeValue& b) const = 0;

  /// Per-vertex convergence residual; only PageRank uses it.
  virtual double residual(const AttributeValue&, const AttributeValue&) const { return 0.0; }

  /// Local convergence test for one node's iteration outcome.
  virtual bool converged(std::size_t active_count, double max_residual) const {
    (void)max_residual;
    return active_count == 0;
  }

  virtual int max_iterations() const = 0;
};

class SsspAlgorithm final : public Algorithm {
 public:
  /// Up to four sources, one per distance slot.
  explicit SsspAlgorithm(std::vector<VertexId> sources, int max_iterations = 1 << 30);

  AlgorithmKind kind() const override { return AlgorithmKind::Sssp; }
  AttributeValue initial(VertexId id, std::uint64_t out_degree) const override;
  bool initially_active(VertexId id) const override;
  Message generate(const EdgeTriplet& t) const override;
  void combine(Payload& acc, const Payload& in) const override;
  ApplyOutcome apply(const AttributeValue& old, const Payload* msg) const override;
  bool same(const AttributeValue& a, const AttributeValue& b) const override;
  int max_iterations() const override { return max_iterations_; }

  const std::vector<VertexId>& sources() const { return sources_; }

 private:
  std::vector<VertexId> sources_;
  int max_iterations_;
};

class PageRankAlgorithm final : public Algorithm {
 public:
  static constexpr double kDamping = 0.85;
  static constexpr double kTolerance = 1e-9;

  explicit PageRankAlgorithm(int max_iterations = 100) : max_iterations_(max_iterations) {}

  AlgorithmKind kind() const override { return AlgorithmKind::PageRank; }
  AttributeValue initial(VertexId id, std::uint64_t out_degree) const override;
  bool initially_active(VertexId) const override { return true; }
  Message generate(const EdgeTriplet& t) const override;
  void combine(Payload& acc, const Payload& in) const override;
  ApplyOutcome apply(const AttributeValue& old, const Payload* msg) const override;
  bool applies_to_all() const override { return true; }
  bool same(const AttributeValue& a, const AttributeValue& b) const override;
  double residual(const AttributeValue& old, const AttributeValue& now) const override;
  bool converged(std::size_t active_count, double max_residual) const override;
  int max_iterations() const override { return max_iterations_; }

 private:
  int max_iterations_;
};

class LabelPropagationAlgorithm final : public Algorithm {
 public:
  explicit LabelPropagationAlgorithm(int max_iterations = 15) : max_iterations_(max_iterations) {}

  AlgorithmKind kind() const override { return AlgorithmKind::LabelPropagation; }
  AttributeValue initial(VertexId id, std::uint64_t out_degree) const override;
  bool initially_active(VertexId) const override { return true; }
  Message generate(const EdgeTriplet& t) const override;
  void combine(Payload& acc, const Payload& in) const override;
  ApplyOutcome apply(const AttributeValue& old, const Payload* msg) const override;
  bool same(const AttributeValue& a, const AttributeValue& b) const override;
  int max_iterations() const override { return max_iterations_; }

 private:
  int max_iterations_;
};

struct AlgorithmParams {
  std::vector<VertexId> sssp_sources;  // empty: four lowest vertex ids
  int max_iterations = 0;              // 0: algorithm default
};

std::shared_ptr<const Algorithm> make_algorithm(AlgorithmKind kind, const VertexSet& vertices,
                                                const AlgorithmParams& params = {});

/// Sets every owned vertex to its initial attribute (out-degree taken from
/// the local edge table, which holds all out-edges of owned vertices) and its
/// initial activity; clears mirrors and update flags.
void initialize_partition(Partition& partition, const Algorithm& algorithm);

/// Merged messages, one per target, ascending target id.
struct MessageSet {
  std::vector<Message> entries;

  const Payload* find(VertexId target) const;
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

std::vector<Message> msg_gen(const Algorithm& algorithm, std::span<const TripletBlock> blocks);

/// Groups by target and folds in input order.
MessageSet msg_merge(const Algorithm& algorithm, std::span<const Message> messages);

struct ApplyStep {
  std::vector<VertexUpdate> updates;  // changed vertices only
  VertexSet next_active;
  double max_residual = 0.0;
};

/// Applies merged messages to owned vertices. Throws on a non-owned target.
ApplyStep msg_apply(const Partition& partition, const MessageSet& msgs, const Algorithm& algorithm);

/// Single-lane apply of a prepared item list; shared by the serial path.
std::vector<ApplyResult> apply_items(const Algorithm& algorithm, const Partition& partition,
                                     std::span<const ApplyItem> items);

struct ReferenceResult {
  std::map<VertexId, AttributeValue> attributes;
  int iterations = 0;
  bool converged = false;
};

/// Un-partitioned, un-pipelined gen -> merge -> apply loop; the oracle every
/// distributed run is compared against.
ReferenceResult run_reference(const Algorithm& algorithm, const EdgeList& graph);

/// Text form used by attribute dumps: "d0 d1 d2 d3", "rank" or "label".
std::string format_attribute(const AttributeValue& attr);

/// Equality for oracle comparison: exact, or relative `pr_tolerance` for ranks.
bool attributes_match(const AttributeValue& a, const AttributeValue& b, double pr_tolerance);

}  // namespace accelplug

#endif  // ACCELPLUG_ALGO_TEMPLATE_HPP
