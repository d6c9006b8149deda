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

#include "accelplug/algo_template.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

namespace accelplug {

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Sssp: return "sssp";
    case AlgorithmKind::PageRank: return "pagerank";
    case AlgorithmKind::LabelPropagation: return "lp";
  }
  return "?";
}

AlgorithmKind parse_algorithm_kind(std::string_view name) {
  if (name == "sssp") return AlgorithmKind::Sssp;
  if (name == "pagerank" || name == "pr") return AlgorithmKind::PageRank;
  if (name == "lp") return AlgorithmKind::LabelPropagation;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

namespace {

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

// ---------------------------------------------------------------------------
// SSSP (four sources relaxed together)

SsspAlgorithm::SsspAlgorithm(std::vector<VertexId> sources, int max_iterations)
    : sources_(std::move(sources)), max_iterations_(max_iterations) {
  if (sources_.size() > kSsspSources) throw ConfigError("at most 4 SSSP sources");
}

AttributeValue SsspAlgorithm::initial(VertexId id, std::uint64_t) const {
  Distance dist;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i] == id) dist.d[i] = 0.0;
  }
  return dist;
}

bool SsspAlgorithm::initially_active(VertexId id) const {
  return std::find(sources_.begin(), sources_.end(), id) != sources_.end();
}

Message SsspAlgorithm::generate(const EdgeTriplet& t) const {
  const auto& src = std::get<Distance>(t.src_attr);
  Distance out;
  for (std::size_t i = 0; i < kSsspSources; ++i) out.d[i] = src.d[i] + t.edge.weight;
  return Message{t.edge.dst, out};
}

void SsspAlgorithm::combine(Payload& acc, const Payload& in) const {
  auto& a = std::get<Distance>(acc);
  const auto& b = std::get<Distance>(in);
  for (std::size_t i = 0; i < kSsspSources; ++i) a.d[i] = std::min(a.d[i], b.d[i]);
}

ApplyOutcome SsspAlgorithm::apply(const AttributeValue& old, const Payload* msg) const {
  const auto& cur = std::get<Distance>(old);
  if (msg == nullptr) return {cur, false};
  const auto& in = std::get<Distance>(*msg);
  Distance next = cur;
  bool improved = false;
  for (std::size_t i = 0; i < kSsspSources; ++i) {
    if (in.d[i] < cur.d[i]) {
      next.d[i] = in.d[i];
      improved = true;
    }
  }
  return {next, improved};
}

bool SsspAlgorithm::same(const AttributeValue& a, const AttributeValue& b) const {
  const auto& x = std::get<Distance>(a);
  const auto& y = std::get<Distance>(b);
  for (std::size_t i = 0; i < kSsspSources; ++i) {
    if (!bits_equal(x.d[i], y.d[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PageRank

AttributeValue PageRankAlgorithm::initial(VertexId, std::uint64_t out_degree) const {
  return Rank{1.0, out_degree};
}

Message PageRankAlgorithm::generate(const EdgeTriplet& t) const {
  const auto& src = std::get<Rank>(t.src_attr);
  return Message{t.edge.dst, src.rank / static_cast<double>(src.out_degree)};
}

void PageRankAlgorithm::combine(Payload& acc, const Payload& in) const {
  std::get<double>(acc) += std::get<double>(in);
}

ApplyOutcome PageRankAlgorithm::apply(const AttributeValue& old, const Payload* msg) const {
  Rank next = std::get<Rank>(old);
  const double sum = msg == nullptr ? 0.0 : std::get<double>(*msg);
  next.rank = (1.0 - kDamping) + kDamping * sum;
  return {next, true};
}

bool PageRankAlgorithm::same(const AttributeValue& a, const AttributeValue& b) const {
  const auto& x = std::get<Rank>(a);
  const auto& y = std::get<Rank>(b);
  return bits_equal(x.rank, y.rank) && x.out_degree == y.out_degree;
}

double PageRankAlgorithm::residual(const AttributeValue& old, const AttributeValue& now) const {
  return std::abs(std::get<Rank>(now).rank - std::get<Rank>(old).rank);
}

bool PageRankAlgorithm::converged(std::size_t, double max_residual) const {
  return max_residual < kTolerance;
}

// ---------------------------------------------------------------------------
// Label propagation

AttributeValue LabelPropagationAlgorithm::initial(VertexId id, std::uint64_t) const {
  return Label{id};
}

Message LabelPropagationAlgorithm::generate(const EdgeTriplet& t) const {
  LabelVotes votes;
  votes.counts.emplace_back(std::get<Label>(t.src_attr).label, 1);
  return Message{t.edge.dst, std::move(votes)};
}

void LabelPropagationAlgorithm::combine(Payload& acc, const Payload& in) const {
  auto& a = std::get<LabelVotes>(acc).counts;
  const auto& b = std::get<LabelVotes>(in).counts;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
  merged.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      merged.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      merged.push_back(b[j++]);
    } else {
      merged.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  a = std::move(merged);
}

ApplyOutcome LabelPropagationAlgorithm::apply(const AttributeValue& old, const Payload* msg) const {
  const auto cur = std::get<Label>(old);
  if (msg == nullptr) return {cur, false};
  const auto& counts = std::get<LabelVotes>(*msg).counts;
  if (counts.empty()) return {cur, false};
  // counts are sorted by label, so the first maximum is the smallest label
  auto best = counts.front();
  for (const auto& c : counts) {
    if (c.second > best.second) best = c;
  }
  Label next{best.first};
  return {next, next.label != cur.label};
}

bool LabelPropagationAlgorithm::same(const AttributeValue& a, const AttributeValue& b) const {
  return std::get<Label>(a).label == std::get<Label>(b).label;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Algorithm> make_algorithm(AlgorithmKind kind, const VertexSet& vertices,
                                                const AlgorithmParams& params) {
  switch (kind) {
    case AlgorithmKind::Sssp: {
      std::vector<VertexId> sources = params.sssp_sources;
      if (sources.empty()) {
        for (std::size_t i = 0; i < vertices.size() && i < kSsspSources; ++i) {
          sources.push_back(vertices[i]);
        }
      }
      return std::make_shared<SsspAlgorithm>(
          std::move(sources), params.max_iterations > 0 ? params.max_iterations : 1 << 30);
    }
    case AlgorithmKind::PageRank:
      return std::make_shared<PageRankAlgorithm>(params.max_iterations > 0 ? params.max_iterations
                                                                           : 100);
    case AlgorithmKind::LabelPropagation:
      return std::make_shared<LabelPropagationAlgorithm>(
          params.max_iterations > 0 ? params.max_iterations : 15);
  }
  throw ConfigError("unknown algorithm");
}

const Payload* MessageSet::find(VertexId target) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), target,
                             [](const Message& m, VertexId t) { return m.target < t; });
  if (it == entries.end() || it->target != target) return nullptr;
  return &it->payload;
}

std::vector<Message> msg_gen(const Algorithm& algorithm, std::span<const TripletBlock> blocks) {
  std::vector<Message> out;
  for (const auto& block : blocks) {
    for (const auto& t : block) out.push_back(algorithm.generate(t));
  }
  return out;
}

MessageSet msg_merge(const Algorithm& algorithm, std::span<const Message> messages) {
  std::vector<std::size_t> order(messages.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return messages[a].target < messages[b].target;
  });
  MessageSet set;
  for (std::size_t idx : order) {
    const Message& m = messages[idx];
    if (!set.entries.empty() && set.entries.back().target == m.target) {
      algorithm.combine(set.entries.back().payload, m.payload);
    } else {
      set.entries.push_back(m);
    }
  }
  return set;
}

std::vector<ApplyResult> apply_items(const Algorithm& algorithm, const Partition& partition,
                                     std::span<const ApplyItem> items) {
  std::vector<ApplyResult> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const Vertex& v = partition.vertex(item.id);
    auto outcome = algorithm.apply(v.attr, item.msg ? &*item.msg : nullptr);
    ApplyResult r;
    r.id = item.id;
    r.changed = !algorithm.same(v.attr, outcome.attr);
    r.active = outcome.active;
    r.residual = algorithm.residual(v.attr, outcome.attr);
    r.attr = std::move(outcome.attr);
    out.push_back(std::move(r));
  }
  return out;
}

ApplyStep msg_apply(const Partition& partition, const MessageSet& msgs,
                    const Algorithm& algorithm) {
  std::vector<ApplyItem> items;
  for (const auto& m : msgs.entries) {
    if (!partition.owns(m.target)) {
      throw Error("message to vertex " + std::to_string(m.target) + " not owned by node " +
                  std::to_string(partition.node_id()));
    }
  }
  if (algorithm.applies_to_all()) {
    for (const auto& v : partition.vertices()) {
      const Payload* p = msgs.find(v.id);
      items.push_back(ApplyItem{v.id, p ? std::optional<Payload>(*p) : std::nullopt});
    }
  } else {
    for (const auto& m : msgs.entries) items.push_back(ApplyItem{m.target, m.payload});
  }
  ApplyStep step;
  for (auto& r : apply_items(algorithm, partition, items)) {
    step.max_residual = std::max(step.max_residual, r.residual);
    if (r.active) step.next_active.push_back(r.id);
    if (r.changed) step.updates.push_back(VertexUpdate{r.id, std::move(r.attr)});
  }
  return step;
}

void initialize_partition(Partition& partition, const Algorithm& algorithm) {
  for (auto& v : partition.vertices()) {
    v.attr = algorithm.initial(v.id, partition.out_edges(v.id).size());
    v.active = algorithm.initially_active(v.id);
    v.updated = false;
  }
  partition.clear_mirrors();
}

ReferenceResult run_reference(const Algorithm& algorithm, const EdgeList& graph) {
  std::unordered_map<VertexId, std::uint64_t> out_degree;
  for (const auto& e : graph.edges) ++out_degree[e.src];

  std::map<VertexId, AttributeValue> attrs;
  VertexSet active;
  for (VertexId v : graph.vertices) {
    auto it = out_degree.find(v);
    attrs.emplace(v, algorithm.initial(v, it == out_degree.end() ? 0 : it->second));
    if (algorithm.initially_active(v)) active.push_back(v);
  }

  // out-edges per source, in file order
  std::map<VertexId, std::vector<const Edge*>> adjacency;
  for (const auto& e : graph.edges) adjacency[e.src].push_back(&e);

  ReferenceResult result;
  const int cap = algorithm.max_iterations();
  for (int it = 1; it <= cap; ++it) {
    std::vector<Message> messages;
    for (VertexId src : active) {
      auto adj = adjacency.find(src);
      if (adj == adjacency.end()) continue;
      for (const Edge* e : adj->second) {
        messages.push_back(algorithm.generate(EdgeTriplet{*e, attrs.at(src), attrs.at(e->dst)}));
      }
    }
    MessageSet merged = msg_merge(algorithm, messages);

    VertexSet next_active;
    double max_residual = 0.0;
    auto apply_one = [&](VertexId id, const Payload* msg) {
      AttributeValue& cur = attrs.at(id);
      auto outcome = algorithm.apply(cur, msg);
      max_residual = std::max(max_residual, algorithm.residual(cur, outcome.attr));
      if (outcome.active) next_active.push_back(id);
      cur = std::move(outcome.attr);
    };
    if (algorithm.applies_to_all()) {
      for (VertexId v : graph.vertices) apply_one(v, merged.find(v));
    } else {
      for (const auto& m : merged.entries) apply_one(m.target, &m.payload);
    }

    result.iterations = it;
    active = std::move(next_active);
    if (algorithm.converged(active.size(), max_residual)) {
      result.converged = true;
      break;
    }
  }
  result.attributes = std::move(attrs);
  return result;
}

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool close_relative(double a, double b, double tol) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * scale;
}

}  // namespace

std::string format_attribute(const AttributeValue& attr) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Distance>) {
          std::string s;
          for (std::size_t i = 0; i < kSsspSources; ++i) {
            if (i) s += ' ';
            s += format_double(v.d[i]);
          }
          return s;
        } else if constexpr (std::is_same_v<T, Rank>) {
          return format_double(v.rank);
        } else {
          return std::to_string(v.label);
        }
      },
      attr);
}

bool attributes_match(const AttributeValue& a, const AttributeValue& b, double pr_tolerance) {
  if (a.index() != b.index()) return false;
  if (const auto* ra = std::get_if<Rank>(&a)) {
    const auto& rb = std::get<Rank>(b);
    return ra->out_degree == rb.out_degree && close_relative(ra->rank, rb.rank, pr_tolerance);
  }
  return a == b;
}

}  // namespace accelplug
