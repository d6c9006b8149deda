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

#include "accelplug/graph_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>
#include <string_view>

#include "accelplug/algo_template.hpp"

namespace accelplug {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

VertexId parse_id(std::string_view tok, std::size_t line) {
  VertexId v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid vertex id '" + std::string(tok) + "'");
  }
  return v;
}

double parse_weight(std::string_view tok, std::size_t line) {
  double w = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), w);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(w)) {
    throw ParseError(line, "invalid weight '" + std::string(tok) + "'");
  }
  if (w < 0.0) throw ParseError(line, "negative weight '" + std::string(tok) + "'");
  return w;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') continue;
    if (toks.size() != 2 && toks.size() != 3) {
      throw ParseError(line_no, "expected 'src dst [weight]'");
    }
    Edge e;
    e.src = parse_id(toks[0], line_no);
    e.dst = parse_id(toks[1], line_no);
    if (toks.size() == 3) e.weight = parse_weight(toks[2], line_no);
    edges.push_back(e);
  }
  return make_edge_list(std::move(edges));
}

EdgeList load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph file '" + path.string() + "'");
  return parse_edge_list(in);
}

EdgeList make_edge_list(std::vector<Edge> edges) {
  EdgeList g;
  g.vertices.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    g.vertices.push_back(e.src);
    g.vertices.push_back(e.dst);
  }
  std::sort(g.vertices.begin(), g.vertices.end());
  g.vertices.erase(std::unique(g.vertices.begin(), g.vertices.end()), g.vertices.end());
  g.edges = std::move(edges);
  return g;
}

// ---------------------------------------------------------------------------
// Partition

void Partition::add_vertex(VertexId id) {
  if (!vertices_.empty() && vertices_.back().id >= id) {
    throw std::logic_error("partition vertices must be added in ascending id order");
  }
  index_.emplace(id, vertices_.size());
  vertices_.push_back(Vertex{id, AttributeValue{}, false, false});
  ve_map_.emplace_back();
}

void Partition::add_edge(const Edge& e) {
  auto it = index_.find(e.src);
  if (it == index_.end()) throw std::logic_error("edge source not owned by partition");
  ve_map_[it->second].push_back(static_cast<std::uint32_t>(edges_.size()));
  edges_.push_back(e);
}

Vertex* Partition::find(VertexId id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &vertices_[it->second];
}

const Vertex* Partition::find(VertexId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &vertices_[it->second];
}

const Vertex& Partition::vertex(VertexId id) const {
  const Vertex* v = find(id);
  if (v == nullptr) {
    throw Error("vertex " + std::to_string(id) + " not owned by node " +
                std::to_string(node_id_));
  }
  return *v;
}

std::span<const std::uint32_t> Partition::out_edges(VertexId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return {};
  return ve_map_[it->second];
}

const AttributeValue* Partition::mirror(VertexId id) const {
  auto it = mirrors_.find(id);
  return it == mirrors_.end() ? nullptr : &it->second;
}

void Partition::set_mirror(VertexId id, AttributeValue attr) {
  mirrors_.insert_or_assign(id, std::move(attr));
}

const AttributeValue& Partition::attribute(VertexId id) const {
  if (const Vertex* v = find(id)) return v->attr;
  if (const AttributeValue* m = mirror(id)) return *m;
  throw std::logic_error("vertex " + std::to_string(id) + " unresolved on node " +
                         std::to_string(node_id_));
}

void Partition::clear_updated_flags() {
  for (auto& v : vertices_) v.updated = false;
}

// ---------------------------------------------------------------------------

int PartitionedGraph::owner(VertexId id) const {
  auto it = vertex_owner.find(id);
  if (it == vertex_owner.end()) throw Error("unknown vertex " + std::to_string(id));
  return it->second;
}

PartitionedGraph partition_graph(const EdgeList& graph, std::span<const std::int64_t> sizes) {
  if (sizes.empty()) throw ConfigError("partition count must be at least 1");
  std::int64_t total = 0;
  for (auto s : sizes) {
    if (s < 0) throw ConfigError("partition sizes must be non-negative");
    total += s;
  }
  if (total != static_cast<std::int64_t>(graph.vertices.size())) {
    throw ConfigError("partition sizes sum to " + std::to_string(total) + ", expected " +
                      std::to_string(graph.vertices.size()));
  }

  PartitionedGraph pg;
  pg.partitions.reserve(sizes.size());
  pg.vertex_owner.reserve(graph.vertices.size());
  std::size_t next = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    Partition p(static_cast<int>(j));
    for (std::int64_t k = 0; k < sizes[j]; ++k, ++next) {
      p.add_vertex(graph.vertices[next]);
      pg.vertex_owner.emplace(graph.vertices[next], static_cast<int>(j));
    }
    pg.partitions.push_back(std::move(p));
  }
  for (const auto& e : graph.edges) {
    pg.partitions[pg.vertex_owner.at(e.src)].add_edge(e);
  }
  return pg;
}

std::vector<std::int64_t> even_sizes(std::size_t vertex_count, std::size_t parts) {
  if (parts == 0) throw ConfigError("partition count must be at least 1");
  std::vector<std::int64_t> sizes(parts, static_cast<std::int64_t>(vertex_count / parts));
  for (std::size_t j = 0; j < vertex_count % parts; ++j) ++sizes[j];
  return sizes;
}

std::vector<TripletBlock> build_blocks(const Partition& partition, const VertexSet& active,
                                       std::size_t block_size) {
  if (block_size == 0) throw ConfigError("block size must be at least 1");
  std::vector<TripletBlock> blocks;
  TripletBlock current;
  current.reserve(block_size);
  for (VertexId src : active) {
    const Vertex& v = partition.vertex(src);
    for (std::uint32_t idx : partition.out_edges(src)) {
      const Edge& e = partition.edges()[idx];
      current.push_back(EdgeTriplet{e, v.attr, partition.attribute(e.dst)});
      if (current.size() == block_size) {
        blocks.push_back(std::move(current));
        current = TripletBlock{};
        current.reserve(block_size);
      }
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

std::size_t apply_updates(Partition& partition, std::span<const VertexUpdate> updates,
                          const Algorithm& algorithm) {
  std::size_t changed = 0;
  for (const auto& u : updates) {
    if (Vertex* v = partition.find(u.id)) {
      if (!algorithm.same(v->attr, u.attr)) {
        v->attr = u.attr;
        v->updated = true;
        ++changed;
      }
    } else if (const AttributeValue* m = partition.mirror(u.id)) {
      if (!algorithm.same(*m, u.attr)) {
        partition.set_mirror(u.id, u.attr);
        ++changed;
      }
    } else {
      throw Error("update to unknown vertex " + std::to_string(u.id) + " on node " +
                  std::to_string(partition.node_id()));
    }
  }
  return changed;
}

}  // namespace accelplug
