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

#ifndef ACCELPLUG_GRAPH_STORE_HPP
#define ACCELPLUG_GRAPH_STORE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "accelplug/types.hpp"

namespace accelplug {

class Algorithm;

struct Vertex {
  VertexId id = 0;
  AttributeValue attr;
  bool active = false;
  bool updated = false;
};

/// Whole graph as loaded: distinct vertex ids (ascending) and edges in file order.
struct EdgeList {
  VertexSet vertices;
  std::vector<Edge> edges;
};

/// Parses the whitespace-separated edge-list format ("src dst [weight]",
/// '#' comments, LF or CRLF). Throws ParseError with the 1-based line number.
EdgeList parse_edge_list(std::istream& in);
EdgeList load_edge_list(const std::filesystem::path& path);

/// Builds an EdgeList from explicit edges; vertex set is every endpoint.
EdgeList make_edge_list(std::vector<Edge> edges);

/// Node-local vertex and edge tables plus the vertex-edge mapping table.
/// Owned vertices are kept in ascending id order; edges are the out-edges of
/// owned vertices in global file order.
class Partition {
 public:
  Partition() = default;
  explicit Partition(int node_id) : node_id_(node_id) {}

  int node_id() const { return node_id_; }

  void add_vertex(VertexId id);
  void add_edge(const Edge& e);

  bool owns(VertexId id) const { return index_.contains(id); }
  Vertex* find(VertexId id);
  const Vertex* find(VertexId id) const;
  const Vertex& vertex(VertexId id) const;

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<Vertex> vertices() { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Local edge indices of the out-edges of an owned vertex (ve_map entry).
  std::span<const std::uint32_t> out_edges(VertexId id) const;

  /// Remote vertex attributes resolved for the current iteration.
  const AttributeValue* mirror(VertexId id) const;
  void set_mirror(VertexId id, AttributeValue attr);
  void clear_mirrors() { mirrors_.clear(); }
  std::size_t mirror_count() const { return mirrors_.size(); }

  /// Attribute of an owned vertex or a mirrored remote one.
  const AttributeValue& attribute(VertexId id) const;

  void clear_updated_flags();

 private:
  int node_id_ = 0;
  std::vector<Vertex> vertices_;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> ve_map_;
  std::unordered_map<VertexId, AttributeValue> mirrors_;
};

struct PartitionedGraph {
  std::vector<Partition> partitions;
  std::unordered_map<VertexId, int> vertex_owner;

  int owner(VertexId id) const;
  std::size_t size() const { return partitions.size(); }
};

/// Contiguous ascending-id range partitioning; each edge goes to its source's
/// owner. `sizes` must be non-negative and sum to |V|.
PartitionedGraph partition_graph(const EdgeList& graph,
                                 std::span<const std::int64_t> sizes);

/// Near-equal contiguous sizes for `parts` partitions (larger parts first).
std::vector<std::int64_t> even_sizes(std::size_t vertex_count, std::size_t parts);

using TripletBlock = std::vector<EdgeTriplet>;

/// Materializes the out-edges of `active` as triplets (ascending source id,
/// then local edge index) and groups them in blocks of `block_size`; the last
/// block may be short. Destination attributes come from owned vertices or
/// mirrors; a missing remote attribute is a logic error.
std::vector<TripletBlock> build_blocks(const Partition& partition,
                                       const VertexSet& active,
                                       std::size_t block_size);

/// Overwrites attributes; sets `updated` on owned vertices whose attribute
/// actually changed under the algorithm's comparator. Returns the change count.
std::size_t apply_updates(Partition& partition, std::span<const VertexUpdate> updates,
                          const Algorithm& algorithm);

}  // namespace accelplug

#endif  // ACCELPLUG_GRAPH_STORE_HPP
