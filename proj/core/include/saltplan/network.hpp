#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "saltplan/types.hpp"

namespace saltplan {

enum class SpeedUnit { kmh, mph };

SpeedUnit parse_speed_unit(const std::string& text);
std::string to_string(SpeedUnit unit);
// Multiplier taking a speed in `unit` to km/h.
double kmh_per_unit(SpeedUnit unit) noexcept;

struct InstanceHeader {
  std::string name;
  SpeedUnit speed_unit = SpeedUnit::kmh;
};

struct Node {
  NodeId id{};
  Point pos;
};

/// A directed road segment. Two-way roads are two RoadEdges with reciprocal
/// endpoints; by convention the directed ids of a source row `s` are `2s`
/// (digitised direction) and `2s + 1` (reverse), so `id ^ 1` is the twin.
struct RoadEdge {
  EdgeId id{};
  NodeId from{};
  NodeId to{};
  double length_km = 0.0;
  double speed_limit = 0.0;
  int lanes = 1;
  bool oneway = true;
  bool requires_treatment = false;
  Polyline geometry;  // empty when the source had none
};

/// One row of edges.csv, before two-way expansion.
struct EdgeRecord {
  std::int64_t row_id = 0;
  NodeId from{};
  NodeId to{};
  double length_km = 0.0;
  double speed = 0.0;
  int lanes = 1;
  bool oneway = true;
  bool treat = false;
  Polyline geometry;
};

std::vector<RoadEdge> expand_records(const std::vector<EdgeRecord>& records);

/// Immutable directed multigraph. Nodes and edges are kept sorted by id and
/// addressed internally by dense indices; adjacency lists are sorted by
/// edge id.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Node> nodes, std::vector<RoadEdge> edges,
              InstanceHeader header = {});

  const InstanceHeader& header() const noexcept { return header_; }
  SpeedUnit speed_unit() const noexcept { return header_.speed_unit; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const RoadEdge> edges() const noexcept { return edges_; }
  const Node& node(std::size_t index) const { return nodes_.at(index); }
  const RoadEdge& edge(std::size_t index) const { return edges_.at(index); }

  std::optional<std::size_t> find_node(NodeId id) const;
  std::optional<std::size_t> find_edge(EdgeId id) const;
  std::size_t node_index(NodeId id) const;  // throws ValidationError
  std::size_t edge_index(EdgeId id) const;  // throws ValidationError
  const RoadEdge& edge_by_id(EdgeId id) const { return edges_[edge_index(id)]; }

  std::size_t tail(std::size_t edge) const noexcept { return tail_[edge]; }
  std::size_t head(std::size_t edge) const noexcept { return head_[edge]; }

  std::span<const std::uint32_t> out_edges(std::size_t node) const noexcept;
  std::span<const std::uint32_t> in_edges(std::size_t node) const noexcept;

  /// Hours to traverse `length_km` at `speed` (instance unit).
  double hours_at(double length_km, double speed) const noexcept {
    return length_km / (speed * kmh_per_unit(header_.speed_unit));
  }
  /// Deadhead time of an edge, driven at its speed limit.
  double travel_hours(std::size_t edge) const noexcept {
    return hours_at(edges_[edge].length_km, edges_[edge].speed_limit);
  }

  /// Indices of treatment-required edges in ascending edge-id order.
  const std::vector<std::size_t>& required_edges() const noexcept {
    return required_;
  }

  /// Arc-length midpoint of the edge geometry, or the mean of its endpoint
  /// coordinates when it has none.
  Point midpoint(std::size_t edge) const;

  /// Subgraph induced by `keep` (node indices); all edges with both endpoints
  /// kept survive.
  RoadNetwork induced(const std::vector<bool>& keep) const;

  /// Converts back to one record per source row (twins collapse into a single
  /// two-way row). Throws ValidationError if the id convention is broken.
  std::vector<EdgeRecord> to_records() const;

 private:
  InstanceHeader header_;
  std::vector<Node> nodes_;
  std::vector<RoadEdge> edges_;
  std::unordered_map<std::int64_t, std::size_t> node_lookup_;
  std::unordered_map<std::int64_t, std::size_t> edge_lookup_;
  std::vector<std::size_t> tail_;
  std::vector<std::size_t> head_;
  std::vector<std::uint32_t> out_offsets_, out_list_;
  std::vector<std::uint32_t> in_offsets_, in_list_;
  std::vector<std::size_t> required_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct InstancePaths {
  std::filesystem::path nodes_csv;
  std::filesystem::path edges_csv;
  std::filesystem::path header_json;  // optional; kmh when absent

  static InstancePaths in_directory(const std::filesystem::path& dir);
};

std::vector<Node> parse_nodes_csv(const std::string& text);
std::vector<EdgeRecord> parse_edges_csv(const std::string& text);
InstanceHeader parse_instance_header(const std::string& text);

/// Builds a network from nodes.csv / edges.csv contents. Missing endpoints
/// raise SchemaError naming the edge; bad attributes raise ValidationError.
RoadNetwork load_network(const std::string& nodes_csv,
                         const std::string& edges_csv,
                         InstanceHeader header = {});
RoadNetwork load_network(const InstancePaths& paths);

std::string format_nodes_csv(const RoadNetwork& network);
std::string format_edges_csv(const RoadNetwork& network);
std::string format_instance_header(const InstanceHeader& header);

// ---------------------------------------------------------------------------
// Pre-processing

/// Maximum-cardinality strongly connected component (ties: the component
/// holding the smallest node id).
RoadNetwork largest_scc(const RoadNetwork& network);

/// Strongly connected component label per node index (Tarjan, iterative).
std::vector<std::size_t> scc_labels(const RoadNetwork& network);

/// Merges pass-through nodes until a fixed point. Protected nodes are never
/// removed.
RoadNetwork compress_chains(const RoadNetwork& network,
                            const std::unordered_set<NodeId>& protected_nodes);

struct NetworkStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t source_rows = 0;
  std::size_t oneway_rows = 0;
  double oneway_fraction = 0.0;
  double total_km = 0.0;
  std::size_t treated_edges = 0;
  double treated_km = 0.0;
  double treated_lane_km = 0.0;
  std::size_t high_degree_nodes = 0;  // undirected degree >= 4
  std::size_t max_degree = 0;
  std::vector<double> speed_values;   // distinct, ascending
  double median_speed = 0.0;
  std::vector<std::size_t> lane_histogram;  // index = lane count
};

NetworkStats compute_stats(const RoadNetwork& network);

}  // namespace saltplan
