#include "saltplan/network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <stack>

#include "saltplan/io.hpp"

namespace saltplan {

SpeedUnit parse_speed_unit(const std::string& text) {
  if (text == "kmh" || text == "km/h" || text == "kph") return SpeedUnit::kmh;
  if (text == "mph") return SpeedUnit::mph;
  throw SchemaError(fmt::format("unknown speed_unit '{}'", text));
}

std::string to_string(SpeedUnit unit) {
  return unit == SpeedUnit::mph ? "mph" : "kmh";
}

double kmh_per_unit(SpeedUnit unit) noexcept {
  return unit == SpeedUnit::mph ? 1.609344 : 1.0;
}

std::vector<RoadEdge> expand_records(const std::vector<EdgeRecord>& records) {
  std::vector<RoadEdge> edges;
  edges.reserve(records.size() * 2);
  for (const auto& r : records) {
    RoadEdge e;
    e.id = EdgeId{2 * r.row_id};
    e.from = r.from;
    e.to = r.to;
    e.length_km = r.length_km;
    e.speed_limit = r.speed;
    e.lanes = r.lanes;
    e.oneway = r.oneway;
    e.requires_treatment = r.treat;
    e.geometry = r.geometry;
    if (!r.oneway) {
      RoadEdge back = e;
      back.id = EdgeId{2 * r.row_id + 1};
      std::swap(back.from, back.to);
      std::reverse(back.geometry.begin(), back.geometry.end());
      edges.push_back(std::move(e));
      edges.push_back(std::move(back));
    } else {
      edges.push_back(std::move(e));
    }
  }
  return edges;
}

// _____________________________________________________________________________
RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<RoadEdge> edges,
                         InstanceHeader header)
    : header_(std::move(header)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(edges_.begin(), edges_.end(),
            [](const RoadEdge& a, const RoadEdge& b) { return a.id < b.id; });

  node_lookup_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_lookup_.emplace(raw(nodes_[i].id), i).second) {
      throw ValidationError(
          fmt::format("duplicate node id {}", raw(nodes_[i].id)));
    }
  }

  const std::size_t n = nodes_.size();
  tail_.resize(edges_.size());
  head_.resize(edges_.size());
  std::vector<std::uint32_t> out_deg(n, 0), in_deg(n, 0);
  edge_lookup_.reserve(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (!edge_lookup_.emplace(raw(e.id), i).second) {
      throw ValidationError(fmt::format("duplicate edge id {}", raw(e.id)));
    }
    auto from = node_lookup_.find(raw(e.from));
    auto to = node_lookup_.find(raw(e.to));
    if (from == node_lookup_.end() || to == node_lookup_.end()) {
      auto missing = from == node_lookup_.end() ? e.from : e.to;
      throw SchemaError(fmt::format("edge {} (source row {}) references unknown node {}",
                                    raw(e.id), raw(e.id) >> 1, raw(missing)));
    }
    if (!(e.length_km > 0.0) || !std::isfinite(e.length_km)) {
      throw ValidationError(fmt::format("edge {}: length_km must be > 0, got {}",
                                        raw(e.id), e.length_km));
    }
    if (!(e.speed_limit > 0.0) || !std::isfinite(e.speed_limit)) {
      throw ValidationError(fmt::format("edge {}: speed must be > 0, got {}",
                                        raw(e.id), e.speed_limit));
    }
    if (e.lanes < 1) {
      throw ValidationError(
          fmt::format("edge {}: lanes must be >= 1, got {}", raw(e.id), e.lanes));
    }
    tail_[i] = from->second;
    head_[i] = to->second;
    ++out_deg[tail_[i]];
    ++in_deg[head_[i]];
    if (e.requires_treatment) required_.push_back(i);
  }

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    out_offsets_[v + 1] = out_offsets_[v] + out_deg[v];
    in_offsets_[v + 1] = in_offsets_[v] + in_deg[v];
  }
  out_list_.resize(edges_.size());
  in_list_.resize(edges_.size());
  std::vector<std::uint32_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::uint32_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  // Edges are already id-sorted, so each adjacency list comes out id-sorted.
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out_list_[out_fill[tail_[i]]++] = static_cast<std::uint32_t>(i);
    in_list_[in_fill[head_[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::optional<std::size_t> RoadNetwork::find_node(NodeId id) const {
  auto it = node_lookup_.find(raw(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RoadNetwork::find_edge(EdgeId id) const {
  auto it = edge_lookup_.find(raw(id));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t RoadNetwork::node_index(NodeId id) const {
  if (auto i = find_node(id)) return *i;
  throw ValidationError(fmt::format("unknown node {}", raw(id)));
}

std::size_t RoadNetwork::edge_index(EdgeId id) const {
  if (auto i = find_edge(id)) return *i;
  throw ValidationError(fmt::format("unknown edge {}", raw(id)));
}

std::span<const std::uint32_t> RoadNetwork::out_edges(
    std::size_t node) const noexcept {
  return {out_list_.data() + out_offsets_[node],
          out_list_.data() + out_offsets_[node + 1]};
}

std::span<const std::uint32_t> RoadNetwork::in_edges(
    std::size_t node) const noexcept {
  return {in_list_.data() + in_offsets_[node],
          in_list_.data() + in_offsets_[node + 1]};
}

Point RoadNetwork::midpoint(std::size_t edge) const {
  const auto& g = edges_[edge].geometry;
  if (g.size() < 2) {
    const auto& a = nodes_[tail_[edge]].pos;
    const auto& b = nodes_[head_[edge]].pos;
    return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
  }
  double half = polyline_length(g) / 2.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    double seg = std::hypot(g[i].x - g[i - 1].x, g[i].y - g[i - 1].y);
    if (seg >= half && seg > 0.0) {
      double t = half / seg;
      return {g[i - 1].x + t * (g[i].x - g[i - 1].x),
              g[i - 1].y + t * (g[i].y - g[i - 1].y)};
    }
    half -= seg;
  }
  return g.back();
}

RoadNetwork RoadNetwork::induced(const std::vector<bool>& keep) const {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (keep[i]) nodes.push_back(nodes_[i]);
  }
  std::vector<RoadEdge> edges;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (keep[tail_[i]] && keep[head_[i]]) edges.push_back(edges_[i]);
  }
  return RoadNetwork(std::move(nodes), std::move(edges), header_);
}

std::vector<EdgeRecord> RoadNetwork::to_records() const {
  std::vector<EdgeRecord> out;
  for (const auto& e : edges_) {
    const std::int64_t id = raw(e.id);
    if (e.oneway) {
      if (id % 2 != 0) {
        throw ValidationError(fmt::format(
            "edge {}: one-way edges must carry an even directed id", id));
      }
    } else {
      const auto twin = find_edge(EdgeId{id ^ 1});
      bool ok = twin.has_value();
      if (ok) {
        const auto& t = edges_[*twin];
        ok = t.from == e.to && t.to == e.from && !t.oneway &&
             t.lanes == e.lanes && t.speed_limit == e.speed_limit &&
             t.requires_treatment == e.requires_treatment;
      }
      if (!ok) {
        throw ValidationError(fmt::format(
            "edge {}: two-way edge has no matching twin {}", id, id ^ 1));
      }
      if (id % 2 != 0) continue;
    }
    EdgeRecord r;
    r.row_id = id / 2;
    r.from = e.from;
    r.to = e.to;
    r.length_km = e.length_km;
    r.speed = e.speed_limit;
    r.lanes = e.lanes;
    r.oneway = e.oneway;
    r.treat = e.requires_treatment;
    r.geometry = e.geometry;
    out.push_back(std::move(r));
  }
  return out;
}

// _____________________________________________________________________________
InstancePaths InstancePaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "nodes.csv", dir / "edges.csv", dir / "instance.json"};
}

std::vector<Node> parse_nodes_csv(const std::string& text) {
  auto table = io::CsvTable::parse(text);
  auto c_id = table.require_column("node_id");
  auto c_x = table.require_column("x");
  auto c_y = table.require_column("y");
  std::vector<Node> nodes;
  nodes.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto where = fmt::format("nodes.csv line {}", table.line_of(r));
    nodes.push_back({NodeId{io::parse_int(table.at(r, c_id), where)},
                     {io::parse_double(table.at(r, c_x), where),
                      io::parse_double(table.at(r, c_y), where)}});
  }
  return nodes;
}

std::vector<EdgeRecord> parse_edges_csv(const std::string& text) {
  auto table = io::CsvTable::parse(text);
  auto c_id = table.require_column("edge_id");
  auto c_from = table.require_column("from");
  auto c_to = table.require_column("to");
  auto c_len = table.require_column("length_km");
  auto c_speed = table.require_column("speed");
  auto c_lanes = table.require_column("lanes");
  auto c_oneway = table.require_column("oneway");
  auto c_treat = table.require_column("treat");
  auto c_geom = table.column("geometry");
  std::vector<EdgeRecord> out;
  out.reserve(table.rows());
  std::set<std::int64_t> seen;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto where = fmt::format("edges.csv line {}", table.line_of(r));
    EdgeRecord rec;
    rec.row_id = io::parse_int(table.at(r, c_id), where);
    if (!seen.insert(rec.row_id).second) {
      throw ValidationError(
          fmt::format("{}: duplicate edge_id {}", where, rec.row_id));
    }
    rec.from = NodeId{io::parse_int(table.at(r, c_from), where)};
    rec.to = NodeId{io::parse_int(table.at(r, c_to), where)};
    rec.length_km = io::parse_double(table.at(r, c_len), where);
    rec.speed = io::parse_double(table.at(r, c_speed), where);
    rec.lanes = static_cast<int>(io::parse_int(table.at(r, c_lanes), where));
    rec.oneway = io::parse_bool(table.at(r, c_oneway), where);
    rec.treat = io::parse_bool(table.at(r, c_treat), where);
    if (c_geom) rec.geometry = io::parse_wkt_linestring(table.at(r, *c_geom));
    out.push_back(std::move(rec));
  }
  return out;
}

InstanceHeader parse_instance_header(const std::string& text) {
  InstanceHeader header;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("instance.json: {}", e.what()));
  }
  header.name = j.value("name", std::string{});
  header.speed_unit = parse_speed_unit(j.value("speed_unit", std::string{"kmh"}));
  return header;
}

RoadNetwork load_network(const std::string& nodes_csv,
                         const std::string& edges_csv, InstanceHeader header) {
  return RoadNetwork(parse_nodes_csv(nodes_csv),
                     expand_records(parse_edges_csv(edges_csv)),
                     std::move(header));
}

RoadNetwork load_network(const InstancePaths& paths) {
  InstanceHeader header;
  if (!paths.header_json.empty() && std::filesystem::exists(paths.header_json)) {
    header = parse_instance_header(io::read_file(paths.header_json));
  }
  return load_network(io::read_file(paths.nodes_csv),
                      io::read_file(paths.edges_csv), std::move(header));
}

std::string format_nodes_csv(const RoadNetwork& network) {
  std::string out = "node_id,x,y\n";
  for (const auto& n : network.nodes()) {
    out += fmt::format("{},{},{}\n", raw(n.id), io::format_double(n.pos.x),
                       io::format_double(n.pos.y));
  }
  return out;
}

std::string format_edges_csv(const RoadNetwork& network) {
  std::string out =
      "edge_id,from,to,length_km,speed,lanes,oneway,treat,geometry\n";
  for (const auto& r : network.to_records()) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.row_id, raw(r.from),
                       raw(r.to), io::format_double(r.length_km),
                       io::format_double(r.speed), r.lanes,
                       r.oneway ? "true" : "false", r.treat ? "true" : "false",
                       io::csv_escape(io::format_wkt_linestring(r.geometry)));
  }
  return out;
}

std::string format_instance_header(const InstanceHeader& header) {
  nlohmann::ordered_json j;
  j["name"] = header.name;
  j["speed_unit"] = to_string(header.speed_unit);
  return j.dump(2) + "\n";
}

// _____________________________________________________________________________
std::vector<std::size_t> scc_labels(const RoadNetwork& network) {
  const std::size_t n = network.node_count();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), label(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  std::size_t components = 0;

  struct Frame {
    std::size_t node;
    std::size_t next;  // position in the out-edge list
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& f = call.back();
      auto outs = network.out_edges(f.node);
      if (f.next < outs.size()) {
        std::size_t w = network.head(outs[f.next++]);
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      std::size_t v = f.node;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          label[w] = components;
        } while (w != v);
        ++components;
      }
    }
  }
  return label;
}

RoadNetwork largest_scc(const RoadNetwork& network) {
  if (network.empty()) throw ValidationError("largest_scc: empty network");
  auto label = scc_labels(network);
  std::size_t count = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::size_t> size(count, 0);
  std::vector<std::size_t> first_node(count, network.node_count());
  for (std::size_t v = 0; v < label.size(); ++v) {
    ++size[label[v]];
    // Node indices follow id order, so the first hit is the smallest id.
    first_node[label[v]] = std::min(first_node[label[v]], v);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c) {
    if (size[c] > size[best] ||
        (size[c] == size[best] && first_node[c] < first_node[best])) {
      best = c;
    }
  }
  std::vector<bool> keep(label.size());
  for (std::size_t v = 0; v < label.size(); ++v) keep[v] = label[v] == best;
  return network.induced(keep);
}

// _____________________________________________________________________________
namespace {

bool same_attributes(const RoadEdge& a, const RoadEdge& b) {
  return a.oneway == b.oneway && a.speed_limit == b.speed_limit &&
         a.lanes == b.lanes && a.requires_treatment == b.requires_treatment;
}

class ChainCompressor {
 public:
  ChainCompressor(const RoadNetwork& network,
                  const std::unordered_set<NodeId>& protected_nodes)
      : network_(network) {
    const std::size_t n = network.node_count();
    node_alive_.assign(n, true);
    protected_.assign(n, false);
    for (auto id : protected_nodes) {
      if (auto i = network.find_node(id)) protected_[*i] = true;
    }
    in_.resize(n);
    out_.resize(n);
    for (std::size_t i = 0; i < network.edge_count(); ++i) {
      add_edge(network.edge(i), network.tail(i), network.head(i));
    }
  }

  RoadNetwork run() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < node_alive_.size(); ++v) {
        if (node_alive_[v] && !protected_[v] && try_merge(v)) changed = true;
      }
    }
    std::vector<Node> nodes;
    for (std::size_t v = 0; v < node_alive_.size(); ++v) {
      if (node_alive_[v]) nodes.push_back(network_.node(v));
    }
    std::vector<RoadEdge> edges;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edge_alive_[i]) edges.push_back(edges_[i]);
    }
    return RoadNetwork(std::move(nodes), std::move(edges), network_.header());
  }

 private:
  std::size_t add_edge(RoadEdge e, std::size_t tail, std::size_t head) {
    std::size_t idx = edges_.size();
    edges_.push_back(std::move(e));
    edge_alive_.push_back(true);
    tails_.push_back(tail);
    heads_.push_back(head);
    out_[tail].push_back(idx);
    in_[head].push_back(idx);
    return idx;
  }

  void kill_edge(std::size_t idx) {
    edge_alive_[idx] = false;
    auto drop = [idx](std::vector<std::size_t>& list) {
      list.erase(std::remove(list.begin(), list.end(), idx), list.end());
    };
    drop(out_[tails_[idx]]);
    drop(in_[heads_[idx]]);
  }

  Polyline piece(std::size_t idx) const {
    if (!edges_[idx].geometry.empty()) return edges_[idx].geometry;
    return {network_.node(tails_[idx]).pos, network_.node(heads_[idx]).pos};
  }

  void merge(std::size_t in_idx, std::size_t out_idx) {
    const auto& a = edges_[in_idx];
    const auto& b = edges_[out_idx];
    RoadEdge m = a;
    m.id = std::min(a.id, b.id);
    m.to = b.to;
    m.length_km = a.length_km + b.length_km;
    if (a.geometry.empty() && b.geometry.empty()) {
      m.geometry.clear();
    } else {
      m.geometry = piece(in_idx);
      auto rest = piece(out_idx);
      auto begin = rest.begin();
      if (!m.geometry.empty() && m.geometry.back() == rest.front()) ++begin;
      m.geometry.insert(m.geometry.end(), begin, rest.end());
    }
    std::size_t tail = tails_[in_idx];
    std::size_t head = heads_[out_idx];
    kill_edge(in_idx);
    kill_edge(out_idx);
    add_edge(std::move(m), tail, head);
  }

  bool try_merge(std::size_t v) {
    const auto& ins = in_[v];
    const auto& outs = out_[v];
    if (ins.size() == 1 && outs.size() == 1) {
      std::size_t ei = ins[0], eo = outs[0];
      std::size_t u = tails_[ei], w = heads_[eo];
      if (u == v || w == v || u == w) return false;
      if (!same_attributes(edges_[ei], edges_[eo])) return false;
      merge(ei, eo);
      node_alive_[v] = false;
      return true;
    }
    if (ins.size() == 2 && outs.size() == 2) {
      std::size_t u = tails_[ins[0]], w = tails_[ins[1]];
      if (u == w || u == v || w == v) return false;
      std::size_t in_u = ins[0], in_w = ins[1];
      std::size_t out_u, out_w;
      if (heads_[outs[0]] == u && heads_[outs[1]] == w) {
        out_u = outs[0];
        out_w = outs[1];
      } else if (heads_[outs[0]] == w && heads_[outs[1]] == u) {
        out_u = outs[1];
        out_w = outs[0];
      } else {
        return false;
      }
      if (!same_attributes(edges_[in_u], edges_[out_w]) ||
          !same_attributes(edges_[in_w], edges_[out_u])) {
        return false;
      }
      merge(in_u, out_w);
      merge(in_w, out_u);
      node_alive_[v] = false;
      return true;
    }
    return false;
  }

  const RoadNetwork& network_;
  std::vector<bool> node_alive_;
  std::vector<bool> protected_;
  std::vector<RoadEdge> edges_;
  std::vector<bool> edge_alive_;
  std::vector<std::size_t> tails_, heads_;
  std::vector<std::vector<std::size_t>> in_, out_;
};

}  // namespace

RoadNetwork compress_chains(const RoadNetwork& network,
                            const std::unordered_set<NodeId>& protected_nodes) {
  return ChainCompressor(network, protected_nodes).run();
}

// _____________________________________________________________________________
NetworkStats compute_stats(const RoadNetwork& network) {
  NetworkStats s;
  s.nodes = network.node_count();
  s.edges = network.edge_count();
  std::vector<double> speeds;
  std::vector<std::set<std::size_t>> neighbours(network.node_count());
  for (std::size_t i = 0; i < network.edge_count(); ++i) {
    const auto& e = network.edge(i);
    if (e.oneway) {
      ++s.source_rows;
      ++s.oneway_rows;
    } else if (raw(e.id) % 2 == 0) {
      ++s.source_rows;
    }
    s.total_km += e.length_km;
    if (e.requires_treatment) {
      ++s.treated_edges;
      s.treated_km += e.length_km;
      s.treated_lane_km += e.length_km * e.lanes;
    }
    speeds.push_back(e.speed_limit);
    if (s.lane_histogram.size() <= static_cast<std::size_t>(e.lanes)) {
      s.lane_histogram.resize(e.lanes + 1, 0);
    }
    ++s.lane_histogram[e.lanes];
    std::size_t a = network.tail(i), b = network.head(i);
    if (a != b) {
      neighbours[a].insert(b);
      neighbours[b].insert(a);
    }
  }
  s.oneway_fraction =
      s.source_rows ? static_cast<double>(s.oneway_rows) / s.source_rows : 0.0;
  for (const auto& nb : neighbours) {
    s.max_degree = std::max(s.max_degree, nb.size());
    if (nb.size() >= 4) ++s.high_degree_nodes;
  }
  if (!speeds.empty()) {
    std::sort(speeds.begin(), speeds.end());
    s.median_speed = speeds[speeds.size() / 2];
    speeds.erase(std::unique(speeds.begin(), speeds.end()), speeds.end());
    s.speed_values = speeds;
  }
  return s;
}

}  // namespace saltplan
