#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ricci/errors.hpp"
#include "ricci/measure.hpp"

namespace ricci {

using NodeId = std::size_t;
using EdgeId = std::size_t;

// Undirected edge, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Adjacent {
  NodeId node;
  EdgeId edge;
};

enum class Normalization { global, none };

// Neighbourhood measure mu_x of a node: one step of the weight-proportional
// random walk, no mass left at x.
using NodeMeasure = DiscreteMeasure;

// Fixed undirected topology with a per-edge weight field. Copies share the
// topology; only the weight vector is owned per value, so successor
// snapshots during a flow are cheap.
class WeightedGraph {
 public:
  WeightedGraph() : topo_(std::make_shared<Topology>()) {}

  // Builds a graph on `node_count` nodes. Endpoints are canonicalised to
  // u < v; self-loops, duplicates, out-of-range endpoints and negative or
  // non-finite weights are rejected. Empty `labels` means "0", "1", ...
  WeightedGraph(std::size_t node_count, std::vector<Edge> edges, std::vector<double> weights,
                std::vector<std::string> labels = {}) {
    if (edges.size() != weights.size())
      throw GraphFormatError("edge and weight counts differ");
    if (labels.empty()) {
      labels.reserve(node_count);
      for (std::size_t i = 0; i < node_count; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != node_count) throw GraphFormatError("label count differs from node count");

    auto topo = std::make_shared<Topology>();
    topo->labels = std::move(labels);
    topo->adjacency.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
      if (!topo->index.emplace(topo->labels[i], i).second)
        throw GraphFormatError("duplicate node label '" + topo->labels[i] + "'");
    }
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges.size() * 2);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto [u, v] = edges[e];
      if (u >= node_count || v >= node_count) throw GraphFormatError("edge endpoint out of range");
      if (u == v) throw GraphFormatError("self-loop at node '" + topo->labels[u] + "'");
      if (u > v) std::swap(u, v);
      if (!seen.insert(pair_key(u, v)).second)
        throw GraphFormatError("duplicate edge " + topo->labels[u] + "-" + topo->labels[v]);
      if (!std::isfinite(weights[e]) || weights[e] < 0.0)
        throw GraphFormatError("edge weights must be finite and nonnegative");
      topo->edges.push_back({u, v});
      topo->adjacency[u].push_back({v, e});
      topo->adjacency[v].push_back({u, e});
    }
    for (auto& adj : topo->adjacency)
      std::sort(adj.begin(), adj.end(), [](const Adjacent& a, const Adjacent& b) { return a.node < b.node; });
    topo_ = std::move(topo);
    weights_ = std::move(weights);
  }

  std::size_t node_count() const { return topo_->adjacency.size(); }
  std::size_t edge_count() const { return topo_->edges.size(); }

  std::span<const Edge> edges() const { return topo_->edges; }
  const Edge& edge(EdgeId e) const { return topo_->edges[e]; }

  std::span<const double> weights() const { return weights_; }
  double weight(EdgeId e) const { return weights_[e]; }

  // Neighbours sorted by node id.
  std::span<const Adjacent> neighbors(NodeId x) const { return topo_->adjacency[x]; }
  std::size_t degree(NodeId x) const { return topo_->adjacency[x].size(); }

  double strength(NodeId x) const {
    double s = 0.0;
    for (const auto& a : neighbors(x)) s += weights_[a.edge];
    return s;
  }

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const {
    if (a >= node_count() || b >= node_count()) return std::nullopt;
    auto adj = neighbors(a);
    auto it = std::lower_bound(adj.begin(), adj.end(), b,
                               [](const Adjacent& x, NodeId n) { return x.node < n; });
    if (it != adj.end() && it->node == b) return it->edge;
    return std::nullopt;
  }

  bool adjacent(NodeId a, NodeId b) const { return find_edge(a, b).has_value(); }

  const std::string& label(NodeId x) const { return topo_->labels[x]; }
  std::span<const std::string> labels() const { return topo_->labels; }

  std::optional<NodeId> find_node(const std::string& label) const {
    auto it = topo_->index.find(label);
    if (it == topo_->index.end()) return std::nullopt;
    return it->second;
  }

  // Floor applied to every edge weight: 1e-6 / |E|.
  double weight_floor() const { return edge_count() == 0 ? 0.0 : 1e-6 / static_cast<double>(edge_count()); }

  // Same topology, new weight field.
  WeightedGraph with_weights(std::vector<double> w) const {
    if (w.size() != edge_count()) throw GraphFormatError("weight field size differs from edge count");
    WeightedGraph g;
    g.topo_ = topo_;
    g.weights_ = std::move(w);
    return g;
  }

  bool same_topology(const WeightedGraph& other) const { return topo_ == other.topo_; }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.weights_ != b.weights_) return false;
    if (a.topo_ == b.topo_) return true;
    return a.topo_->labels == b.topo_->labels && a.topo_->edges == b.topo_->edges;
  }

 private:
  struct Topology {
    std::vector<std::string> labels;
    std::unordered_map<std::string, NodeId> index;
    std::vector<Edge> edges;
    std::vector<std::vector<Adjacent>> adjacency;
  };

  static std::uint64_t pair_key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
  }

  std::shared_ptr<const Topology> topo_;
  std::vector<double> weights_;
};

inline NodeMeasure node_measure(const WeightedGraph& g, NodeId x) {
  if (x >= g.node_count()) throw TargetError("node index out of range");
  auto adj = g.neighbors(x);
  if (adj.empty()) throw IsolatedNodeError("node '" + g.label(x) + "' has no neighbours");
  NodeMeasure m;
  m.support.reserve(adj.size());
  m.masses.reserve(adj.size());
  double total = 0.0;
  for (const auto& a : adj) total += g.weight(a.edge);
  if (!(total > 0.0)) throw IsolatedNodeError("node '" + g.label(x) + "' has zero strength");
  for (const auto& a : adj) {
    m.support.push_back(a.node);
    m.masses.push_back(g.weight(a.edge) / total);
  }
  return m;
}

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

// Breadth-first hop counts from `source`; kUnreachable where no path exists.
inline std::vector<std::size_t> hop_distances_from(const WeightedGraph& g, NodeId source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreachable);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId x = frontier.front();
    frontier.pop();
    for (const auto& a : g.neighbors(x)) {
      if (dist[a.node] == kUnreachable) {
        dist[a.node] = dist[x] + 1;
        frontier.push(a.node);
      }
    }
  }
  return dist;
}

inline std::size_t hop_distance(const WeightedGraph& g, NodeId x, NodeId y) {
  if (x >= g.node_count() || y >= g.node_count()) throw TargetError("node index out of range");
  if (x == y) return 0;
  auto d = hop_distances_from(g, x)[y];
  if (d == kUnreachable) throw UnreachableError("no path between '" + g.label(x) + "' and '" + g.label(y) + "'");
  return d;
}

inline bool is_connected(const WeightedGraph& g) {
  if (g.node_count() == 0) return true;
  auto d = hop_distances_from(g, 0);
  return std::none_of(d.begin(), d.end(), [](std::size_t v) { return v == kUnreachable; });
}

// Global mode projects the weights onto the edge simplex (sum 1), clamps to
// the floor and divides by the new total once. None mode only clamps.
inline std::vector<double> normalized_weights(std::span<const double> w, double floor, Normalization mode) {
  double total = 0.0;
  bool any_positive = false;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw DegenerateWeightsError("weights must be finite and nonnegative");
    total += x;
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) throw DegenerateWeightsError("all edge weights are zero");

  std::vector<double> out(w.begin(), w.end());
  if (mode == Normalization::none) {
    for (double& x : out) x = std::max(x, floor);
    return out;
  }
  for (double& x : out) x = std::max(x / total, floor);
  double clamped_total = 0.0;
  for (double x : out) clamped_total += x;
  for (double& x : out) x /= clamped_total;
  return out;
}

inline WeightedGraph normalize_weights(const WeightedGraph& g, Normalization mode) {
  return g.with_weights(normalized_weights(g.weights(), g.weight_floor(), mode));
}

// Portable unbiased draw in [0, bound) from a 64-bit Mersenne twister; the
// standard distributions are implementation-defined and would break
// bit-reproducibility across toolchains.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

// Barabasi-Albert preferential attachment: m seed nodes without edges, then
// every new node attaches to m distinct targets drawn proportionally to
// degree. Yields m * (n - m) edges, uniform weights, globally normalised.
inline WeightedGraph generate_scale_free(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || n <= m) throw ParameterError("scale-free generator needs n > m >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  edges.reserve(m * (n - m));
  std::vector<NodeId> repeated;
  repeated.reserve(2 * m * (n - m));
  std::vector<NodeId> targets(m);
  for (std::size_t i = 0; i < m; ++i) targets[i] = i;

  for (NodeId source = m; source < n; ++source) {
    for (NodeId t : targets) edges.push_back({t, source});
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, source);

    std::vector<NodeId> next;
    next.reserve(m);
    while (next.size() < m) {
      NodeId pick = repeated[uniform_index(rng, repeated.size())];
      if (std::find(next.begin(), next.end(), pick) == next.end()) next.push_back(pick);
    }
    std::sort(next.begin(), next.end());
    targets = std::move(next);
  }
  WeightedGraph g(n, std::move(edges), std::vector<double>(m * (n - m), 1.0));
  return normalize_weights(g, Normalization::global);
}

// Nodes by descending degree, ties by ascending node id.
inline std::vector<NodeId> top_degree_nodes(const WeightedGraph& g, std::size_t k) {
  if (k > g.node_count()) throw ParameterError("k exceeds node count");
  std::vector<NodeId> order(g.node_count());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  order.resize(k);
  return order;
}

}  // namespace ricci
