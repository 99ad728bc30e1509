#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ricci/errors.hpp"
#include "ricci/graph.hpp"

namespace ricci {

// How per-node entropies are combined into the network value.
enum class EntropyWeighting {
  stationary,  // H = sum_x pi_x S_x
  uniform,     // H = mean_x S_x
};

struct EntropyReport {
  std::vector<double> node_entropies;  // S_x in nats
  std::vector<double> stationary;      // pi_x
  double network_entropy = 0.0;
};

namespace detail {

inline void require_entropy_preconditions(const WeightedGraph& g) {
  if (g.node_count() == 0) throw DisconnectedError("empty graph");
  if (!is_connected(g)) throw DisconnectedError("network entropy needs a connected graph");
  for (double w : g.weights())
    if (!(w > 0.0)) throw DegenerateWeightsError("network entropy needs positive weights");
}

}  // namespace detail

// Closed form for the reversible walk on an undirected graph: pi_x is
// proportional to node strength.
inline std::vector<double> stationary_distribution(const WeightedGraph& g) {
  std::vector<double> pi(g.node_count());
  double total = 0.0;
  for (NodeId x = 0; x < g.node_count(); ++x) {
    pi[x] = g.strength(x);
    total += pi[x];
  }
  for (double& p : pi) p /= total;
  return pi;
}

// Power iteration on the lazy chain (I + P) / 2, which has the same fixed
// point as P but converges on bipartite graphs too. Stops once the L1
// change per sweep drops below `tolerance`.
inline std::vector<double> stationary_power_iteration(const WeightedGraph& g, double tolerance = 1e-12,
                                                      std::size_t max_sweeps = 1'000'000) {
  detail::require_entropy_preconditions(g);
  const std::size_t n = g.node_count();
  std::vector<double> strength(n);
  for (NodeId x = 0; x < n; ++x) strength[x] = g.strength(x);
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (NodeId y = 0; y < n; ++y) {
      double in = 0.0;
      for (const auto& a : g.neighbors(y)) in += pi[a.node] * g.weight(a.edge) / strength[a.node];
      next[y] = 0.5 * (pi[y] + in);
    }
    double change = 0.0;
    for (NodeId x = 0; x < n; ++x) change += std::abs(next[x] - pi[x]);
    pi.swap(next);
    if (change < tolerance) break;
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

inline EntropyReport network_entropy(const WeightedGraph& g,
                                     EntropyWeighting weighting = EntropyWeighting::stationary) {
  detail::require_entropy_preconditions(g);
  EntropyReport r;
  r.node_entropies.resize(g.node_count());
  for (NodeId x = 0; x < g.node_count(); ++x) {
    const double s = g.strength(x);
    double h = 0.0;
    for (const auto& a : g.neighbors(x)) {
      double p = g.weight(a.edge) / s;
      if (p > 0.0) h -= p * std::log(p);
    }
    r.node_entropies[x] = h;
  }
  r.stationary = stationary_distribution(g);
  double h = 0.0;
  if (weighting == EntropyWeighting::stationary) {
    for (NodeId x = 0; x < g.node_count(); ++x) h += r.stationary[x] * r.node_entropies[x];
  } else {
    for (double s : r.node_entropies) h += s;
    h /= static_cast<double>(g.node_count());
  }
  r.network_entropy = h;
  return r;
}

}  // namespace ricci
