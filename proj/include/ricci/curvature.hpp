#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "ricci/errors.hpp"
#include "ricci/graph.hpp"
#include "ricci/transport.hpp"

namespace ricci {

// Per-edge Ollivier-Ricci curvature, indexed like g.edges().
struct CurvatureField {
  std::vector<double> values;
  double mean_unweighted = 0.0;
  double mean_mass_weighted = 0.0;  // sum(mu * kappa) / sum(mu)
};

namespace detail {

inline bool share_neighbor(const WeightedGraph& g, NodeId a, NodeId b) {
  auto na = g.neighbors(a), nb = g.neighbors(b);
  auto i = na.begin(), j = nb.begin();
  while (i != na.end() && j != nb.end()) {
    if (i->node < j->node) {
      ++i;
    } else if (j->node < i->node) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Hop distances between the neighbourhoods of two adjacent nodes. Any such
// pair is joined by a-x-y-b, so the distance is 0, 1, 2 or exactly 3.
inline CostMatrix neighborhood_costs(const WeightedGraph& g, NodeId x, NodeId y) {
  auto nx = g.neighbors(x), ny = g.neighbors(y);
  CostMatrix c(nx.size(), ny.size());
  for (std::size_t i = 0; i < nx.size(); ++i) {
    for (std::size_t j = 0; j < ny.size(); ++j) {
      NodeId a = nx[i].node, b = ny[j].node;
      double d = 3.0;
      if (a == b) {
        d = 0.0;
      } else if (g.adjacent(a, b)) {
        d = 1.0;
      } else if (detail::share_neighbor(g, a, b)) {
        d = 2.0;
      }
      c(i, j) = d;
    }
  }
  return c;
}

inline double edge_curvature(const WeightedGraph& g, EdgeId e) {
  const Edge& ed = g.edge(e);
  NodeMeasure mx = node_measure(g, ed.u);
  NodeMeasure my = node_measure(g, ed.v);
  return 1.0 - w1_distance(mx, my, neighborhood_costs(g, ed.u, ed.v));
}

inline double edge_curvature(const WeightedGraph& g, NodeId x, NodeId y) {
  auto e = g.find_edge(x, y);
  if (!e) throw TargetError("curvature is defined on edges only");
  return edge_curvature(g, *e);
}

inline void fill_means(const WeightedGraph& g, CurvatureField& f) {
  double sum = 0.0, wsum = 0.0, mass = 0.0;
  for (std::size_t e = 0; e < f.values.size(); ++e) {
    sum += f.values[e];
    wsum += g.weight(e) * f.values[e];
    mass += g.weight(e);
  }
  const auto n = static_cast<double>(f.values.size());
  f.mean_unweighted = f.values.empty() ? 0.0 : sum / n;
  f.mean_mass_weighted = mass > 0.0 ? wsum / mass : 0.0;
}

// Caches the neighbourhood cost matrices of a fixed topology so a flow only
// re-solves the transport problems when weights change.
class CurvatureEngine {
 public:
  explicit CurvatureEngine(const WeightedGraph& g, std::size_t workers = 1)
      : workers_(std::max<std::size_t>(1, workers)) {
    for (NodeId x = 0; x < g.node_count(); ++x)
      if (g.degree(x) == 0) throw IsolatedNodeError("node '" + g.label(x) + "' has no neighbours");
    costs_.reserve(g.edge_count());
    for (const Edge& e : g.edges()) costs_.push_back(neighborhood_costs(g, e.u, e.v));
  }

  // Evaluates every edge of `g`, which must share the topology the engine
  // was built on. Workers write disjoint slots, so the result does not
  // depend on the worker count.
  CurvatureField field(const WeightedGraph& g) const {
    if (g.edge_count() != costs_.size()) throw ParameterError("graph does not match curvature engine");
    CurvatureField f;
    f.values.assign(g.edge_count(), 0.0);
    auto run = [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        const Edge& ed = g.edge(e);
        NodeMeasure mx = node_measure(g, ed.u);
        NodeMeasure my = node_measure(g, ed.v);
        f.values[e] = 1.0 - w1_distance(mx, my, costs_[e]);
      }
    };
    const std::size_t m = g.edge_count();
    if (workers_ == 1 || m < 64) {
      run(0, m);
    } else {
      std::vector<std::jthread> pool;
      std::vector<std::exception_ptr> errors(workers_);
      const std::size_t chunk = (m + workers_ - 1) / workers_;
      for (std::size_t w = 0; w < workers_; ++w) {
        std::size_t b = w * chunk, e = std::min(m, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e, w] {
          try {
            run(b, e);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      pool.clear();
      for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    }
    fill_means(g, f);
    return f;
  }

 private:
  std::size_t workers_;
  std::vector<CostMatrix> costs_;
};

inline CurvatureField curvature_field(const WeightedGraph& g, std::size_t workers = 1) {
  return CurvatureEngine(g, workers).field(g);
}

}  // namespace ricci
