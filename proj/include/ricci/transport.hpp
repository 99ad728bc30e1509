#pragma once

// Exact Wasserstein-1 between finitely supported measures.
//
// w1_distance solves the transportation LP with the transportation simplex
// (MODI / u-v method): north-west-corner start, Dantzig pricing, and a
// permanent switch to Bland's rule after a run of degenerate pivots so the
// method always terminates. Ties are broken by (row, column) index.
//
// w1_oracle is an independent check used by the tests: it rescales masses
// to integer units and enumerates every integer coupling (row by row,
// memoised on the vector of unfilled column units). By integrality of the
// transportation polytope this equals the LP optimum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "ricci/errors.hpp"
#include "ricci/measure.hpp"

namespace ricci {

inline constexpr double kMassBalanceTolerance = 1e-9;

struct TransportCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

struct TransportSolution {
  double cost = 0.0;
  std::vector<TransportCell> plan;  // basic cells, row-major order
  std::size_t pivots = 0;
};

namespace detail {

inline void validate_transport_input(std::span<const double> supply, std::span<const double> demand,
                                     const CostMatrix& cost) {
  if (supply.empty() || demand.empty()) throw MarginalMismatchError("transport between empty measures");
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw CostError("cost matrix shape does not match the supports");
  double sa = 0.0, sb = 0.0;
  for (double x : supply) {
    if (!std::isfinite(x) || x < 0.0) throw MarginalMismatchError("masses must be finite and nonnegative");
    sa += x;
  }
  for (double x : demand) {
    if (!std::isfinite(x) || x < 0.0) throw MarginalMismatchError("masses must be finite and nonnegative");
    sb += x;
  }
  if (std::abs(sa - sb) > kMassBalanceTolerance)
    throw MarginalMismatchError("total masses differ: " + std::to_string(sa) + " vs " + std::to_string(sb));
  for (double c : cost.data()) {
    if (!std::isfinite(c)) throw CostError("cost entries must be finite");
    if (c < 0.0) throw CostError("cost entries must be nonnegative");
  }
}

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, const CostMatrix& cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost),
        flow_(m_ * n_, 0.0), basic_(m_ * n_, 0), u_(m_), v_(n_) {
    double cmax = 0.0;
    for (double c : cost.data()) cmax = std::max(cmax, c);
    tol_ = 1e-12 * (1.0 + cmax);
    north_west_corner(supply, demand);
  }

  TransportSolution solve() {
    const std::size_t max_pivots = 50 * (m_ * n_) + 1000;
    const std::size_t degenerate_limit = 2 * (m_ + n_);
    std::size_t degenerate_run = 0;
    bool bland = false;
    TransportSolution out;

    for (;;) {
      compute_potentials();
      std::size_t ei = 0, ej = 0;
      if (!price(bland, ei, ej)) break;
      if (out.pivots++ >= max_pivots) throw SolverError("transportation simplex exceeded pivot limit");
      double theta = pivot(ei, ej);
      if (theta <= 0.0) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
      }
    }

    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (basic_[i * n_ + j]) {
          out.plan.push_back({i, j, flow_[i * n_ + j]});
          out.cost += cost_(i, j) * flow_[i * n_ + j];
        }
    return out;
  }

 private:
  void north_west_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> a(supply.begin(), supply.end());
    std::vector<double> b(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    for (;;) {
      double q = std::max(0.0, std::min(a[i], b[j]));
      flow_[i * n_ + j] = q;
      basic_[i * n_ + j] = 1;
      a[i] -= q;
      b[j] -= q;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Tree nodes: rows 0..m-1, columns m..m+n-1.
  void build_tree() {
    tree_.assign(m_ + n_, {});
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (basic_[i * n_ + j]) {
          tree_[i].push_back(m_ + j);
          tree_[m_ + j].push_back(i);
        }
  }

  void compute_potentials() {
    build_tree();
    std::vector<char> done(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    u_[0] = 0.0;
    done[0] = 1;
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t next : tree_[node]) {
        if (done[next]) continue;
        done[next] = 1;
        if (node < m_) {
          v_[next - m_] = cost_(node, next - m_) - u_[node];
        } else {
          u_[next] = cost_(next, node - m_) - v_[node - m_];
        }
        stack.push_back(next);
      }
    }
  }

  // Picks the entering cell; false when the basis is optimal.
  bool price(bool bland, std::size_t& ei, std::size_t& ej) const {
    double best = -tol_;
    bool found = false;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[i * n_ + j]) continue;
        double r = cost_(i, j) - u_[i] - v_[j];
        if (r < best) {
          ei = i;
          ej = j;
          found = true;
          if (bland) return true;
          best = r;
        }
      }
    }
    return found;
  }

  double pivot(std::size_t ei, std::size_t ej) {
    // Path in the basis tree from column ej to row ei.
    const std::size_t start = m_ + ej, goal = ei;
    std::vector<std::size_t> parent(m_ + n_, std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> queue{start};
    parent[start] = start;
    for (std::size_t h = 0; h < queue.size() && parent[goal] == std::numeric_limits<std::size_t>::max(); ++h) {
      std::size_t node = queue[h];
      for (std::size_t next : tree_[node]) {
        if (parent[next] != std::numeric_limits<std::size_t>::max()) continue;
        parent[next] = node;
        queue.push_back(next);
      }
    }
    if (parent[goal] == std::numeric_limits<std::size_t>::max())
      throw SolverError("basis is not a spanning tree");

    std::vector<std::size_t> path{goal};
    while (path.back() != start) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());  // start (column) ... goal (row)

    auto cell_of = [&](std::size_t a, std::size_t b) {
      std::size_t r = a < m_ ? a : b;
      std::size_t c = a < m_ ? b - m_ : a - m_;
      return r * n_ + c;
    };

    // Path edges alternate minus, plus, ..., minus.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k + 1 < path.size(); k += 2) {
      std::size_t c = cell_of(path[k], path[k + 1]);
      if (flow_[c] < theta || (flow_[c] == theta && c < leaving)) {
        theta = flow_[c];
        leaving = c;
      }
    }
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      std::size_t c = cell_of(path[k], path[k + 1]);
      flow_[c] += (k % 2 == 0) ? -theta : theta;
    }
    flow_[ei * n_ + ej] = theta;
    basic_[ei * n_ + ej] = 1;
    flow_[leaving] = 0.0;
    basic_[leaving] = 0;
    return theta;
  }

  std::size_t m_, n_;
  const CostMatrix& cost_;
  std::vector<double> flow_;
  std::vector<char> basic_;
  std::vector<double> u_, v_;
  std::vector<std::vector<std::size_t>> tree_;
  double tol_ = 0.0;
};

}  // namespace detail

// Optimal transport plan between `supply` and `demand` under `cost`.
inline TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                         const CostMatrix& cost) {
  detail::validate_transport_input(supply, demand, cost);
  if (supply.size() == 1 || demand.size() == 1) {
    // The coupling is forced.
    TransportSolution out;
    for (std::size_t i = 0; i < supply.size(); ++i)
      for (std::size_t j = 0; j < demand.size(); ++j) {
        double f = supply.size() == 1 ? demand[j] : supply[i];
        out.plan.push_back({i, j, f});
        out.cost += cost(i, j) * f;
      }
    return out;
  }
  return detail::TransportSimplex(supply, demand, cost).solve();
}

inline double w1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& cost) {
  return solve_transport(mu.masses, nu.masses, cost).cost;
}

inline constexpr std::size_t kOracleMaxSupport = 7;
inline constexpr std::int64_t kOracleMaxDenominator = 5040;

namespace detail {

// Smallest D <= 5040 with every mass * D integral (to 1e-9 relative).
inline std::int64_t common_denominator(std::span<const double> a, std::span<const double> b) {
  for (std::int64_t d = 1; d <= kOracleMaxDenominator; ++d) {
    auto integral = [d](double m) {
      double s = m * static_cast<double>(d);
      return std::abs(s - std::round(s)) <= 1e-9 * static_cast<double>(d);
    };
    if (std::all_of(a.begin(), a.end(), integral) && std::all_of(b.begin(), b.end(), integral)) return d;
  }
  throw OracleScopeError("masses are not rational with denominator <= 5040");
}

}  // namespace detail

inline double w1_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& cost) {
  detail::validate_transport_input(mu.masses, nu.masses, cost);
  if (mu.size() > kOracleMaxSupport || nu.size() > kOracleMaxSupport)
    throw OracleScopeError("oracle supports are limited to 7 sites");
  const std::int64_t denom = detail::common_denominator(mu.masses, nu.masses);

  std::vector<std::int64_t> rows, cols;
  for (double m : mu.masses) rows.push_back(std::llround(m * static_cast<double>(denom)));
  for (double m : nu.masses) cols.push_back(std::llround(m * static_cast<double>(denom)));
  std::int64_t total_rows = 0, total_cols = 0;
  for (auto r : rows) total_rows += r;
  for (auto c : cols) total_cols += c;
  if (total_rows != total_cols) throw MarginalMismatchError("integer unit totals differ");

  // Mixed-radix code of the remaining column units.
  std::vector<std::uint64_t> radix(cols.size());
  double states = 1.0;
  std::uint64_t place = 1;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    radix[j] = place;
    place *= static_cast<std::uint64_t>(cols[j] + 1);
    states *= static_cast<double>(cols[j] + 1);
  }
  if (states > 2e7) throw OracleScopeError("oracle enumeration space too large");

  auto encode = [&](const std::vector<std::int64_t>& rem) {
    std::uint64_t code = 0;
    for (std::size_t j = 0; j < rem.size(); ++j) code += radix[j] * static_cast<std::uint64_t>(rem[j]);
    return code;
  };
  auto decode = [&](std::uint64_t code) {
    std::vector<std::int64_t> rem(cols.size());
    for (std::size_t j = cols.size(); j-- > 0;) {
      rem[j] = static_cast<std::int64_t>(code / radix[j]);
      code %= radix[j];
    }
    return rem;
  };

  std::unordered_map<std::uint64_t, double> layer{{encode(cols), 0.0}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::unordered_map<std::uint64_t, double> next;
    for (const auto& [code, base] : layer) {
      std::vector<std::int64_t> rem = decode(code);
      // Every split of row i's units over the columns that still have room.
      auto recurse = [&](auto&& self, std::size_t j, std::int64_t left, double acc) -> void {
        if (j == cols.size()) {
          if (left != 0) return;
          std::uint64_t key = encode(rem);
          auto it = next.find(key);
          if (it == next.end() || acc < it->second) next[key] = acc;
          return;
        }
        std::int64_t cap = std::min(left, rem[j]);
        for (std::int64_t k = 0; k <= cap; ++k) {
          rem[j] -= k;
          self(self, j + 1, left - k, acc + static_cast<double>(k) * cost(i, j));
          rem[j] += k;
        }
      };
      recurse(recurse, 0, rows[i], base);
    }
    layer = std::move(next);
  }
  auto it = layer.find(0);
  if (it == layer.end()) throw SolverError("oracle found no feasible coupling");
  return it->second / static_cast<double>(denom);
}

}  // namespace ricci
