#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "rentdiv/economy.hpp"

namespace rentdiv {

/// Dense n x n matrix, row-major.
template <class T>
class Square {
 public:
  Square() = default;
  explicit Square(std::size_t n, const T& fill = T()) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  friend bool operator==(const Square&, const Square&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// No-envy

struct EnvyWitness {
  AgentIndex envious;
  AgentIndex envied;
  Rational gap;  // u_i(z_j) - u_i(z_i) > 0
};

struct EnvyCheck {
  bool envy_free = true;
  std::optional<EnvyWitness> witness;

  explicit operator bool() const { return envy_free; }
};

/// Exact no-envy test. On failure the witness is a pair with the largest utility gap
/// (first such pair in agent order).
inline EnvyCheck is_envy_free(const Economy& e, const Allocation& z) {
  validate_allocation(e, z);
  EnvyCheck out;
  for (AgentIndex i = 0; i < e.size(); ++i) {
    const Rational own = utility_of(e, z, i);
    for (AgentIndex j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      Rational gap = utility_of_bundle(e, z, i, j) - own;
      if (gap > 0 && (!out.witness || gap > out.witness->gap)) {
        out.envy_free = false;
        out.witness = EnvyWitness{i, j, std::move(gap)};
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Budget sets

/// SB (rent strictly above budget) and B (weakly above) as agent x room membership.
struct BudgetSets {
  Square<char> strict;
  Square<char> weak;

  bool in_strict(AgentIndex i, RoomIndex a) const { return strict(i, a) != 0; }
  bool in_weak(AgentIndex i, RoomIndex a) const { return weak(i, a) != 0; }

  std::size_t strict_size() const { return count(strict); }
  std::size_t weak_size() const { return count(weak); }

  std::vector<std::pair<AgentIndex, RoomIndex>> strict_pairs() const { return pairs(strict); }
  std::vector<std::pair<AgentIndex, RoomIndex>> weak_pairs() const { return pairs(weak); }

  friend bool operator==(const BudgetSets&, const BudgetSets&) = default;

 private:
  static std::size_t count(const Square<char>& m) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t a = 0; a < m.size(); ++a) c += m(i, a) != 0;
    return c;
  }
  static std::vector<std::pair<AgentIndex, RoomIndex>> pairs(const Square<char>& m) {
    std::vector<std::pair<AgentIndex, RoomIndex>> out;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t a = 0; a < m.size(); ++a)
        if (m(i, a)) out.emplace_back(i, a);
    return out;
  }
};

namespace detail {

inline BudgetSets make_budget_sets(const Economy& e, const std::vector<Rational>& rents, bool effective_only) {
  const std::size_t n = e.size();
  if (rents.size() != n) throw Error(ErrorCode::InvalidInput, "rents must cover every room");
  BudgetSets out{Square<char>(n, 0), Square<char>(n, 0)};
  for (AgentIndex i = 0; i < n; ++i) {
    const Preference& p = e.preference(i);
    if (effective_only && p.rho == 0) continue;
    for (RoomIndex a = 0; a < n; ++a) {
      out.strict(i, a) = rents[a] > p.budget;
      out.weak(i, a) = rents[a] >= p.budget;
    }
  }
  return out;
}

}  // namespace detail

/// SB^u(r) and B^u(r) over every agent, as defined.
inline BudgetSets budget_sets(const Economy& e, const std::vector<Rational>& rents) {
  return detail::make_budget_sets(e, rents, false);
}

/// Budget sets restricted to agents with rho > 0, the only agents whose utility kinks at
/// the budget. This is the form the solver constrains on.
inline BudgetSets effective_budget_sets(const Economy& e, const std::vector<Rational>& rents) {
  return detail::make_budget_sets(e, rents, true);
}

// ---------------------------------------------------------------------------
// Linearization

/// Side of r_a on which the local affine form is taken. Downward is [r_a - eps, r_a]
/// (rebates); upward is [r_a, r_a + eps] (surcharges).
enum class Direction { Downward, Upward };

/// u_i(t, a) = nu(i, a) - lambda(i, a) * t near the linearization point.
struct Linearization {
  Square<Rational> nu;
  Square<Rational> lambda;

  Rational utility(AgentIndex i, RoomIndex a, const Rational& rent) const {
    return nu(i, a) - lambda(i, a) * rent;
  }
};

inline bool above_budget_branch(const Preference& p, const Rational& rent, Direction dir) {
  if (p.rho == 0) return false;
  return dir == Direction::Downward ? rent > p.budget : rent >= p.budget;
}

inline Linearization linearize(const Economy& e, const std::vector<Rational>& rents,
                               Direction dir = Direction::Downward) {
  const std::size_t n = e.size();
  if (rents.size() != n) throw Error(ErrorCode::InvalidInput, "rents must cover every room");
  Linearization out{Square<Rational>(n), Square<Rational>(n)};
  for (AgentIndex i = 0; i < n; ++i) {
    const Preference& p = e.preference(i);
    for (RoomIndex a = 0; a < n; ++a) {
      if (above_budget_branch(p, rents[a], dir)) {
        out.lambda(i, a) = 1 + p.rho;
        out.nu(i, a) = p.values[a] + p.rho * p.budget;
      } else {
        out.lambda(i, a) = 1;
        out.nu(i, a) = p.values[a];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Envy graph and tie graph

/// Directed graph on agents: edge (i, j) iff u_i(z_i) = u_i(z_j). Self-loops included.
struct EnvyGraph {
  Square<char> edges;

  std::size_t size() const { return edges.size(); }
  bool has_edge(AgentIndex i, AgentIndex j) const { return edges(i, j) != 0; }
};

inline EnvyGraph envy_graph(const Economy& e, const Allocation& z) {
  validate_allocation(e, z);
  const std::size_t n = e.size();
  EnvyGraph g{Square<char>(n, 0)};
  for (AgentIndex i = 0; i < n; ++i) {
    const Rational own = utility_of(e, z, i);
    for (AgentIndex j = 0; j < n; ++j) g.edges(i, j) = utility_of_bundle(e, z, i, j) == own;
  }
  return g;
}

/// Bipartite agent/room graph of indifferences at an envy-free allocation, with the
/// local slopes as multiplicative weights.
struct TieGraph {
  Square<char> edges;       // (agent, room)
  Square<Rational> weight;  // lambda where edges(i, a)

  std::size_t size() const { return edges.size(); }
  bool has_edge(AgentIndex i, RoomIndex a) const { return edges(i, a) != 0; }
};

inline TieGraph tie_graph(const Economy& e, const Allocation& z, Direction dir = Direction::Downward) {
  if (!is_envy_free(e, z))
    throw Error(ErrorCode::Precondition, "tie graph requires an envy-free allocation");
  const std::size_t n = e.size();
  const Linearization lin = linearize(e, z.rents, dir);
  TieGraph g{Square<char>(n, 0), Square<Rational>(n)};
  for (AgentIndex i = 0; i < n; ++i) {
    const Rational own = utility_of(e, z, i);
    for (RoomIndex a = 0; a < n; ++a) {
      if (eval_utility(e.preference(i), z.rents[a], a) == own) {
        g.edges(i, a) = 1;
        g.weight(i, a) = lin.lambda(i, a);
      }
    }
  }
  return g;
}

/// Product of tie weights along an assignment; nullopt if it leaves the tie graph.
inline std::optional<Rational> matching_weight(const TieGraph& g, const std::vector<RoomIndex>& assignment) {
  Rational w = 1;
  for (AgentIndex i = 0; i < assignment.size(); ++i) {
    if (!g.has_edge(i, assignment[i])) return std::nullopt;
    w *= g.weight(i, assignment[i]);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Reachability

/// For every agent, a shortest path in `g` ending in `targets` (or nullopt when none).
/// With `reverse`, paths start in `targets` and end at the agent instead.
inline std::vector<std::optional<std::vector<AgentIndex>>> paths_to_set(const EnvyGraph& g,
                                                                        const std::vector<AgentIndex>& targets,
                                                                        bool reverse = false) {
  const std::size_t n = g.size();
  std::vector<std::optional<std::size_t>> next(n);
  std::vector<bool> seen(n, false);
  std::deque<AgentIndex> queue;
  for (AgentIndex t : targets) {
    seen[t] = true;
    next[t] = t;
    queue.push_back(t);
  }
  // BFS from the targets along reversed edges (forward edges when `reverse`).
  while (!queue.empty()) {
    AgentIndex v = queue.front();
    queue.pop_front();
    for (AgentIndex u = 0; u < n; ++u) {
      bool edge = reverse ? g.has_edge(v, u) : g.has_edge(u, v);
      if (edge && !seen[u]) {
        seen[u] = true;
        next[u] = v;
        queue.push_back(u);
      }
    }
  }
  std::vector<std::optional<std::vector<AgentIndex>>> out(n);
  for (AgentIndex i = 0; i < n; ++i) {
    if (!seen[i]) continue;
    std::vector<AgentIndex> path{i};
    while (*next[path.back()] != path.back()) path.push_back(*next[path.back()]);
    if (reverse) std::reverse(path.begin(), path.end());
    out[i] = std::move(path);
  }
  return out;
}

}  // namespace rentdiv
