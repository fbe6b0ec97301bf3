#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rentdiv/economy.hpp"
#include "rentdiv/graphs.hpp"

namespace rentdiv {

struct Matching {
  std::vector<RoomIndex> assignment;  // agent -> room
  Rational weight;                    // sum (additive) or product (tie matchings)
};

namespace detail {

// Group operations used by the Hungarian method. Any ordered abelian group works; the
// multiplicative group of positive rationals stands in for log-weights exactly.
struct AdditiveGroup {
  static Rational combine(const Rational& a, const Rational& b) { return a + b; }
  static Rational remove(const Rational& a, const Rational& b) { return a - b; }
  static Rational identity() { return Rational(0); }
};

struct MultiplicativeGroup {
  static Rational combine(const Rational& a, const Rational& b) { return a * b; }
  static Rational remove(const Rational& a, const Rational& b) { return a / b; }
  static Rational identity() { return Rational(1); }
};

using CostMatrix = Square<std::optional<Rational>>;  // nullopt = forbidden

struct HungarianResult {
  std::vector<RoomIndex> assignment;
  std::vector<Rational> row_potential, col_potential;
};

/// Min-cost perfect matching (Kuhn-Munkres, O(n^3)). Returns nullopt when the allowed
/// entries admit no perfect matching.
template <class Group>
std::optional<HungarianResult> hungarian(const CostMatrix& cost) {
  const std::size_t n = cost.size();
  std::vector<Rational> u(n + 1, Group::identity()), v(n + 1, Group::identity());
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<std::optional<Rational>> minv(n + 1);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::optional<Rational> delta;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const auto& c = cost(i0 - 1, j - 1);
        if (c) {
          Rational cur = Group::remove(Group::remove(*c, u[i0]), v[j]);
          if (!minv[j] || cur < *minv[j]) {
            minv[j] = std::move(cur);
            way[j] = j0;
          }
        }
        if (minv[j] && (!delta || *minv[j] < *delta)) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (!delta) return std::nullopt;
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] = Group::combine(u[p[j]], *delta);
          v[j] = Group::remove(v[j], *delta);
        } else if (minv[j]) {
          minv[j] = Group::remove(*minv[j], *delta);
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult out;
  out.assignment.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.assignment[p[j] - 1] = j - 1;
  out.row_potential.assign(u.begin() + 1, u.end());
  out.col_potential.assign(v.begin() + 1, v.end());
  return out;
}

inline bool kuhn_augment(std::size_t row, const Square<char>& allowed, const std::vector<bool>& row_fixed,
                         const std::vector<bool>& col_fixed, std::vector<long>& col_owner,
                         std::vector<bool>& visited) {
  for (std::size_t c = 0; c < allowed.size(); ++c) {
    if (col_fixed[c] || !allowed(row, c) || visited[c]) continue;
    visited[c] = true;
    if (col_owner[c] < 0 ||
        kuhn_augment(static_cast<std::size_t>(col_owner[c]), allowed, row_fixed, col_fixed, col_owner, visited)) {
      col_owner[c] = static_cast<long>(row);
      return true;
    }
  }
  return false;
}

inline bool has_perfect_matching(const Square<char>& allowed, const std::vector<bool>& row_fixed,
                                 const std::vector<bool>& col_fixed) {
  const std::size_t n = allowed.size();
  std::vector<long> owner(n, -1);
  for (std::size_t r = 0; r < n; ++r) {
    if (row_fixed[r]) continue;
    std::vector<bool> visited(n, false);
    if (!kuhn_augment(r, allowed, row_fixed, col_fixed, owner, visited)) return false;
  }
  return true;
}

/// Lexicographically smallest perfect matching (agent order) inside `allowed`.
inline std::vector<RoomIndex> lexicographic_perfect_matching(const Square<char>& allowed) {
  const std::size_t n = allowed.size();
  std::vector<bool> row_fixed(n, false), col_fixed(n, false);
  std::vector<RoomIndex> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    row_fixed[r] = true;
    bool placed = false;
    for (std::size_t c = 0; c < n && !placed; ++c) {
      if (col_fixed[c] || !allowed(r, c)) continue;
      col_fixed[c] = true;
      if (has_perfect_matching(allowed, row_fixed, col_fixed)) {
        out[r] = c;
        placed = true;
      } else {
        col_fixed[c] = false;
      }
    }
    if (!placed) throw Error(ErrorCode::InternalInvariant, "tight graph lost its perfect matching");
  }
  return out;
}

/// Optimal assignment with the lexicographic tie-break. Every optimum uses only edges that
/// are tight for the dual potentials, so the smallest optimum is the smallest perfect
/// matching of the tight subgraph.
template <class Group>
std::optional<std::vector<RoomIndex>> lexicographic_optimum(const CostMatrix& cost) {
  auto result = hungarian<Group>(cost);
  if (!result) return std::nullopt;
  const std::size_t n = cost.size();
  Square<char> tight(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cost(i, j))
        tight(i, j) = Group::combine(result->row_potential[i], result->col_potential[j]) == *cost(i, j);
  return lexicographic_perfect_matching(tight);
}

}  // namespace detail

/// Assignment maximizing the sum of values; ties go to the lexicographically smallest
/// assignment vector in agent order.
inline Matching max_sum_assignment(const Square<Rational>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::InvalidInput, "empty value matrix");
  detail::CostMatrix cost(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) cost(i, a) = -values(i, a);
  auto best = detail::lexicographic_optimum<detail::AdditiveGroup>(cost);
  Matching out{std::move(*best), Rational(0)};
  for (std::size_t i = 0; i < n; ++i) out.weight += values(i, out.assignment[i]);
  return out;
}

inline Matching max_sum_assignment(const std::vector<std::vector<Rational>>& values) {
  const std::size_t n = values.size();
  Square<Rational> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i].size() != n) throw Error(ErrorCode::InvalidInput, "value matrix must be square");
    for (std::size_t a = 0; a < n; ++a) m(i, a) = values[i][a];
  }
  return max_sum_assignment(m);
}

/// Perfect matching inside the tie graph with the largest product of weights (Downward),
/// or the smallest product (Upward, used when rents are raised instead of rebated).
inline Matching best_tie_matching(const TieGraph& g, Direction dir) {
  const std::size_t n = g.size();
  detail::CostMatrix cost(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a)
      if (g.has_edge(i, a)) {
        if (g.weight(i, a) <= 0) throw Error(ErrorCode::InvalidInput, "tie weights must be positive");
        cost(i, a) = dir == Direction::Downward ? Rational(1 / g.weight(i, a)) : g.weight(i, a);
      }
  auto best = detail::lexicographic_optimum<detail::MultiplicativeGroup>(cost);
  if (!best)
    throw Error(ErrorCode::Precondition, "tie graph has no perfect matching (allocation not envy-free?)");
  Rational w = *matching_weight(g, *best);
  return Matching{std::move(*best), std::move(w)};
}

inline Matching max_tie_matching(const TieGraph& g) { return best_tie_matching(g, Direction::Downward); }

}  // namespace rentdiv
