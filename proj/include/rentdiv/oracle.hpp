#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rentdiv/assignment.hpp"
#include "rentdiv/economy.hpp"
#include "rentdiv/graphs.hpp"
#include "rentdiv/lp.hpp"
#include "rentdiv/selection.hpp"

namespace rentdiv {

// ---------------------------------------------------------------------------
// Brute force over assignments and budget regimes

/// offset + scale * x, where x is the holder's utility for its own room or a room's rent.
struct OracleTerm {
  enum class Kind { OwnUtility, Rent };
  Kind kind = Kind::Rent;
  std::size_t index = 0;  // agent for OwnUtility, room for Rent
  Rational scale = 1;
  Rational offset = 0;

  static OracleTerm own_utility(AgentIndex i, Rational scale = 1, Rational offset = 0) {
    return {Kind::OwnUtility, i, std::move(scale), std::move(offset)};
  }
  static OracleTerm rent(RoomIndex a, Rational scale = 1, Rational offset = 0) {
    return {Kind::Rent, a, std::move(scale), std::move(offset)};
  }
};

/// Maximize the minimum of `objective` over envy-free allocations with the given total,
/// subject to every `hard` term being non-negative.
struct OracleQuery {
  Rational total;
  std::vector<OracleTerm> objective;
  std::vector<OracleTerm> hard;
  std::optional<std::vector<std::vector<RoomIndex>>> assignments;  // default: all n!
  /// Solve every assignment to optimality. When false, assignments that provably cannot beat
  /// the best value found so far are skipped and reported as dominated.
  bool exact_table = true;
};

struct AssignmentRow {
  std::vector<RoomIndex> assignment;
  bool feasible = false;
  bool dominated = false;  // skipped: cannot exceed the optimum (feasibility unknown)
  Rational value;
  std::vector<Rational> rents;
};

struct OracleResult {
  bool feasible = false;
  Allocation optimum;
  Rational value;
  std::vector<AssignmentRow> table;
  std::size_t programs_solved = 0;
};

inline constexpr std::size_t kOracleMaxAgents = 6;

namespace detail {

/// Rent intervals between consecutive distinct budgets of agents whose utility kinks.
struct Regimes {
  std::vector<Rational> breaks;

  explicit Regimes(const Economy& e) {
    for (const Preference& p : e.preferences())
      if (p.rho > 0) breaks.push_back(p.budget);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  }

  std::size_t count() const { return breaks.size() + 1; }
  std::optional<Rational> lo(std::size_t k) const { return k == 0 ? std::nullopt : std::optional(breaks[k - 1]); }
  std::optional<Rational> hi(std::size_t k) const {
    return k == breaks.size() ? std::nullopt : std::optional(breaks[k]);
  }
  std::size_t containing(const Rational& x) const {
    std::size_t k = 0;
    while (k < breaks.size() && x > breaks[k]) ++k;
    return k;
  }
};

/// nu - lambda * rent.
struct Piece {
  Rational nu, lambda;
};

inline std::vector<Piece> all_pieces(const Preference& p, RoomIndex a) {
  std::vector<Piece> out{{p.values[a], Rational(1)}};
  if (p.rho > 0) out.push_back({p.values[a] + p.rho * p.budget, 1 + p.rho});
  return out;
}

inline Piece regime_piece(const Preference& p, RoomIndex a, const Regimes& reg, std::size_t k) {
  if (p.rho > 0) {
    auto lo = reg.lo(k);
    if (lo && *lo >= p.budget) return {p.values[a] + p.rho * p.budget, 1 + p.rho};
  }
  return {p.values[a], Rational(1)};
}

class AssignmentSearch {
 public:
  AssignmentSearch(const Economy& e, const OracleQuery& q, const std::vector<RoomIndex>& sigma, const Regimes& reg,
                   std::optional<Rational> cutoff = std::nullopt)
      : e_(e), q_(q), sigma_(sigma), reg_(reg), regime_(e.size()), cutoff_(std::move(cutoff)) {}

  void run() { dfs(0); }

  bool found() const { return best_.has_value(); }
  const Rational& value() const { return *best_; }
  const std::vector<Rational>& rents() const { return best_rents_; }
  std::size_t programs() const { return programs_; }

 private:
  // Adds the constraint `lhs_R * R <= offset + scale * x` for a term, or drops it when it
  // is not representable without knowing an unassigned regime. Returns false if dropped.
  void add_term(LinearProgram& lp, const std::vector<VarId>& r, std::optional<VarId> R, const OracleTerm& t,
                const std::string& label) {
    auto emit = [&](const Rational& constant, const Rational& coef, RoomIndex room) {
      // R <= constant + coef * r_room   (or 0 <= ...)
      LinearExpr lhs;
      if (R) lhs.push_back({*R, Rational(1)});
      if (coef != 0) lhs.push_back({r[room], Rational(-coef)});
      lp.add_constraint(std::move(lhs), Relation::LessEq, constant, label);
    };
    if (t.kind == OracleTerm::Kind::Rent) {
      emit(t.offset, t.scale, t.index);
      return;
    }
    const AgentIndex i = t.index;
    const RoomIndex own = sigma_[i];
    const Preference& p = e_.preference(i);
    if (t.scale >= 0) {
      for (const Piece& pc : all_pieces(p, own)) emit(t.offset + t.scale * pc.nu, -t.scale * pc.lambda, own);
    } else if (regime_[own]) {
      const Piece pc = regime_piece(p, own, reg_, *regime_[own]);
      emit(t.offset + t.scale * pc.nu, -t.scale * pc.lambda, own);
    }
  }

  LpSolution relax(bool& leaf) {
    const std::size_t n = e_.size();
    LinearProgram lp;
    std::vector<VarId> r;
    for (RoomIndex a = 0; a < n; ++a) r.push_back(lp.add_variable("r" + std::to_string(a)));
    const VarId R = lp.add_variable("R");
    LinearExpr sum;
    for (VarId v : r) sum.push_back({v, Rational(1)});
    lp.add_constraint(sum, Relation::Equal, q_.total, "total");
    leaf = true;
    for (RoomIndex a = 0; a < n; ++a) {
      if (!regime_[a]) {
        leaf = false;
        continue;
      }
      if (auto lo = reg_.lo(*regime_[a])) lp.add_constraint({{r[a], Rational(1)}}, Relation::GreaterEq, *lo, "lo");
      if (auto hi = reg_.hi(*regime_[a])) lp.add_constraint({{r[a], Rational(1)}}, Relation::LessEq, *hi, "hi");
    }
    if (q_.objective.empty()) lp.add_constraint({{R, Rational(1)}}, Relation::LessEq, Rational(0), "flat");
    for (const OracleTerm& t : q_.objective) add_term(lp, r, R, t, "obj");
    for (const OracleTerm& t : q_.hard) add_term(lp, r, std::nullopt, t, "hard");
    for (AgentIndex i = 0; i < n; ++i) {
      const Preference& p = e_.preference(i);
      const RoomIndex own = sigma_[i];
      for (RoomIndex c = 0; c < n; ++c) {
        if (c == own || !regime_[c]) continue;
        const Piece other = regime_piece(p, c, reg_, *regime_[c]);
        // every piece of the (concave) own utility must dominate the other room's piece
        for (const Piece& mine : all_pieces(p, own))
          lp.add_constraint({{r[own], mine.lambda}, {r[c], Rational(-other.lambda)}}, Relation::LessEq,
                            mine.nu - other.nu, "ef");
      }
    }
    lp.set_objective(Sense::Maximize, {{R, Rational(1)}});
    ++programs_;
    LpSolution s = solve_lp(lp);
    if (s.optimal()) s.point.pop_back();  // drop R, keep rents
    return s;
  }

  void dfs(std::size_t depth) {
    bool leaf = false;
    LpSolution s = relax(leaf);
    if (s.status == LpStatus::Infeasible) return;
    if (s.optimal() && best_ && s.value <= *best_) return;
    if (s.optimal() && cutoff_ && s.value <= *cutoff_) return;
    if (leaf) {
      if (!s.optimal()) throw Error(ErrorCode::InternalInvariant, "oracle leaf program unbounded");
      best_ = s.value;
      best_rents_ = s.point;
      return;
    }
    // Skip rooms whose regime is forced, then branch on the next one, trying the regime that
    // holds the relaxed optimum first.
    std::size_t a = depth;
    const std::size_t n = e_.size();
    while (a < n && reg_.count() == 1) {
      regime_[a] = 0;
      ++a;
    }
    if (a == n) {
      dfs(n);
      for (std::size_t b = depth; b < n; ++b) regime_[b].reset();
      return;
    }
    std::vector<std::size_t> order;
    if (s.optimal()) order.push_back(reg_.containing(s.point[a]));
    for (std::size_t k = 0; k < reg_.count(); ++k)
      if (order.empty() || k != order.front()) order.push_back(k);
    for (std::size_t k : order) {
      regime_[a] = k;
      dfs(a + 1);
    }
    for (std::size_t b = depth; b <= a; ++b) regime_[b].reset();
  }

  const Economy& e_;
  const OracleQuery& q_;
  const std::vector<RoomIndex>& sigma_;
  const Regimes& reg_;
  std::vector<std::optional<std::size_t>> regime_;
  std::optional<Rational> cutoff_;
  std::optional<Rational> best_;
  std::vector<Rational> best_rents_;
  std::size_t programs_ = 0;
};

inline std::vector<std::vector<RoomIndex>> all_assignments(std::size_t n) {
  std::vector<RoomIndex> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::vector<std::vector<RoomIndex>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace detail

/// Exhaustive optimum over every assignment (or the given ones) and every combination of
/// budget regimes, by branch and bound. Ties go to the first assignment in lexicographic order.
inline OracleResult brute_force(const Economy& e, const OracleQuery& q) {
  if (e.size() > kOracleMaxAgents)
    throw Error(ErrorCode::InvalidInput, "oracle limited to " + std::to_string(kOracleMaxAgents) + " agents");
  const detail::Regimes reg(e);
  const auto assignments = q.assignments ? *q.assignments : detail::all_assignments(e.size());
  for (const auto& sigma : assignments) validate_allocation(e, Allocation{sigma, std::vector<Rational>(e.size())});

  // Visit assignments with a large total value first; they tend to carry the optimum, which
  // lets the pruned mode skip most of the others.
  std::vector<std::size_t> order(assignments.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  if (!q.exact_table) {
    std::vector<Rational> weight(assignments.size());
    for (std::size_t k = 0; k < assignments.size(); ++k)
      for (AgentIndex i = 0; i < e.size(); ++i) weight[k] += e.value(i, assignments[k][i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return weight[x] > weight[y]; });
  }

  OracleResult out;
  out.table.resize(assignments.size());
  std::optional<std::size_t> best_index;
  for (std::size_t k : order) {
    const auto& sigma = assignments[k];
    std::optional<Rational> cutoff;
    if (!q.exact_table && out.feasible) cutoff = out.value;
    detail::AssignmentSearch search(e, q, sigma, reg, cutoff);
    search.run();
    out.programs_solved += search.programs();
    AssignmentRow row{sigma, search.found(), false, Rational(0), {}};
    if (row.feasible) {
      row.value = search.value();
      row.rents = search.rents();
      // ties go to the lexicographically first assignment
      if (!out.feasible || row.value > out.value || (row.value == out.value && k < *best_index)) {
        out.feasible = true;
        out.value = row.value;
        out.optimum = Allocation{sigma, row.rents};
        best_index = k;
      }
    } else if (cutoff) {
      row.dominated = true;
    }
    out.table[k] = std::move(row);
  }
  return out;
}

/// The terms of a selection criterion in oracle form.
inline std::vector<OracleTerm> objective_oracle_terms(const Economy& e, const Objective& obj) {
  std::vector<OracleTerm> out;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (obj.rent_based()) {
      const RentTransform tr = obj.transform_of(k);
      out.push_back(OracleTerm::rent(k, obj.sign() * tr.beta, obj.sign() * tr.alpha));
    } else {
      out.push_back(OracleTerm::own_utility(k, obj.sign()));
    }
  }
  return out;
}

/// Optimum of a selection criterion at the economy's total rent. `value` is in natural
/// orientation (a min for maxmin kinds, a max for minmax kinds).
inline OracleResult brute_force_selection(const Economy& e, const Objective& obj, bool exact_table = false) {
  obj.validate(e);
  OracleResult r = brute_force(e, OracleQuery{e.total_rent(), objective_oracle_terms(e, obj), {}, std::nullopt, exact_table});
  if (!r.feasible) throw Error(ErrorCode::InternalInvariant, "no envy-free allocation found");
  if (!obj.maxmin()) {
    r.value = -r.value;
    for (AssignmentRow& row : r.table)
      if (row.feasible) row.value = -row.value;
  }
  return r;
}

inline OracleResult brute_force_maxmin(const Economy& e, bool exact_table = false) {
  return brute_force_selection(e, Objective::of(ObjectiveKind::MaxminUtility), exact_table);
}

/// Largest rent of room `a` over envy-free allocations at total `total`.
inline Rational max_room_rent(const Economy& e, RoomIndex a, const Rational& total) {
  OracleResult r = brute_force(e, OracleQuery{total, {OracleTerm::rent(a)}, {}, std::nullopt, false});
  if (!r.feasible) throw Error(ErrorCode::InternalInvariant, "no envy-free allocation found");
  return r.value;
}

/// Sup-norm distance from a rent vector to the rents of envy-free allocations at `total`.
inline Rational distance_to_envy_free(const Economy& e, const std::vector<Rational>& rents, const Rational& total) {
  OracleQuery q{total, {}, {}, std::nullopt, false};
  for (RoomIndex a = 0; a < e.size(); ++a) {
    q.objective.push_back(OracleTerm::rent(a, Rational(-1), rents[a]));
    q.objective.push_back(OracleTerm::rent(a, Rational(1), Rational(-rents[a])));
  }
  OracleResult r = brute_force(e, q);
  if (!r.feasible) throw Error(ErrorCode::InternalInvariant, "no envy-free allocation found");
  return -r.value;
}

// ---------------------------------------------------------------------------
// Vertex enumeration (small dimension)

namespace detail {

/// Solves the square system M x = y exactly; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> M, std::vector<Rational> y) {
  const std::size_t d = y.size();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    while (piv < d && M[piv][c] == 0) ++piv;
    if (piv == d) return std::nullopt;
    std::swap(M[piv], M[c]);
    std::swap(y[piv], y[c]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c || M[r][c] == 0) continue;
      const Rational f = M[r][c] / M[c][c];
      for (std::size_t k = c; k < d; ++k) M[r][k] -= f * M[c][k];
      y[r] -= f * y[c];
    }
  }
  for (std::size_t c = 0; c < d; ++c) y[c] /= M[c][c];
  return y;
}

}  // namespace detail

/// Every vertex of the polyhedron described by the program's constraints (objective ignored),
/// by solving each square subsystem of tight constraints. Exponential; meant for a handful of
/// variables.
inline std::vector<std::vector<Rational>> enumerate_vertices(const LinearProgram& lp) {
  lp.validate();
  const std::size_t d = lp.variables().size();
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  for (const Constraint& c : lp.constraints()) {
    std::vector<Rational> row(d);
    for (const Term& t : c.lhs) row[t.var] += t.coef;
    rows.push_back(std::move(row));
    rhs.push_back(c.rhs);
  }
  std::vector<std::vector<Rational>> out;
  if (d == 0) return out;
  const std::size_t m = rows.size();
  if (m < d) return out;
  std::vector<std::size_t> pick(d);
  for (std::size_t k = 0; k < d; ++k) pick[k] = k;
  for (;;) {
    std::vector<std::vector<Rational>> M;
    std::vector<Rational> y;
    for (std::size_t k : pick) {
      M.push_back(rows[k]);
      y.push_back(rhs[k]);
    }
    if (auto x = detail::solve_square(M, y)) {
      bool ok = std::all_of(lp.constraints().begin(), lp.constraints().end(),
                            [&](const Constraint& c) { return satisfied(c, *x); });
      if (ok && std::find(out.begin(), out.end(), *x) == out.end()) out.push_back(std::move(*x));
    }
    // next combination
    std::size_t k = d;
    while (k > 0 && pick[k - 1] == m - d + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t j = k; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

/// Optimum of a bounded program by vertex enumeration; nullopt when no vertex exists.
inline std::optional<Rational> vertex_optimum(const LinearProgram& lp) {
  std::optional<Rational> best;
  for (const auto& x : enumerate_vertices(lp)) {
    Rational v = evaluate(lp.objective(), x);
    if (!best || (lp.sense() == Sense::Maximize ? v > *best : v < *best)) best = v;
  }
  return best;
}

/// Vertices (and the midpoint of every pair of vertices) of the envy-free set at `total`,
/// one polytope per assignment and budget-regime combination. For n <= 3.
inline std::vector<Allocation> sample_envy_free(const Economy& e, const Rational& total) {
  const std::size_t n = e.size();
  if (n > 3) throw Error(ErrorCode::InvalidInput, "envy-free sampling limited to 3 agents");
  const detail::Regimes reg(e);
  std::vector<Allocation> out;
  std::vector<std::size_t> combo(n, 0);
  for (const auto& sigma : detail::all_assignments(n)) {
    std::fill(combo.begin(), combo.end(), 0);
    for (;;) {
      LinearProgram lp;
      std::vector<VarId> r;
      for (RoomIndex a = 0; a < n; ++a) r.push_back(lp.add_variable("r" + std::to_string(a)));
      LinearExpr sum;
      for (VarId v : r) sum.push_back({v, Rational(1)});
      lp.add_constraint(sum, Relation::Equal, total);
      for (RoomIndex a = 0; a < n; ++a) {
        if (auto lo = reg.lo(combo[a])) lp.add_constraint({{r[a], Rational(1)}}, Relation::GreaterEq, *lo);
        if (auto hi = reg.hi(combo[a])) lp.add_constraint({{r[a], Rational(1)}}, Relation::LessEq, *hi);
      }
      for (AgentIndex i = 0; i < n; ++i) {
        const Preference& p = e.preference(i);
        const detail::Piece own = detail::regime_piece(p, sigma[i], reg, combo[sigma[i]]);
        for (RoomIndex c = 0; c < n; ++c) {
          if (c == sigma[i]) continue;
          const detail::Piece other = detail::regime_piece(p, c, reg, combo[c]);
          lp.add_constraint({{r[sigma[i]], own.lambda}, {r[c], Rational(-other.lambda)}}, Relation::LessEq,
                            own.nu - other.nu);
        }
      }
      std::vector<std::vector<Rational>> verts = enumerate_vertices(lp);
      for (std::size_t x = 0; x < verts.size(); ++x) {
        out.push_back(Allocation{sigma, verts[x]});
        for (std::size_t y = x + 1; y < verts.size(); ++y) {
          std::vector<Rational> mid(n);
          for (RoomIndex a = 0; a < n; ++a) mid[a] = (verts[x][a] + verts[y][a]) / 2;
          out.push_back(Allocation{sigma, mid});
        }
      }
      std::size_t k = 0;
      while (k < n && ++combo[k] == reg.count()) combo[k++] = 0;
      if (k == n) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Property checkers

struct PerturbationCase {
  Rational delta;
  bool ok = false;
  std::optional<Allocation> perturbed;
  Rational slack;  // smallest rent drop / utility gain achieved
  std::string note;
};

struct PerturbationReport {
  bool ok = true;
  std::vector<RoomIndex> matching;
  std::vector<PerturbationCase> cases;
};

/// For each delta, looks for a maxmin allocation at total m - delta with the max-weight tie
/// matching of z, whose rents are all strictly lower and utilities all strictly higher.
inline PerturbationReport check_h_maxmin_perturbation(const Economy& e, const Allocation& z,
                                                      const std::vector<Rational>& deltas) {
  if (!is_maxmin(e, z).holds) throw Error(ErrorCode::Precondition, "allocation is not maxmin");
  PerturbationReport rep;
  rep.matching = max_tie_matching(tie_graph(e, z)).assignment;
  const std::vector<Rational> u0 = utility_profile(e, z);
  for (const Rational& delta : deltas) {
    PerturbationCase c;
    c.delta = delta;
    const Rational total = z.total() - delta;
    if (delta == 0) {
      c.ok = true;
      c.perturbed = z;
      rep.cases.push_back(std::move(c));
      continue;
    }
    const Economy at = e.with_total_rent(total);
    OracleResult restricted = brute_force(
        at, OracleQuery{total, objective_oracle_terms(at, Objective::of(ObjectiveKind::MaxminUtility)), {},
                        std::vector<std::vector<RoomIndex>>{rep.matching}});
    OracleResult global = brute_force_maxmin(at);
    if (!restricted.feasible || restricted.value != global.value) {
      c.note = "tie matching does not reach the maxmin value at the lower total";
      rep.ok = false;
      rep.cases.push_back(std::move(c));
      continue;
    }
    OracleQuery q{total, {}, {}, std::vector<std::vector<RoomIndex>>{rep.matching}};
    for (AgentIndex i = 0; i < e.size(); ++i) {
      q.hard.push_back(OracleTerm::own_utility(i, Rational(1), Rational(-global.value)));
      q.objective.push_back(OracleTerm::own_utility(i, Rational(1), Rational(-u0[i])));
    }
    for (RoomIndex a = 0; a < e.size(); ++a) q.objective.push_back(OracleTerm::rent(a, Rational(-1), z.rents[a]));
    OracleResult best = brute_force(at, q);
    if (!best.feasible) {
      c.note = "no allocation at the lower total keeps the maxmin value";
      rep.ok = false;
      rep.cases.push_back(std::move(c));
      continue;
    }
    c.slack = best.value;
    c.perturbed = best.optimum;
    c.ok = best.value > 0 && is_maxmin(at, best.optimum).holds;
    if (!c.ok) c.note = best.value > 0 ? "perturbed allocation not certified" : "no strict improvement";
    rep.ok = rep.ok && c.ok;
    rep.cases.push_back(std::move(c));
  }
  return rep;
}

struct ConverseCheck {
  bool sigma_max_weight = false;
  Rational sigma_weight;
  Rational best_weight;
};

/// Given z at total m and z2 at a lower total with the same assignment, componentwise lower
/// rents and the same weak budget sets, reports whether the shared assignment is a max-weight
/// matching of the tie graph at z. Throws Precondition when the hypotheses fail.
inline ConverseCheck check_converse_perturbation(const Economy& e, const Allocation& z, const Allocation& z2) {
  validate_allocation(e, z);
  validate_allocation(e, z2);
  if (z.assignment != z2.assignment) throw Error(ErrorCode::Precondition, "allocations use different assignments");
  if (!is_envy_free(e, z) || !is_envy_free(e, z2))
    throw Error(ErrorCode::Precondition, "both allocations must be envy-free");
  for (RoomIndex a = 0; a < e.size(); ++a)
    if (!(z2.rents[a] < z.rents[a])) throw Error(ErrorCode::Precondition, "rents must all be strictly lower");
  if (!(budget_sets(e, z.rents).weak == budget_sets(e, z2.rents).weak))
    throw Error(ErrorCode::Precondition, "weak budget sets differ");
  const TieGraph g = tie_graph(e, z);
  ConverseCheck out;
  out.sigma_weight = *matching_weight(g, z.assignment);
  out.best_weight = max_tie_matching(g).weight;
  out.sigma_max_weight = out.sigma_weight == out.best_weight;
  return out;
}

/// 1 / (n (1 + rho_bar)^(n*n)).
inline Rational theta(const Economy& e) {
  const std::size_t n = e.size();
  Rational base = 1 + e.rho_bar();
  Rational p = 1;
  for (std::size_t k = 0; k < n * n; ++k) p *= base;
  return 1 / (Rational(static_cast<long>(n)) * p);
}

struct ThetaCheck {
  bool holds = false;
  Rational low, high, gain, required;
};

/// Largest rent of room `a` at totals l and l + eps; the increase must be at least theta * eps.
inline ThetaCheck check_theta_bound(const Economy& e, RoomIndex a, const Rational& l, const Rational& eps) {
  if (e.size() > 4) throw Error(ErrorCode::InvalidInput, "theta check limited to 4 agents");
  if (a >= e.size()) throw Error(ErrorCode::UnknownId, "unknown room index", std::to_string(a));
  if (eps <= 0) throw Error(ErrorCode::InvalidInput, "eps must be positive");
  ThetaCheck out;
  out.low = max_room_rent(e, a, l);
  out.high = max_room_rent(e, a, l + eps);
  out.gain = out.high - out.low;
  out.required = theta(e) * eps;
  out.holds = out.gain >= out.required;
  return out;
}

// ---------------------------------------------------------------------------
// Random economies

struct GeneratorConfig {
  std::size_t min_agents = 2;
  std::size_t max_agents = 5;
  std::size_t max_menu = 3;
  std::int64_t value_max = 100;
  std::int64_t budget_max = 100;
  std::int64_t rent_min = -50;
  std::int64_t rent_max = 300;
};

/// Integer values and budgets, rho from a random menu drawn from {0, 1/2, 1, 2, 3} (menu always
/// contains 0), integer total rent. Deterministic in the seed.
inline Economy random_economy(std::uint64_t seed, const GeneratorConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  const std::size_t n = static_cast<std::size_t>(uniform(static_cast<std::int64_t>(cfg.min_agents),
                                                          static_cast<std::int64_t>(cfg.max_agents)));
  const std::vector<Rational> pool{make_rational(1, 2), make_rational(1), make_rational(2), make_rational(3)};
  const std::size_t k = static_cast<std::size_t>(uniform(1, static_cast<std::int64_t>(cfg.max_menu)));
  std::vector<Rational> menu{Rational(0)};
  while (menu.size() < k) {
    Rational pick = pool[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(pool.size()) - 1))];
    if (std::find(menu.begin(), menu.end(), pick) == menu.end()) menu.push_back(pick);
  }
  Rational bar = *std::max_element(menu.begin(), menu.end());
  std::vector<std::string> agents, rooms;
  std::vector<Preference> prefs;
  for (std::size_t i = 0; i < n; ++i) {
    agents.push_back("i" + std::to_string(i + 1));
    rooms.push_back("a" + std::to_string(i + 1));
    Preference p;
    for (std::size_t a = 0; a < n; ++a) p.values.push_back(Rational(uniform(0, cfg.value_max)));
    p.budget = Rational(uniform(0, cfg.budget_max));
    p.rho = menu[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(menu.size()) - 1))];
    prefs.push_back(std::move(p));
  }
  return Economy(agents, rooms, prefs, Rational(uniform(cfg.rent_min, cfg.rent_max)), menu, bar);
}

}  // namespace rentdiv
