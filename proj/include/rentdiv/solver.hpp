#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rentdiv/assignment.hpp"
#include "rentdiv/economy.hpp"
#include "rentdiv/graphs.hpp"
#include "rentdiv/lp.hpp"
#include "rentdiv/selection.hpp"

namespace rentdiv {

enum class StepBranch { Accepted, Corrected };

inline const char* branch_name(StepBranch b) { return b == StepBranch::Accepted ? "accepted" : "corrected"; }

/// One pass of the main loop.
struct TraceStep {
  std::size_t s = 0;
  std::vector<RoomIndex> assignment;   // sigma^s
  Rational matching_weight;            // weight of sigma^s in the tie graph at r^{s-1}
  std::vector<Rational> lp_point;      // t^s
  Rational lp_value;                   // R^s
  StepBranch branch = StepBranch::Accepted;
  std::vector<Rational> rents;         // r^s
  std::size_t budget_pairs_before = 0; // |SB(r^{s-1})|, rho > 0 agents
  std::size_t budget_pairs_after = 0;  // |SB(r^s)|
};

struct SolveTrace {
  Objective objective;
  Rational start_total;  // M (or the low starting total for ascending objectives)
  Allocation start;
  Rational start_value;  // LP value at the start
  std::vector<TraceStep> steps;
};

struct SolveResult {
  Allocation allocation;
  SolveTrace trace;
  SelectionCertificate certificate;
};

namespace detail {

struct Frame {
  LinearProgram lp;
  std::vector<VarId> t;
  std::optional<VarId> R;
};

inline Frame make_frame(const Economy& e, bool with_R) {
  Frame f;
  for (RoomIndex a = 0; a < e.size(); ++a) f.t.push_back(f.lp.add_variable("t_" + e.rooms()[a]));
  if (with_R) f.R = f.lp.add_variable("R");
  return f;
}

inline LinearExpr total_expr(const Frame& f, const Rational& coef = Rational(1)) {
  LinearExpr out;
  for (VarId v : f.t) out.push_back({v, coef});
  return out;
}

/// g_k(t) as constant + coef * t_room under the local affine form of utility.
struct AffineTerm {
  Rational constant;
  Rational coef;
  RoomIndex room;
};

inline std::vector<AffineTerm> linear_terms(const Economy& e, const Objective& obj, const Linearization& lin,
                                            const std::vector<RoomIndex>& sigma) {
  std::vector<AffineTerm> out;
  const Rational s = obj.sign();
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (obj.rent_based()) {
      const RentTransform tr = obj.transform_of(k);
      out.push_back({s * tr.alpha, s * tr.beta, k});
    } else {
      const RoomIndex a = sigma[k];
      out.push_back({s * lin.nu(k, a), -s * lin.lambda(k, a), a});
    }
  }
  return out;
}

/// R <= g_k(t) for every k (or g_k(t) >= floor when R is not a variable).
inline void add_floor(Frame& f, const std::vector<AffineTerm>& terms, const std::optional<Rational>& floor,
                      const std::string& tag) {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const AffineTerm& g = terms[k];
    if (floor) {
      f.lp.add_constraint({{f.t[g.room], g.coef}}, Relation::GreaterEq, *floor - g.constant,
                          tag + "_" + std::to_string(k));
    } else {
      f.lp.add_constraint({{*f.R, Rational(1)}, {f.t[g.room], Rational(-g.coef)}}, Relation::LessEq, g.constant,
                          tag + "_" + std::to_string(k));
    }
  }
}

inline void add_no_envy(Frame& f, const Economy& e, const Linearization& lin, const std::vector<RoomIndex>& sigma) {
  for (AgentIndex i = 0; i < e.size(); ++i) {
    const RoomIndex own = sigma[i];
    for (RoomIndex a = 0; a < e.size(); ++a) {
      if (a == own) continue;
      // nu_own - lambda_own t_own >= nu_a - lambda_a t_a
      f.lp.add_constraint({{f.t[own], lin.lambda(i, own)}, {f.t[a], Rational(-lin.lambda(i, a))}}, Relation::LessEq,
                          lin.nu(i, own) - lin.nu(i, a),
                          "ef_" + e.agents()[i] + "_" + e.rooms()[a]);
    }
  }
}

inline std::vector<Rational> extract(const LpSolution& s, const Frame& f) {
  std::vector<Rational> out;
  for (VarId v : f.t) out.push_back(s[v]);
  return out;
}

inline LpSolution solve_or_throw(const LinearProgram& lp, const char* what) {
  LpSolution s = solve_lp(lp);
  if (!s.optimal())
    throw Error(ErrorCode::InternalInvariant, std::string(what) + " is " + status_name(s.status), to_lp_format(lp));
  return s;
}

/// Solve max R, then among the optima push the total toward `total_sense`.
inline std::pair<std::vector<Rational>, Rational> solve_lexicographic(Frame f, Sense total_sense, const char* what) {
  f.lp.set_objective(Sense::Maximize, {{*f.R, Rational(1)}});
  LpSolution first = solve_or_throw(f.lp, what);
  const Rational best = first.value;
  f.lp.add_constraint({{*f.R, Rational(1)}}, Relation::GreaterEq, best, "R_opt");
  f.lp.set_objective(total_sense, total_expr(f));
  LpSolution second = solve_or_throw(f.lp, what);
  return {extract(second, f), best};
}

/// Affine form that is exact on every envy-free allocation at the starting total: above
/// every budget (descending start) or quasi-linear in v (ascending start).
inline Linearization start_form(const Economy& e, Direction dir) {
  const std::size_t n = e.size();
  Linearization lin{Square<Rational>(n), Square<Rational>(n)};
  for (AgentIndex i = 0; i < n; ++i) {
    const Preference& p = e.preference(i);
    for (RoomIndex a = 0; a < n; ++a) {
      if (dir == Direction::Downward) {
        lin.lambda(i, a) = 1 + p.rho;
        lin.nu(i, a) = p.values[a] + p.rho * p.budget;
      } else {
        lin.lambda(i, a) = 1;
        lin.nu(i, a) = p.values[a];
      }
    }
  }
  return lin;
}

/// Maximum over agents of max_{a,b} (w_ib - w_ia).
inline Rational max_spread(const Square<Rational>& w) {
  Rational best = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t a = 0; a < w.size(); ++a)
      for (std::size_t b = 0; b < w.size(); ++b)
        if (w(i, b) - w(i, a) > best) best = w(i, b) - w(i, a);
  return best;
}

struct Start {
  Rational total;
  Allocation allocation;
  Rational value;
};

inline Start initialize(const Economy& e, const Objective& obj) {
  const std::size_t n = e.size();
  const Direction dir = obj.direction();
  Square<Rational> V(n);
  for (AgentIndex i = 0; i < n; ++i) {
    const Preference& p = e.preference(i);
    for (RoomIndex a = 0; a < n; ++a)
      V(i, a) = dir == Direction::Downward ? Rational((p.values[a] + p.rho * p.budget) / (1 + p.rho)) : p.values[a];
  }
  Rational total = e.total_rent();
  if (dir == Direction::Downward) {
    Rational max_budget = 0;
    for (const Preference& p : e.preferences())
      if (p.budget > max_budget) max_budget = p.budget;
    const Rational m_prime = Rational(static_cast<long>(n)) * (max_spread(V) + max_budget);
    if (m_prime > total) total = m_prime;
  } else {
    std::optional<Rational> min_budget;
    for (const Preference& p : e.preferences())
      if (p.rho > 0 && (!min_budget || p.budget < *min_budget)) min_budget = p.budget;
    if (min_budget) {
      const Rational low = Rational(static_cast<long>(n)) * (*min_budget - max_spread(V));
      if (low < total) total = low;
    }
  }
  const std::vector<RoomIndex> sigma = max_sum_assignment(V).assignment;
  const Linearization lin = start_form(e, dir);
  Linearization envy_form{V, Square<Rational>(n, Rational(1))};

  Frame f = make_frame(e, true);
  add_floor(f, linear_terms(e, obj, lin, sigma), std::nullopt, "floor");
  add_no_envy(f, e, envy_form, sigma);
  f.lp.add_constraint(total_expr(f), Relation::Equal, total, "total");
  f.lp.set_objective(Sense::Maximize, {{*f.R, Rational(1)}});
  LpSolution s = solve_or_throw(f.lp, "initial program");
  return Start{total, Allocation{sigma, extract(s, f)}, s.value};
}

inline std::size_t strict_pairs(const Economy& e, const std::vector<Rational>& rents, Direction dir) {
  if (dir == Direction::Downward) return effective_budget_sets(e, rents).strict_size();
  // Mirror measure for ascents: pairs still strictly below a kinked budget.
  std::size_t count = 0;
  for (AgentIndex i = 0; i < e.size(); ++i)
    if (e.preference(i).rho > 0)
      for (RoomIndex a = 0; a < e.size(); ++a) count += rents[a] < e.preference(i).budget;
  return count;
}

inline std::size_t iteration_guard(const Economy& e) {
  const std::size_t n = e.size();
  std::size_t pow = 1;
  for (std::size_t k = 1; k < e.rho_menu().size(); ++k) pow *= n + 1;
  return 20 * (n * n + pow + 1) + 100;
}

}  // namespace detail

/// Starting point for the descent: M = max{m, m'} and a maxmin-utility allocation at M.
inline std::pair<Rational, Allocation> starting_allocation(const Economy& e) {
  detail::Start s = detail::initialize(e, Objective::of(ObjectiveKind::MaxminUtility));
  return {s.total, s.allocation};
}

/// Moves a selection at total `start_total` to the economy's total rent, one LP pair per
/// iteration. Descending objectives rebate rent; ascending ones raise it.
inline SolveResult run_selection(const Economy& e, const Objective& obj, const Rational& start_total,
                                 const Allocation& z0, const Rational& start_value) {
  obj.validate(e);
  validate_allocation(e, z0, start_total);
  const Direction dir = obj.direction();
  const Rational& m = e.total_rent();
  if (dir == Direction::Downward ? start_total < m : start_total > m)
    throw Error(ErrorCode::Precondition, "starting total is on the wrong side of the rent");

  SolveResult out;
  out.trace.objective = obj;
  out.trace.start_total = start_total;
  out.trace.start = z0;
  out.trace.start_value = start_value;

  std::vector<Rational> r = z0.rents;
  std::vector<RoomIndex> sigma = z0.assignment;
  Rational total = start_total;
  const std::size_t guard = detail::iteration_guard(e);
  const std::size_t n = e.size();

  for (std::size_t s = 1; dir == Direction::Downward ? total > m : total < m; ++s) {
    if (s > guard) throw Error(ErrorCode::InternalInvariant, "iteration guard exceeded", std::to_string(guard));
    TraceStep step;
    step.s = s;
    step.budget_pairs_before = detail::strict_pairs(e, r, dir);
    const Linearization lin = linearize(e, r, dir);
    TieGraph ties;
    try {
      ties = tie_graph(e, Allocation{sigma, r}, dir);
    } catch (const Error& err) {
      throw Error(ErrorCode::InternalInvariant, "iterate lost no-envy", err.what());
    }
    const Matching mu = best_tie_matching(ties, dir);
    step.assignment = mu.assignment;
    step.matching_weight = mu.weight;
    const std::vector<detail::AffineTerm> terms = detail::linear_terms(e, obj, lin, mu.assignment);

    detail::Frame f = detail::make_frame(e, true);
    for (RoomIndex a = 0; a < n; ++a)
      f.lp.add_constraint({{f.t[a], Rational(1)}}, dir == Direction::Downward ? Relation::LessEq : Relation::GreaterEq,
                          r[a], "prev_" + e.rooms()[a]);
    detail::add_floor(f, terms, std::nullopt, "floor");
    detail::add_no_envy(f, e, lin, mu.assignment);
    for (AgentIndex i = 0; i < n; ++i) {
      const Preference& p = e.preference(i);
      if (p.rho == 0) continue;
      for (RoomIndex a = 0; a < n; ++a) {
        if (dir == Direction::Downward && r[a] > p.budget)
          f.lp.add_constraint({{f.t[a], Rational(1)}}, Relation::GreaterEq, p.budget,
                              "sb_" + e.agents()[i] + "_" + e.rooms()[a]);
        if (dir == Direction::Upward && r[a] < p.budget)
          f.lp.add_constraint({{f.t[a], Rational(1)}}, Relation::LessEq, p.budget,
                              "sb_" + e.agents()[i] + "_" + e.rooms()[a]);
      }
    }
    f.lp.add_constraint(detail::total_expr(f), dir == Direction::Downward ? Relation::GreaterEq : Relation::LessEq, m,
                        "total");
    auto [t, R] = detail::solve_lexicographic(
        f, dir == Direction::Downward ? Sense::Minimize : Sense::Maximize, "rebate program");
    step.lp_point = t;
    step.lp_value = R;

    if (is_selection(e, Allocation{mu.assignment, t}, obj).holds) {
      step.branch = StepBranch::Accepted;
      r = t;
    } else {
      step.branch = StepBranch::Corrected;
      detail::Frame g = detail::make_frame(e, false);
      for (RoomIndex a = 0; a < n; ++a)
        g.lp.add_constraint({{g.t[a], Rational(1)}},
                            dir == Direction::Downward ? Relation::GreaterEq : Relation::LessEq, t[a],
                            "lp_" + e.rooms()[a]);
      detail::add_floor(g, terms, R, "floor");
      detail::add_no_envy(g, e, lin, mu.assignment);
      g.lp.set_objective(dir == Direction::Downward ? Sense::Maximize : Sense::Minimize, detail::total_expr(g));
      LpSolution corr = detail::solve_or_throw(g.lp, "correction program");
      r = detail::extract(corr, g);
    }
    sigma = mu.assignment;
    total = 0;
    for (const Rational& x : r) total += x;
    step.rents = r;
    step.budget_pairs_after = detail::strict_pairs(e, r, dir);
    out.trace.steps.push_back(std::move(step));
  }

  out.allocation = Allocation{sigma, r};
  out.certificate = is_selection(e, out.allocation, obj);
  if (!out.certificate.holds || out.allocation.total() != m)
    throw Error(ErrorCode::InternalInvariant, "final allocation failed its certificate");
  return out;
}

/// Maxmin-utility descent from a maxmin allocation at M >= m (usually starting_allocation).
inline SolveResult descend_from(const Economy& e, const Rational& M, const Allocation& z0) {
  const Objective obj = Objective::of(ObjectiveKind::MaxminUtility);
  return run_selection(e, obj, M, z0, objective_value(e, z0, obj));
}

inline SolveResult solve(const Economy& e, const Objective& obj = Objective::of(ObjectiveKind::MaxminUtility)) {
  obj.validate(e);
  detail::Start s = detail::initialize(e, obj);
  return run_selection(e, obj, s.total, s.allocation, s.value);
}

struct NoncompensationResult {
  bool exists = false;
  Allocation witness;  // the max-min-rent envy-free allocation
};

/// Whether some envy-free allocation charges every room a non-negative rent.
inline NoncompensationResult has_noncompensation_ef(const Economy& e) {
  SolveResult r = solve(e, Objective::of(ObjectiveKind::MaxminTransformedRent));
  Rational lowest = r.allocation.rents.front();
  for (const Rational& x : r.allocation.rents)
    if (x < lowest) lowest = x;
  return {lowest >= 0, r.allocation};
}

/// One rebate step: lower the total by at most eta keeping no-envy, at the max-weight tie
/// matching, without crossing any budget currently exceeded.
inline Allocation rebate_step(const Economy& e, const Allocation& z, const Rational& eta) {
  if (eta < 0) throw Error(ErrorCode::InvalidInput, "eta must be non-negative", to_string(eta));
  const Matching mu = max_tie_matching(tie_graph(e, z));
  if (eta == 0) return z;
  const std::size_t n = e.size();
  const Linearization lin = linearize(e, z.rents);
  const BudgetSets sb = effective_budget_sets(e, z.rents);
  detail::Frame f = detail::make_frame(e, false);
  for (RoomIndex a = 0; a < n; ++a)
    f.lp.add_constraint({{f.t[a], Rational(1)}}, Relation::LessEq, z.rents[a], "prev_" + e.rooms()[a]);
  detail::add_no_envy(f, e, lin, mu.assignment);
  for (const auto& [i, a] : sb.strict_pairs())
    f.lp.add_constraint({{f.t[a], Rational(1)}}, Relation::GreaterEq, e.preference(i).budget,
                        "sb_" + e.agents()[i] + "_" + e.rooms()[a]);
  f.lp.add_constraint(detail::total_expr(f), Relation::GreaterEq, z.total() - eta, "total");
  f.lp.set_objective(Sense::Minimize, detail::total_expr(f));
  LpSolution s = detail::solve_or_throw(f.lp, "rebate step");
  return Allocation{mu.assignment, detail::extract(s, f)};
}

struct ProgressReport {
  bool ok = true;
  std::size_t iterations = 0;
  std::size_t bound = 0;
  std::vector<std::string> violations;
};

/// n^2 + (n+1)^(k-1) + 1.
inline std::size_t iteration_bound(const Economy& e) {
  const std::size_t n = e.size();
  std::size_t pow = 1;
  for (std::size_t k = 1; k < e.rho_menu().size(); ++k) pow *= n + 1;
  return n * n + pow + 1;
}

/// Checks that every non-final pass releases a budget pair or raises the next matching weight,
/// that the budget measure never grows, and the iteration bound.
inline ProgressReport check_progress(const Economy& e, const SolveTrace& trace) {
  ProgressReport out;
  out.iterations = trace.steps.size();
  out.bound = iteration_bound(e);
  const bool descending = trace.objective.direction() == Direction::Downward;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const TraceStep& st = trace.steps[k];
    if (st.budget_pairs_after > st.budget_pairs_before)
      out.violations.push_back("iteration " + std::to_string(st.s) + ": budget pairs grew");
    if (k + 1 == trace.steps.size()) continue;
    const TraceStep& next = trace.steps[k + 1];
    const bool released = st.budget_pairs_after < st.budget_pairs_before;
    const bool weight_moved =
        descending ? next.matching_weight > st.matching_weight : next.matching_weight < st.matching_weight;
    if (!released && !weight_moved)
      out.violations.push_back("iteration " + std::to_string(st.s) + ": no progress");
  }
  if (out.iterations > out.bound)
    out.violations.push_back("iterations " + std::to_string(out.iterations) + " exceed bound " +
                             std::to_string(out.bound));
  out.ok = out.violations.empty();
  return out;
}

}  // namespace rentdiv
