#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rentdiv/economy.hpp"
#include "rentdiv/oracle.hpp"
#include "rentdiv/solver.hpp"

namespace rentdiv {

/// Finite set of reports for one agent: the cartesian product of per-room value candidates,
/// budgets and rho values.
struct ReportGrid {
  std::vector<std::vector<Rational>> values;  // candidates per room
  std::vector<Rational> budgets;              // empty: keep the truthful budget
  std::vector<Rational> rhos;                 // empty: keep the truthful rho
  bool include_truth = true;
  Rational resolution = 1;                    // value step, used when comparing against bounds

  /// Quasi-linear reports. Room 0 is pinned to 0 (a common shift of values does not change
  /// preferences); every other room ranges over lo, lo + step, ..., hi.
  static ReportGrid quasi_linear(std::size_t n, const Rational& lo, const Rational& hi, const Rational& step) {
    if (step <= 0 || hi < lo) throw Error(ErrorCode::InvalidInput, "empty report grid");
    ReportGrid g;
    g.resolution = step;
    g.values.push_back({Rational(0)});
    std::vector<Rational> range;
    for (Rational x = lo; x <= hi; x += step) range.push_back(x);
    for (std::size_t a = 1; a < n; ++a) g.values.push_back(range);
    g.budgets = {Rational(0)};
    g.rhos = {Rational(0)};
    return g;
  }

  std::size_t size() const {
    std::size_t s = budgets.empty() ? 1 : budgets.size();
    s *= rhos.empty() ? 1 : rhos.size();
    for (const auto& v : values) s *= v.size();
    return s + (include_truth ? 1 : 0);
  }

  /// Reports in grid order; the truthful report comes first when requested.
  std::vector<Preference> enumerate(const Preference& truth) const {
    const std::size_t n = truth.values.size();
    if (values.size() != n) throw Error(ErrorCode::InvalidInput, "report grid must list values for every room");
    if (size() > 500000) throw Error(ErrorCode::InvalidInput, "report grid too large", std::to_string(size()));
    std::vector<Preference> out;
    if (include_truth) out.push_back(truth);
    const std::vector<Rational> bs = budgets.empty() ? std::vector<Rational>{truth.budget} : budgets;
    const std::vector<Rational> rs = rhos.empty() ? std::vector<Rational>{truth.rho} : rhos;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      Preference p;
      for (std::size_t a = 0; a < n; ++a) {
        if (values[a].empty()) throw Error(ErrorCode::InvalidInput, "empty value range in report grid");
        p.values.push_back(values[a][idx[a]]);
      }
      for (const Rational& b : bs)
        for (const Rational& r : rs) {
          Preference q = p;
          q.budget = b;
          q.rho = r;
          if (!(include_truth && q == truth)) out.push_back(std::move(q));
        }
      std::size_t a = n;
      while (a > 0) {
        --a;
        if (++idx[a] < values[a].size()) break;
        idx[a] = 0;
        if (a == 0) return out;
      }
      if (n == 0) return out;
    }
  }
};

/// theta = 1/(n (1+rho_bar)^(n n)), omega1 = theta/2, omega2 = 3/4.
struct ManipulationConstants {
  Rational theta, omega1, omega2;

  static ManipulationConstants of(const Economy& e) {
    ManipulationConstants c;
    c.theta = rentdiv::theta(e);
    c.omega1 = c.theta / 2;
    c.omega2 = make_rational(3, 4);
    return c;
  }
};

using Profile = std::vector<Preference>;

inline Profile truthful_profile(const Economy& e) { return e.preferences(); }

/// The economy in which `reports` replace the true preferences; the rho menu is widened to
/// cover every report.
inline Economy reported_economy(const Economy& e, const Profile& reports) {
  if (reports.size() != e.size()) throw Error(ErrorCode::InvalidInput, "one report per agent required");
  Economy out = e;
  for (AgentIndex i = 0; i < reports.size(); ++i) out = out.with_preference(i, reports[i]);
  return out;
}

/// The maxmin-utility mechanism with memoized outcomes.
class Mechanism {
 public:
  explicit Mechanism(Economy truth) : truth_(std::move(truth)) {}

  const Economy& truth() const { return truth_; }

  const Allocation& outcome(const Profile& reports) {
    std::string key = key_of(reports);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Allocation z = solve(reported_economy(truth_, reports)).allocation;
    return cache_.emplace(std::move(key), std::move(z)).first->second;
  }

  /// Agent i's true utility at the outcome of `reports`.
  Rational true_utility(const Profile& reports, AgentIndex i) { return utility_of(truth_, outcome(reports), i); }

  std::size_t solves() const { return cache_.size(); }

 private:
  static std::string key_of(const Profile& reports) {
    std::string k;
    for (const Preference& p : reports) {
      for (const Rational& v : p.values) k += to_string(v) + ",";
      k += "|" + to_string(p.budget) + "|" + to_string(p.rho) + ";";
    }
    return k;
  }

  Economy truth_;
  std::map<std::string, Allocation> cache_;
};

struct BestResponse {
  Preference report;
  Rational utility;           // true utility at the best report
  Rational current_utility;   // true utility at the given profile
  Rational gain() const { return utility - current_utility; }
};

/// Exhaustive search over agent i's grid with the other reports fixed; ties go to grid order.
inline BestResponse best_response(Mechanism& mech, const Profile& reports, AgentIndex i, const ReportGrid& grid) {
  if (i >= mech.truth().size()) throw Error(ErrorCode::UnknownId, "unknown agent index", std::to_string(i));
  BestResponse out{reports[i], mech.true_utility(reports, i), mech.true_utility(reports, i)};
  for (const Preference& candidate : grid.enumerate(mech.truth().preference(i))) {
    Profile deviated = reports;
    deviated[i] = candidate;
    Rational u = mech.true_utility(deviated, i);
    if (u > out.utility) {
      out.utility = u;
      out.report = candidate;
    }
  }
  return out;
}

inline BestResponse best_response(const Economy& truth, AgentIndex i, const ReportGrid& grid) {
  Mechanism mech(truth);
  return best_response(mech, truthful_profile(truth), i, grid);
}

struct EquilibriumCheck {
  bool holds = true;
  std::vector<Rational> gains;  // best grid gain per agent
};

inline EquilibriumCheck is_epsilon_equilibrium(Mechanism& mech, const Profile& reports, const Rational& eps,
                                               const std::vector<ReportGrid>& grids) {
  EquilibriumCheck out;
  for (AgentIndex i = 0; i < mech.truth().size(); ++i) {
    BestResponse br = best_response(mech, reports, i, grids.at(i));
    out.gains.push_back(br.gain());
    if (br.gain() > eps) out.holds = false;
  }
  return out;
}

inline EquilibriumCheck is_epsilon_equilibrium(const Economy& truth, const Profile& reports, const Rational& eps,
                                               const ReportGrid& grid) {
  Mechanism mech(truth);
  return is_epsilon_equilibrium(mech, reports, eps, std::vector<ReportGrid>(truth.size(), grid));
}

struct LimitStage {
  Rational epsilon;
  ReportGrid grid;
};

struct LimitRow {
  Rational epsilon;
  Rational resolution;
  std::size_t profiles = 0;
  std::size_t equilibria = 0;
  Rational max_distance;  // sup-norm distance of equilibrium rents to the envy-free rents
  std::optional<Allocation> farthest;
};

struct LimitReport {
  std::vector<LimitRow> rows;
  /// Each row's max distance is at most the previous one plus the previous resolution.
  bool non_increasing = true;
};

/// For each stage, enumerates every report profile on the grid, keeps the epsilon-equilibria
/// and measures how far their outcomes are from the envy-free set of the true economy.
inline LimitReport limit_equilibrium_experiment(const Economy& truth, const std::vector<LimitStage>& stages) {
  if (truth.size() > 3) throw Error(ErrorCode::InvalidInput, "equilibrium enumeration limited to 3 agents");
  Mechanism mech(truth);
  std::map<std::string, Rational> distance_cache;
  LimitReport rep;
  for (const LimitStage& stage : stages) {
    const std::size_t n = truth.size();
    std::vector<std::vector<Preference>> options(n);
    for (AgentIndex i = 0; i < n; ++i) options[i] = stage.grid.enumerate(truth.preference(i));
    LimitRow row;
    row.epsilon = stage.epsilon;
    row.resolution = stage.grid.resolution;
    row.max_distance = 0;
    std::vector<std::size_t> idx(n, 0);
    for (bool more = true; more;) {
      Profile profile;
      for (AgentIndex i = 0; i < n; ++i) profile.push_back(options[i][idx[i]]);
      ++row.profiles;
      bool equilibrium = true;
      for (AgentIndex i = 0; i < n && equilibrium; ++i) {
        const Rational current = mech.true_utility(profile, i);
        for (const Preference& dev : options[i]) {
          Profile d = profile;
          d[i] = dev;
          if (mech.true_utility(d, i) - current > stage.epsilon) {
            equilibrium = false;
            break;
          }
        }
      }
      if (equilibrium) {
        ++row.equilibria;
        const Allocation& z = mech.outcome(profile);
        std::string key;
        for (const Rational& x : z.rents) key += to_string(x) + ",";
        auto it = distance_cache.find(key);
        if (it == distance_cache.end())
          it = distance_cache.emplace(key, distance_to_envy_free(truth, z.rents, truth.total_rent())).first;
        if (it->second > row.max_distance || !row.farthest) {
          if (it->second >= row.max_distance) {
            row.max_distance = it->second;
            row.farthest = z;
          }
        }
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == options[k].size()) idx[k++] = 0;
      more = k < n;
    }
    if (!rep.rows.empty()) {
      const LimitRow& prev = rep.rows.back();
      if (row.max_distance > prev.max_distance + prev.resolution) rep.non_increasing = false;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strong manipulation

struct StrongManipulationReport {
  bool achieved = false;
  Rational eta;
  Rational bound;
  ManipulationConstants constants;
  std::optional<Preference> witness;
  std::size_t reports_tried = 0;
  std::size_t allocations_checked = 0;
};

/// At z in F(v), agent i (true preference `truth_i`) envies agent j. Searches the quasi-linear
/// grid for a report after which every sampled envy-free allocation gives i at least
/// min{u_i(r_own - omega1 eta), u_i(r_j + omega2 eta)}.
inline StrongManipulationReport check_strong_manipulation(const Economy& v, const Allocation& z, AgentIndex i,
                                                          const Preference& truth_i, AgentIndex j,
                                                          const ReportGrid& grid) {
  if (v.size() > 3) throw Error(ErrorCode::InvalidInput, "strong manipulation check limited to 3 agents");
  if (i >= v.size() || j >= v.size()) throw Error(ErrorCode::UnknownId, "unknown agent index");
  if (!is_envy_free(v, z)) throw Error(ErrorCode::Precondition, "z must be envy-free for the reports");
  const RoomIndex own = z.assignment[i], other = z.assignment[j];
  const Rational u_own = eval_utility(truth_i, z.rents[own], own);
  if (!(eval_utility(truth_i, z.rents[other], other) > u_own))
    throw Error(ErrorCode::Precondition, "agent does not envy the other agent at z");
  StrongManipulationReport rep;
  rep.constants = ManipulationConstants::of(v);
  rep.eta = rent_for_utility(truth_i, other, u_own) - z.rents[other];
  const Rational rebated = eval_utility(truth_i, z.rents[own] - rep.constants.omega1 * rep.eta, own);
  const Rational surcharged = eval_utility(truth_i, z.rents[other] + rep.constants.omega2 * rep.eta, other);
  rep.bound = rebated < surcharged ? rebated : surcharged;

  ReportGrid g = grid;
  g.include_truth = false;
  for (const Preference& report : g.enumerate(truth_i)) {
    if (report.rho != 0) continue;
    ++rep.reports_tried;
    Profile profile = v.preferences();
    profile[i] = report;
    const Economy deviated = reported_economy(v, profile);
    const std::vector<Allocation> samples = sample_envy_free(deviated, v.total_rent());
    bool all = !samples.empty();
    for (const Allocation& s : samples) {
      ++rep.allocations_checked;
      const RoomIndex got = s.assignment[i];
      if (eval_utility(truth_i, s.rents[got], got) < rep.bound) {
        all = false;
        break;
      }
    }
    if (all) {
      rep.achieved = true;
      rep.witness = report;
      return rep;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Supporting profile for an envy-free allocation

/// Quasi-linear reports making z the unique envy-free outcome up to eps: each agent values its
/// room at z at its rent plus eps/(n-1) and every other room at its rent minus eps/(n-1)^2.
inline Profile supporting_profile(const Economy& e, const Allocation& z, const Rational& eps) {
  validate_allocation(e, z);
  if (eps <= 0) throw Error(ErrorCode::InvalidInput, "eps must be positive");
  const std::size_t n = e.size();
  Profile out;
  for (AgentIndex i = 0; i < n; ++i) {
    Preference p;
    p.budget = 0;
    p.rho = 0;
    for (RoomIndex a = 0; a < n; ++a) {
      if (n == 1) {
        p.values.push_back(z.rents[a]);
      } else if (a == z.assignment[i]) {
        p.values.push_back(z.rents[a] + eps / Rational(static_cast<long>(n - 1)));
      } else {
        const Rational d = Rational(static_cast<long>(n - 1));
        p.values.push_back(z.rents[a] - eps / (d * d));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct SupportReport {
  Allocation outcome;
  bool same_assignment = false;
  bool rents_in_band = false;  // r - eps <= t <= r + eps/(n-1)
  std::vector<Rational> gains;
  Rational max_gain;
  Rational max_rho;  // of the true profile
  /// Gains at most eps plus one grid step.
  bool equilibrium = false;
  /// Gains at most (1 + max rho) eps plus one grid step, the bound that holds for kinked
  /// true utilities.
  bool equilibrium_scaled = false;
};

inline SupportReport check_supporting_profile(const Economy& truth, const Allocation& z, const Rational& eps,
                                              const ReportGrid& grid) {
  if (!is_envy_free(truth, z)) throw Error(ErrorCode::Precondition, "z must be envy-free for the true economy");
  const std::size_t n = truth.size();
  Mechanism mech(truth);
  const Profile profile = supporting_profile(truth, z, eps);
  SupportReport rep;
  rep.outcome = mech.outcome(profile);
  rep.same_assignment = rep.outcome.assignment == z.assignment;
  rep.rents_in_band = true;
  const Rational up = n > 1 ? Rational(eps / Rational(static_cast<long>(n - 1))) : Rational(0);
  for (RoomIndex a = 0; a < n; ++a)
    if (rep.outcome.rents[a] < z.rents[a] - eps || rep.outcome.rents[a] > z.rents[a] + up) rep.rents_in_band = false;
  rep.max_gain = 0;
  rep.max_rho = 0;
  for (AgentIndex i = 0; i < n; ++i) {
    if (truth.preference(i).rho > rep.max_rho) rep.max_rho = truth.preference(i).rho;
    Rational g = best_response(mech, profile, i, grid).gain();
    if (g > rep.max_gain) rep.max_gain = g;
    rep.gains.push_back(std::move(g));
  }
  rep.equilibrium = rep.max_gain <= eps + grid.resolution;
  rep.equilibrium_scaled = rep.max_gain <= (1 + rep.max_rho) * eps + grid.resolution;
  return rep;
}

}  // namespace rentdiv
