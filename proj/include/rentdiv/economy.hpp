#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rentdiv/error.hpp"
#include "rentdiv/rational.hpp"

namespace rentdiv {

using AgentIndex = std::size_t;
using RoomIndex = std::size_t;

/// Budget-constrained quasi-linear preference: v_a - p - rho * max(0, p - b).
/// A quasi-linear preference is the special case rho = 0.
struct Preference {
  std::vector<Rational> values;  // indexed by room
  Rational budget;
  Rational rho;

  friend bool operator==(const Preference&, const Preference&) = default;
};

inline Rational eval_utility(const Preference& pref, const Rational& rent, RoomIndex room) {
  if (room >= pref.values.size())
    throw Error(ErrorCode::UnknownId, "unknown room index", std::to_string(room));
  Rational u = pref.values[room] - rent;
  if (rent > pref.budget) u -= pref.rho * (rent - pref.budget);
  return u;
}

/// The rent at which `pref` values `room` at exactly `target`. Unique by money-monotonicity.
inline Rational rent_for_utility(const Preference& pref, RoomIndex room, const Rational& target) {
  Rational below = pref.values.at(room) - target;
  if (below <= pref.budget) return below;
  return (pref.values[room] + pref.rho * pref.budget - target) / (1 + pref.rho);
}

/// An economy (N, A, u, m) with a finite menu of budget violation indices.
class Economy {
 public:
  Economy(std::vector<std::string> agents, std::vector<std::string> rooms,
          std::vector<Preference> preferences, Rational total_rent,
          std::vector<Rational> rho_menu, Rational rho_bar)
      : agents_(std::move(agents)),
        rooms_(std::move(rooms)),
        prefs_(std::move(preferences)),
        total_rent_(std::move(total_rent)),
        rho_menu_(std::move(rho_menu)),
        rho_bar_(std::move(rho_bar)) {
    validate();
  }

  std::size_t size() const { return agents_.size(); }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::vector<std::string>& rooms() const { return rooms_; }
  const std::vector<Preference>& preferences() const { return prefs_; }
  const Preference& preference(AgentIndex i) const { return prefs_.at(i); }
  const Rational& total_rent() const { return total_rent_; }
  const std::vector<Rational>& rho_menu() const { return rho_menu_; }
  const Rational& rho_bar() const { return rho_bar_; }

  /// Value of agent i for room a (v_ia).
  const Rational& value(AgentIndex i, RoomIndex a) const { return prefs_[i].values[a]; }

  AgentIndex agent_index(const std::string& id) const { return lookup(agents_, id, "agent"); }
  RoomIndex room_index(const std::string& id) const { return lookup(rooms_, id, "room"); }

  Economy with_total_rent(Rational total) const {
    Economy copy = *this;
    copy.total_rent_ = std::move(total);
    return copy;
  }

  Economy with_preference(AgentIndex i, Preference pref) const {
    std::vector<Preference> prefs = prefs_;
    prefs.at(i) = std::move(pref);
    std::vector<Rational> menu = rho_menu_;
    if (std::find(menu.begin(), menu.end(), prefs[i].rho) == menu.end()) menu.push_back(prefs[i].rho);
    Rational bar = rentdiv_max(rho_bar_, prefs[i].rho);
    return Economy(agents_, rooms_, std::move(prefs), total_rent_, std::move(menu), std::move(bar));
  }

  /// True when every agent has rho = 0, i.e. the profile is quasi-linear.
  bool quasi_linear() const {
    return std::all_of(prefs_.begin(), prefs_.end(), [](const Preference& p) { return p.rho == 0; });
  }

  friend bool operator==(const Economy&, const Economy&) = default;

 private:
  static const Rational& rentdiv_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

  static std::size_t lookup(const std::vector<std::string>& ids, const std::string& id, const char* what) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw Error(ErrorCode::UnknownId, std::string("unknown ") + what + " id", id);
    return static_cast<std::size_t>(it - ids.begin());
  }

  void validate() {
    const std::size_t n = agents_.size();
    if (n == 0) throw Error(ErrorCode::InvalidInput, "economy has no agents");
    if (rooms_.size() != n)
      throw Error(ErrorCode::InvalidInput, "number of rooms must equal number of agents");
    if (prefs_.size() != n) throw Error(ErrorCode::InvalidInput, "one preference per agent required");
    auto check_unique = [](std::vector<std::string> ids, const char* what) {
      std::sort(ids.begin(), ids.end());
      if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw Error(ErrorCode::InvalidInput, std::string("duplicate ") + what + " id");
    };
    check_unique(agents_, "agent");
    check_unique(rooms_, "room");
    if (rho_bar_ < 0) throw Error(ErrorCode::InvalidInput, "rho_bar must be non-negative");
    if (rho_menu_.empty()) rho_menu_.push_back(Rational(0));
    std::sort(rho_menu_.begin(), rho_menu_.end());
    rho_menu_.erase(std::unique(rho_menu_.begin(), rho_menu_.end()), rho_menu_.end());
    for (const Rational& rho : rho_menu_)
      if (rho < 0 || rho > rho_bar_)
        throw Error(ErrorCode::InvalidInput, "rho menu entry outside [0, rho_bar]", to_string(rho));
    for (std::size_t i = 0; i < n; ++i) {
      const Preference& p = prefs_[i];
      if (p.values.size() != n)
        throw Error(ErrorCode::InvalidInput, "preference must value every room", agents_[i]);
      if (p.budget < 0) throw Error(ErrorCode::InvalidInput, "budget must be non-negative", agents_[i]);
      if (!std::binary_search(rho_menu_.begin(), rho_menu_.end(), p.rho))
        throw Error(ErrorCode::InvalidInput, "rho not in the economy's rho menu", agents_[i]);
    }
  }

  std::vector<std::string> agents_;
  std::vector<std::string> rooms_;
  std::vector<Preference> prefs_;
  Rational total_rent_;
  std::vector<Rational> rho_menu_;
  Rational rho_bar_;
};

/// Room assignment (agent -> room) plus per-room rents.
struct Allocation {
  std::vector<RoomIndex> assignment;  // indexed by agent
  std::vector<Rational> rents;        // indexed by room

  Rational total() const { return std::accumulate(rents.begin(), rents.end(), Rational(0)); }
  const Rational& rent_of(AgentIndex i) const { return rents[assignment[i]]; }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Checks the bijection and sizes; with `total`, also that rents sum to it exactly.
inline void validate_allocation(const Economy& e, const Allocation& z,
                                const std::optional<Rational>& total = std::nullopt) {
  const std::size_t n = e.size();
  if (z.assignment.size() != n || z.rents.size() != n)
    throw Error(ErrorCode::InvalidInput, "allocation does not match the economy's size");
  std::vector<bool> used(n, false);
  for (RoomIndex a : z.assignment) {
    if (a >= n || used[a]) throw Error(ErrorCode::InvalidInput, "assignment is not a bijection");
    used[a] = true;
  }
  if (total && z.total() != *total)
    throw Error(ErrorCode::InvalidInput, "rents do not sum to the total rent",
                to_string(z.total()) + " != " + to_string(*total));
}

/// u_i(z_j): agent i's utility for the bundle agent j holds at z.
inline Rational utility_of_bundle(const Economy& e, const Allocation& z, AgentIndex i, AgentIndex j) {
  const RoomIndex a = z.assignment[j];
  return eval_utility(e.preference(i), z.rents[a], a);
}

inline Rational utility_of(const Economy& e, const Allocation& z, AgentIndex i) {
  return utility_of_bundle(e, z, i, i);
}

inline std::vector<Rational> utility_profile(const Economy& e, const Allocation& z) {
  std::vector<Rational> out;
  out.reserve(e.size());
  for (AgentIndex i = 0; i < e.size(); ++i) out.push_back(utility_of(e, z, i));
  return out;
}

/// Agent i's utility for room a at rent r; lookup by ids.
inline Rational eval_utility(const Economy& e, const std::string& agent, const Rational& rent,
                             const std::string& room) {
  return eval_utility(e.preference(e.agent_index(agent)), rent, e.room_index(room));
}

}  // namespace rentdiv
