#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rentdiv/economy.hpp"
#include "rentdiv/graphs.hpp"

namespace rentdiv {

enum class ObjectiveKind { MaxminUtility, MaxminTransformedRent, MinmaxUtility, MinmaxTransformedRent };

inline const char* objective_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::MaxminUtility: return "maxmin-utility";
    case ObjectiveKind::MaxminTransformedRent: return "maxmin-rent";
    case ObjectiveKind::MinmaxUtility: return "minmax-utility";
    case ObjectiveKind::MinmaxTransformedRent: return "minmax-rent";
  }
  return "?";
}

inline ObjectiveKind parse_objective_kind(const std::string& name) {
  for (ObjectiveKind k : {ObjectiveKind::MaxminUtility, ObjectiveKind::MaxminTransformedRent,
                          ObjectiveKind::MinmaxUtility, ObjectiveKind::MinmaxTransformedRent})
    if (name == objective_name(k)) return k;
  throw Error(ErrorCode::InvalidInput, "unknown objective", name);
}

/// alpha + beta * rent, beta > 0.
struct RentTransform {
  Rational alpha = 0;
  Rational beta = 1;
};

/// Selection criterion over envy-free allocations. Every kind is handled internally as
/// "maximize the minimum of terms g_k", with g_k = +/- utility of agent k or +/- the
/// transformed rent of room k.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::MaxminUtility;
  std::vector<RentTransform> transform;  // per room; empty = identity

  static Objective of(ObjectiveKind k) { return Objective{k, {}}; }

  bool rent_based() const {
    return kind == ObjectiveKind::MaxminTransformedRent || kind == ObjectiveKind::MinmaxTransformedRent;
  }
  bool maxmin() const { return kind == ObjectiveKind::MaxminUtility || kind == ObjectiveKind::MaxminTransformedRent; }
  Rational sign() const { return maxmin() ? Rational(1) : Rational(-1); }

  /// Downward when the criterion improves as the total rent falls.
  Direction direction() const { return rent_based() != maxmin() ? Direction::Downward : Direction::Upward; }

  RentTransform transform_of(RoomIndex a) const { return transform.empty() ? RentTransform{} : transform.at(a); }

  void validate(const Economy& e) const {
    if (transform.empty()) return;
    if (!rent_based()) throw Error(ErrorCode::InvalidInput, "rent transform given for a utility objective");
    if (transform.size() != e.size()) throw Error(ErrorCode::InvalidInput, "rent transform must cover every room");
    for (const RentTransform& t : transform)
      if (t.beta <= 0) throw Error(ErrorCode::InvalidInput, "rent transform needs beta > 0", to_string(t.beta));
  }
};

/// The terms g_k at z, indexed by agent (utility kinds) or room (rent kinds).
inline std::vector<Rational> objective_terms(const Economy& e, const Allocation& z, const Objective& obj) {
  std::vector<Rational> g;
  g.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (obj.rent_based()) {
      const RentTransform tr = obj.transform_of(k);
      g.push_back(obj.sign() * (tr.alpha + tr.beta * z.rents[k]));
    } else {
      g.push_back(obj.sign() * utility_of(e, z, k));
    }
  }
  return g;
}

/// The criterion value in its natural orientation (the min for maxmin kinds, the max for
/// minmax kinds).
inline Rational objective_value(const Economy& e, const Allocation& z, const Objective& obj) {
  std::vector<Rational> g = objective_terms(e, z, obj);
  Rational worst = g.front();
  for (const Rational& x : g)
    if (x < worst) worst = x;
  return obj.sign() * worst;
}

struct SelectionCertificate {
  bool holds = false;
  bool envy_free = false;
  std::optional<EnvyWitness> envy;
  Rational value;                        // natural orientation
  std::vector<AgentIndex> extremal;      // agents whose term attains the optimum
  Direction direction = Direction::Downward;
  std::vector<std::optional<std::vector<AgentIndex>>> paths;  // per agent
  std::optional<AgentIndex> failing_agent;

  explicit operator bool() const { return holds; }
};

/// Optimality test for a selection by envy-graph reachability. For criteria that improve as
/// rent falls, every agent must reach the extremal set; for the others, every agent must be
/// reachable from it. With MaxminUtility this is the classic maxmin criterion.
inline SelectionCertificate is_selection(const Economy& e, const Allocation& z, const Objective& obj) {
  obj.validate(e);
  SelectionCertificate cert;
  cert.direction = obj.direction();
  EnvyCheck ef = is_envy_free(e, z);
  cert.envy_free = ef.envy_free;
  cert.envy = ef.witness;
  cert.value = objective_value(e, z, obj);
  const std::vector<Rational> g = objective_terms(e, z, obj);
  const Rational target = obj.sign() * cert.value;
  for (AgentIndex i = 0; i < e.size(); ++i) {
    const std::size_t k = obj.rent_based() ? z.assignment[i] : i;
    if (g[k] == target) cert.extremal.push_back(i);
  }
  if (!cert.envy_free) return cert;
  cert.paths = paths_to_set(envy_graph(e, z), cert.extremal, cert.direction == Direction::Upward);
  for (AgentIndex i = 0; i < e.size(); ++i)
    if (!cert.paths[i]) {
      cert.failing_agent = i;
      return cert;
    }
  cert.holds = true;
  return cert;
}

inline SelectionCertificate is_maxmin(const Economy& e, const Allocation& z) {
  return is_selection(e, z, Objective::of(ObjectiveKind::MaxminUtility));
}

}  // namespace rentdiv
