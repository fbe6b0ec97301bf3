#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "rentdiv/oracle.hpp"
#include "rentdiv/solver.hpp"

namespace rentdiv {

using Json = nlohmann::json;

namespace json_detail {

inline const Json& field(const Json& j, const char* key, const char* where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, std::string(where) + " must be a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::InvalidInput, std::string("missing field '") + key + "'", where);
  return *it;
}

inline std::string string_field(const Json& j, const char* key, const char* where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw Error(ErrorCode::InvalidInput, std::string("field '") + key + "' must be a string", where);
  return v.get<std::string>();
}

}  // namespace json_detail

/// Rationals travel as strings. Integers are tolerated on input; floats never are.
inline Json rational_json(const Rational& q) { return to_string(q); }

inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw Error(ErrorCode::InvalidInput, "rational must be a string such as \"7/3\"", j.dump());
}

inline Json rationals_json(const std::vector<Rational>& xs) {
  Json out = Json::array();
  for (const Rational& x : xs) out.push_back(rational_json(x));
  return out;
}

inline std::vector<Rational> rationals_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, "expected an array of rationals", j.dump());
  std::vector<Rational> out;
  for (const Json& x : j) out.push_back(rational_from_json(x));
  return out;
}

// ---------------------------------------------------------------------------
// Economy

inline Json economy_json(const Economy& e) {
  Json agents = Json::array();
  for (AgentIndex i = 0; i < e.size(); ++i) {
    Json values = Json::object();
    for (RoomIndex a = 0; a < e.size(); ++a) values[e.rooms()[a]] = rational_json(e.value(i, a));
    agents.push_back({{"id", e.agents()[i]},
                      {"values", values},
                      {"budget", rational_json(e.preference(i).budget)},
                      {"rho", rational_json(e.preference(i).rho)}});
  }
  return {{"agents", agents},
          {"rooms", e.rooms()},
          {"total_rent", rational_json(e.total_rent())},
          {"rho_menu", rationals_json(e.rho_menu())},
          {"rho_bar", rational_json(e.rho_bar())}};
}

/// rho_menu defaults to the distinct rho values reported; rho_bar defaults to the menu maximum.
inline Economy economy_from_json(const Json& j) {
  using namespace json_detail;
  const Json& rooms_json = field(j, "rooms", "economy");
  if (!rooms_json.is_array()) throw Error(ErrorCode::InvalidInput, "rooms must be an array of ids");
  std::vector<std::string> rooms;
  for (const Json& r : rooms_json) {
    if (!r.is_string()) throw Error(ErrorCode::InvalidInput, "room ids must be strings", r.dump());
    rooms.push_back(r.get<std::string>());
  }
  const Json& agents_json = field(j, "agents", "economy");
  if (!agents_json.is_array()) throw Error(ErrorCode::InvalidInput, "agents must be an array");
  std::vector<std::string> agents;
  std::vector<Preference> prefs;
  for (const Json& a : agents_json) {
    agents.push_back(string_field(a, "id", "agent"));
    const Json& values = field(a, "values", "agent");
    if (!values.is_object()) throw Error(ErrorCode::InvalidInput, "agent values must map room ids to rationals");
    Preference p;
    for (const std::string& room : rooms) {
      auto it = values.find(room);
      if (it == values.end()) throw Error(ErrorCode::InvalidInput, "agent has no value for room", agents.back() + "/" + room);
      p.values.push_back(rational_from_json(*it));
    }
    for (auto it = values.begin(); it != values.end(); ++it)
      if (std::find(rooms.begin(), rooms.end(), it.key()) == rooms.end())
        throw Error(ErrorCode::UnknownId, "value given for an unknown room", it.key());
    p.budget = a.contains("budget") ? rational_from_json(a["budget"]) : Rational(0);
    p.rho = a.contains("rho") ? rational_from_json(a["rho"]) : Rational(0);
    prefs.push_back(std::move(p));
  }
  std::vector<Rational> menu;
  if (j.contains("rho_menu")) {
    menu = rationals_from_json(j["rho_menu"]);
  } else {
    for (const Preference& p : prefs) menu.push_back(p.rho);
  }
  Rational bar = 0;
  if (j.contains("rho_bar")) {
    bar = rational_from_json(j["rho_bar"]);
  } else {
    for (const Rational& r : menu)
      if (r > bar) bar = r;
  }
  return Economy(std::move(agents), std::move(rooms), std::move(prefs), rational_from_json(field(j, "total_rent", "economy")),
                 std::move(menu), std::move(bar));
}

// ---------------------------------------------------------------------------
// Allocation

inline Json allocation_json(const Economy& e, const Allocation& z) {
  Json assignment = Json::object(), rents = Json::object();
  for (AgentIndex i = 0; i < e.size(); ++i) assignment[e.agents()[i]] = e.rooms()[z.assignment[i]];
  for (RoomIndex a = 0; a < e.size(); ++a) rents[e.rooms()[a]] = rational_json(z.rents[a]);
  return {{"assignment", assignment}, {"rents", rents}};
}

inline Allocation allocation_from_json(const Economy& e, const Json& j) {
  using namespace json_detail;
  const Json& assignment = field(j, "assignment", "allocation");
  const Json& rents = field(j, "rents", "allocation");
  if (!assignment.is_object() || !rents.is_object())
    throw Error(ErrorCode::InvalidInput, "allocation assignment and rents must be objects");
  if (assignment.size() != e.size() || rents.size() != e.size())
    throw Error(ErrorCode::InvalidInput, "allocation must cover every agent and room");
  Allocation z;
  z.assignment.assign(e.size(), 0);
  z.rents.assign(e.size(), Rational(0));
  for (auto it = assignment.begin(); it != assignment.end(); ++it) {
    if (!it->is_string()) throw Error(ErrorCode::InvalidInput, "assigned room must be a room id", it.key());
    z.assignment[e.agent_index(it.key())] = e.room_index(it->get<std::string>());
  }
  for (auto it = rents.begin(); it != rents.end(); ++it) z.rents[e.room_index(it.key())] = rational_from_json(*it);
  validate_allocation(e, z);
  return z;
}

// ---------------------------------------------------------------------------
// Reports

inline Json certificate_json(const Economy& e, const SelectionCertificate& c) {
  Json out{{"holds", c.holds},
           {"envy_free", c.envy_free},
           {"value", rational_json(c.value)},
           {"direction", c.direction == Direction::Downward ? "downward" : "upward"}};
  Json extremal = Json::array();
  for (AgentIndex i : c.extremal) extremal.push_back(e.agents()[i]);
  out["extremal"] = extremal;
  if (c.envy)
    out["envy"] = {{"envious", e.agents()[c.envy->envious]},
                   {"envied", e.agents()[c.envy->envied]},
                   {"gap", rational_json(c.envy->gap)}};
  Json paths = Json::object();
  for (AgentIndex i = 0; i < c.paths.size(); ++i) {
    if (!c.paths[i]) {
      paths[e.agents()[i]] = nullptr;
      continue;
    }
    Json p = Json::array();
    for (AgentIndex k : *c.paths[i]) p.push_back(e.agents()[k]);
    paths[e.agents()[i]] = p;
  }
  out["paths"] = paths;
  if (c.failing_agent) out["failing_agent"] = e.agents()[*c.failing_agent];
  return out;
}

inline Json rooms_vector_json(const Economy& e, const std::vector<Rational>& xs) {
  Json out = Json::object();
  for (RoomIndex a = 0; a < xs.size(); ++a) out[e.rooms()[a]] = rational_json(xs[a]);
  return out;
}

inline Json assignment_json(const Economy& e, const std::vector<RoomIndex>& sigma) {
  Json out = Json::object();
  for (AgentIndex i = 0; i < sigma.size(); ++i) out[e.agents()[i]] = e.rooms()[sigma[i]];
  return out;
}

inline Json trace_json(const Economy& e, const SolveTrace& t) {
  Json steps = Json::array();
  for (const TraceStep& s : t.steps)
    steps.push_back({{"s", s.s},
                     {"assignment", assignment_json(e, s.assignment)},
                     {"matching_weight", rational_json(s.matching_weight)},
                     {"lp_point", rooms_vector_json(e, s.lp_point)},
                     {"lp_value", rational_json(s.lp_value)},
                     {"branch", branch_name(s.branch)},
                     {"rents", rooms_vector_json(e, s.rents)},
                     {"budget_pairs_before", s.budget_pairs_before},
                     {"budget_pairs_after", s.budget_pairs_after}});
  return {{"objective", objective_name(t.objective.kind)},
          {"start_total", rational_json(t.start_total)},
          {"start", allocation_json(e, t.start)},
          {"start_value", rational_json(t.start_value)},
          {"steps", steps}};
}

inline Json utilities_json(const Economy& e, const Allocation& z) {
  Json out = Json::object();
  for (AgentIndex i = 0; i < e.size(); ++i) out[e.agents()[i]] = rational_json(utility_of(e, z, i));
  return out;
}

inline Json solve_result_json(const Economy& e, const SolveResult& r, bool with_trace) {
  Json out{{"objective", objective_name(r.trace.objective.kind)},
           {"allocation", allocation_json(e, r.allocation)},
           {"utilities", utilities_json(e, r.allocation)},
           {"value", rational_json(r.certificate.value)},
           {"certificate", certificate_json(e, r.certificate)}};
  if (with_trace) out["trace"] = trace_json(e, r.trace);
  return out;
}

/// Objective from {"kind": ..., "transform": {room: {"alpha": q, "beta": q}}}, or a bare name.
inline Objective objective_from_json(const Economy& e, const Json& j) {
  if (j.is_null()) return Objective::of(ObjectiveKind::MaxminUtility);
  if (j.is_string()) return Objective::of(parse_objective_kind(j.get<std::string>()));
  Objective obj = Objective::of(parse_objective_kind(json_detail::string_field(j, "kind", "objective")));
  if (j.contains("transform")) {
    const Json& tr = j["transform"];
    if (!tr.is_object()) throw Error(ErrorCode::InvalidInput, "transform must map room ids to {alpha, beta}");
    obj.transform.assign(e.size(), RentTransform{});
    for (auto it = tr.begin(); it != tr.end(); ++it) {
      RentTransform& t = obj.transform[e.room_index(it.key())];
      if (it->contains("alpha")) t.alpha = rational_from_json((*it)["alpha"]);
      if (it->contains("beta")) t.beta = rational_from_json((*it)["beta"]);
    }
  }
  obj.validate(e);
  return obj;
}

inline Json oracle_result_json(const Economy& e, const OracleResult& r) {
  Json out{{"feasible", r.feasible}, {"programs_solved", r.programs_solved}};
  if (r.feasible) {
    out["value"] = rational_json(r.value);
    out["allocation"] = allocation_json(e, r.optimum);
  }
  Json table = Json::array();
  for (const AssignmentRow& row : r.table) {
    Json x{{"assignment", assignment_json(e, row.assignment)}, {"feasible", row.feasible}, {"dominated", row.dominated}};
    if (row.feasible) {
      x["value"] = rational_json(row.value);
      x["rents"] = rooms_vector_json(e, row.rents);
    }
    table.push_back(x);
  }
  out["table"] = table;
  return out;
}

inline Json error_json(const Error& err) {
  return {{"code", code_name(err.code())}, {"message", err.what()}, {"detail", err.detail()}};
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& ex) {
    throw Error(ErrorCode::InvalidInput, "malformed JSON", ex.what());
  }
}

}  // namespace rentdiv
