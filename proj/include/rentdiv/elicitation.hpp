#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rentdiv/json_io.hpp"

namespace rentdiv {

enum class Stage { AwaitRents, AwaitBudget, AwaitRhoEquivalent, AwaitRhoSelfAssessment, Done };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::AwaitRents: return "await_rents";
    case Stage::AwaitBudget: return "await_budget";
    case Stage::AwaitRhoEquivalent: return "await_rho_equivalent";
    case Stage::AwaitRhoSelfAssessment: return "await_rho_self_assessment";
    case Stage::Done: return "done";
  }
  return "?";
}

inline Stage parse_stage(const std::string& s) {
  for (Stage st : {Stage::AwaitRents, Stage::AwaitBudget, Stage::AwaitRhoEquivalent, Stage::AwaitRhoSelfAssessment,
                   Stage::Done})
    if (s == stage_name(st)) return st;
  throw Error(ErrorCode::InvalidInput, "unknown stage", s);
}

/// 1: every rent weakly below budget. 2: rents differ and one is above budget.
/// 3: all rents equal and above budget.
inline int classify_case(const std::vector<Rational>& rents, const Rational& budget) {
  if (rents.empty()) throw Error(ErrorCode::InvalidInput, "no rents reported");
  if (std::all_of(rents.begin(), rents.end(), [&](const Rational& r) { return r <= budget; })) return 1;
  if (std::all_of(rents.begin(), rents.end(), [&](const Rational& r) { return r == rents.front(); })) return 3;
  return 2;
}

/// Rebate anchor: the smallest violation when every rent is above budget, 0 otherwise.
inline Rational rebate_anchor(const std::vector<Rational>& rents, const Rational& budget) {
  Rational low = *std::min_element(rents.begin(), rents.end());
  return low > budget ? Rational(low - budget) : Rational(0);
}

inline Rational snap_to_menu(const Rational& raw, const std::vector<Rational>& menu) {
  if (menu.empty()) throw Error(ErrorCode::InvalidInput, "empty rho menu");
  std::vector<Rational> sorted = menu;
  std::sort(sorted.begin(), sorted.end());
  Rational best = sorted.front();
  for (const Rational& r : sorted)
    if (abs_value(r - raw) < abs_value(best - raw)) best = r;
  return best;
}

/// Our convention for reading rho off a rebate-equivalence answer: a rebate of delta on a room
/// priced `overage` above budget is worth delta + rho * min(delta, overage). Snapped to the menu,
/// ties toward the smaller value.
inline Rational infer_rho(const Rational& equivalent, const Rational& delta, const Rational& overage,
                          const std::vector<Rational>& menu) {
  if (delta <= 0 || overage <= 0) throw Error(ErrorCode::InvalidInput, "rebate and overage must be positive");
  if (equivalent < delta)
    throw Error(ErrorCode::InvalidInput, "equivalent below the rebate itself", to_string(equivalent));
  const Rational base = delta < overage ? delta : overage;
  return snap_to_menu((equivalent - delta) / base, menu);
}

/// Raw, unsnapped value of the same formula.
inline Rational infer_rho_raw(const Rational& equivalent, const Rational& delta, const Rational& overage) {
  if (delta <= 0 || overage <= 0) throw Error(ErrorCode::InvalidInput, "rebate and overage must be positive");
  if (equivalent < delta)
    throw Error(ErrorCode::InvalidInput, "equivalent below the rebate itself", to_string(equivalent));
  return (equivalent - delta) / (delta < overage ? delta : overage);
}

struct SessionConfig {
  std::vector<std::string> agents;
  std::vector<std::string> rooms;
  Rational total_rent;
  std::vector<Rational> rho_menu{Rational(0)};
  Rational rho_bar = 0;
  std::optional<Rational> population_rho;  // case 3 statistic; menu median when absent
  Rational increment = 1;                  // smallest reportable rent difference

  Rational population_statistic() const {
    if (population_rho) return snap_to_menu(*population_rho, rho_menu);
    std::vector<Rational> sorted = rho_menu;
    std::sort(sorted.begin(), sorted.end());
    return sorted[(sorted.size() - 1) / 2];
  }

  void validate() const {
    if (agents.empty()) throw Error(ErrorCode::InvalidInput, "session has no agents");
    if (rooms.size() != agents.size()) throw Error(ErrorCode::InvalidInput, "number of rooms must equal number of agents");
    if (increment <= 0) throw Error(ErrorCode::InvalidInput, "increment must be positive");
    // Economy validation covers ids and the menu.
    std::vector<Preference> prefs(agents.size(), Preference{std::vector<Rational>(rooms.size(), Rational(0)), 0, 0});
    std::vector<Rational> menu = rho_menu;
    menu.push_back(Rational(0));
    Economy(agents, rooms, std::move(prefs), total_rent, std::move(menu), rho_bar);
  }
};

struct AgentAnswers {
  Stage stage = Stage::AwaitRents;
  std::optional<std::vector<Rational>> rents;
  std::optional<Rational> budget;
  int case_id = 0;
  std::optional<Rational> equivalent;
  std::optional<std::string> self_assessment;
  std::optional<Rational> rho;
  bool rho_unused = false;
};

struct Question {
  std::string agent;
  Stage stage = Stage::AwaitRents;
  std::string text;
  std::optional<Rational> min, max;         // allowed range for a single rational answer
  std::vector<Rational> options;            // menu-induced answers for the rebate question
  std::vector<std::string> choices;         // self-assessment answers
  std::optional<Rational> rebate, overage;  // rebate question parameters
  std::optional<Rational> rent_sum;         // rents question: required total
};

inline const std::vector<std::string>& self_assessment_choices() {
  static const std::vector<std::string> c{"less", "same", "more"};
  return c;
}

class ElicitationSession {
 public:
  ElicitationSession(std::string id, SessionConfig config) : id_(std::move(id)), config_(std::move(config)) {
    config_.validate();
    answers_.assign(config_.agents.size(), AgentAnswers{});
  }

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  const AgentAnswers& answers(std::size_t i) const { return answers_.at(i); }

  bool done() const {
    return std::all_of(answers_.begin(), answers_.end(), [](const AgentAnswers& a) { return a.stage == Stage::Done; });
  }

  /// First agent (in listing order) that still has a question.
  Question next_question() const {
    for (std::size_t i = 0; i < answers_.size(); ++i)
      if (answers_[i].stage != Stage::Done) return question_for(i);
    throw Error(ErrorCode::SessionDone, "session has no further questions", id_);
  }

  Question question_for(std::size_t i) const {
    const AgentAnswers& a = answers_.at(i);
    Question q;
    q.agent = config_.agents[i];
    q.stage = a.stage;
    switch (a.stage) {
      case Stage::AwaitRents:
        q.text = "Assign a rent to each room so that the rents add up to the total and you are indifferent "
                 "between all rooms at those rents.";
        q.rent_sum = config_.total_rent;
        break;
      case Stage::AwaitBudget:
        q.text = "What is your budget?";
        break;
      case Stage::AwaitRhoEquivalent: {
        const Rational delta = rebate(a), over = overage(a);
        q.rebate = delta;
        q.overage = over;
        q.text = "A rebate of " + to_string(delta) + " on your highest-rent room is worth how much to you, "
                 "counted as a rebate on your lowest-rent room?";
        const Rational base = delta < over ? delta : over;
        for (const Rational& r : config_.rho_menu) q.options.push_back(delta + r * base);
        std::sort(q.options.begin(), q.options.end());
        q.options.erase(std::unique(q.options.begin(), q.options.end()), q.options.end());
        q.min = delta;
        q.max = delta + config_.rho_bar * base;
        break;
      }
      case Stage::AwaitRhoSelfAssessment:
        q.text = "Compared to a typical roommate, how hard is it for you to pay above your budget?";
        q.choices = self_assessment_choices();
        break;
      case Stage::Done:
        throw Error(ErrorCode::SessionDone, "agent has answered every question", config_.agents[i]);
    }
    return q;
  }

  /// Records an answer for the agent's current stage and advances it.
  void answer(const std::string& agent, const Json& value) {
    const std::size_t i = agent_index(agent);
    AgentAnswers& a = answers_[i];
    switch (a.stage) {
      case Stage::AwaitRents: {
        std::vector<Rational> rents = parse_rents(value);
        Rational sum = 0;
        for (const Rational& r : rents) sum += r;
        if (sum != config_.total_rent)
          throw Error(ErrorCode::InvalidInput, "rents must add up to the total rent",
                      to_string(sum) + " != " + to_string(config_.total_rent));
        a.rents = std::move(rents);
        a.stage = Stage::AwaitBudget;
        return;
      }
      case Stage::AwaitBudget: {
        a.budget = rational_from_json(value);
        a.case_id = classify_case(*a.rents, *a.budget);
        if (a.case_id == 1) {
          a.rho = min_menu();
          a.rho_unused = true;
          a.stage = Stage::Done;
        } else {
          a.stage = a.case_id == 2 ? Stage::AwaitRhoEquivalent : Stage::AwaitRhoSelfAssessment;
        }
        return;
      }
      case Stage::AwaitRhoEquivalent: {
        const Rational e = rational_from_json(value);
        const Question q = question_for(i);
        if (e < *q.min || e > *q.max)
          throw Error(ErrorCode::InvalidInput, "answer outside the offered range",
                      to_string(e) + " not in [" + to_string(*q.min) + ", " + to_string(*q.max) + "]");
        a.equivalent = e;
        a.rho = infer_rho(e, *q.rebate, *q.overage, config_.rho_menu);
        a.stage = Stage::Done;
        return;
      }
      case Stage::AwaitRhoSelfAssessment: {
        if (!value.is_string()) throw Error(ErrorCode::InvalidInput, "self-assessment answer must be a string");
        const std::string s = value.get<std::string>();
        const auto& c = self_assessment_choices();
        if (std::find(c.begin(), c.end(), s) == c.end())
          throw Error(ErrorCode::InvalidInput, "self-assessment must be one of less, same, more", s);
        a.self_assessment = s;
        a.rho = self_assessed_rho(s);
        a.stage = Stage::Done;
        return;
      }
      case Stage::Done:
        throw Error(ErrorCode::SessionDone, "agent has answered every question", agent);
    }
  }

  /// Values from indifference rents: v_a = r_a + rho * max(0, r_a - b), i.e. every room gives
  /// utility 0 at the reported rents.
  Economy build_economy() const {
    if (!done()) throw Error(ErrorCode::Precondition, "elicitation is not finished", id_);
    std::vector<Preference> prefs;
    for (const AgentAnswers& a : answers_) {
      Preference p;
      p.budget = *a.budget;
      p.rho = *a.rho;
      for (const Rational& r : *a.rents) p.values.push_back(r > p.budget ? Rational(r + p.rho * (r - p.budget)) : r);
      prefs.push_back(std::move(p));
    }
    return Economy(config_.agents, config_.rooms, std::move(prefs), config_.total_rent, config_.rho_menu, config_.rho_bar);
  }

  Rational rebate(const AgentAnswers& a) const { return rebate_anchor(*a.rents, *a.budget) + config_.increment; }
  Rational overage(const AgentAnswers& a) const {
    return *std::max_element(a.rents->begin(), a.rents->end()) - *a.budget;
  }

  Json to_json() const {
    Json cfg{{"agents", config_.agents},
             {"rooms", config_.rooms},
             {"total_rent", rational_json(config_.total_rent)},
             {"rho_menu", rationals_json(config_.rho_menu)},
             {"rho_bar", rational_json(config_.rho_bar)},
             {"increment", rational_json(config_.increment)}};
    if (config_.population_rho) cfg["population_rho"] = rational_json(*config_.population_rho);
    Json agents = Json::array();
    for (std::size_t i = 0; i < answers_.size(); ++i) {
      const AgentAnswers& a = answers_[i];
      Json x{{"id", config_.agents[i]}, {"stage", stage_name(a.stage)}, {"case", a.case_id}, {"rho_unused", a.rho_unused}};
      if (a.rents) x["rents"] = rationals_json(*a.rents);
      if (a.budget) x["budget"] = rational_json(*a.budget);
      if (a.equivalent) x["equivalent"] = rational_json(*a.equivalent);
      if (a.self_assessment) x["self_assessment"] = *a.self_assessment;
      if (a.rho) x["rho"] = rational_json(*a.rho);
      agents.push_back(x);
    }
    return {{"id", id_}, {"config", cfg}, {"agents", agents}, {"done", done()}};
  }

  static SessionConfig config_from_json(const Json& j) {
    using namespace json_detail;
    SessionConfig c;
    auto ids = [](const Json& arr, const char* what) {
      if (!arr.is_array()) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be an array of ids");
      std::vector<std::string> out;
      for (const Json& x : arr) {
        if (!x.is_string()) throw Error(ErrorCode::InvalidInput, std::string(what) + " ids must be strings");
        out.push_back(x.get<std::string>());
      }
      return out;
    };
    c.agents = ids(field(j, "agents", "session"), "agents");
    c.rooms = ids(field(j, "rooms", "session"), "rooms");
    c.total_rent = rational_from_json(field(j, "total_rent", "session"));
    if (j.contains("rho_menu")) c.rho_menu = rationals_from_json(j["rho_menu"]);
    if (c.rho_menu.empty()) c.rho_menu.push_back(Rational(0));
    std::sort(c.rho_menu.begin(), c.rho_menu.end());
    c.rho_bar = j.contains("rho_bar") ? rational_from_json(j["rho_bar"]) : c.rho_menu.back();
    if (j.contains("population_rho")) c.population_rho = rational_from_json(j["population_rho"]);
    if (j.contains("increment")) c.increment = rational_from_json(j["increment"]);
    return c;
  }

  static ElicitationSession from_json(const Json& j) {
    using namespace json_detail;
    ElicitationSession s(string_field(j, "id", "session"), config_from_json(field(j, "config", "session")));
    const Json& agents = field(j, "agents", "session");
    if (!agents.is_array() || agents.size() != s.answers_.size())
      throw Error(ErrorCode::InvalidInput, "stored session does not list every agent");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const Json& x = agents[i];
      AgentAnswers& a = s.answers_[i];
      a.stage = parse_stage(string_field(x, "stage", "session agent"));
      a.case_id = x.value("case", 0);
      a.rho_unused = x.value("rho_unused", false);
      if (x.contains("rents")) a.rents = rationals_from_json(x["rents"]);
      if (x.contains("budget")) a.budget = rational_from_json(x["budget"]);
      if (x.contains("equivalent")) a.equivalent = rational_from_json(x["equivalent"]);
      if (x.contains("self_assessment")) a.self_assessment = x["self_assessment"].get<std::string>();
      if (x.contains("rho")) a.rho = rational_from_json(x["rho"]);
    }
    return s;
  }

 private:
  std::size_t agent_index(const std::string& agent) const {
    auto it = std::find(config_.agents.begin(), config_.agents.end(), agent);
    if (it == config_.agents.end()) throw Error(ErrorCode::UnknownId, "unknown agent id", agent);
    return static_cast<std::size_t>(it - config_.agents.begin());
  }

  Rational min_menu() const { return *std::min_element(config_.rho_menu.begin(), config_.rho_menu.end()); }

  Rational self_assessed_rho(const std::string& s) const {
    const Rational stat = config_.population_statistic();
    std::vector<Rational> menu = config_.rho_menu;
    std::sort(menu.begin(), menu.end());
    if (s == "less") {
      for (auto it = menu.rbegin(); it != menu.rend(); ++it)
        if (*it < stat) return *it;
    } else if (s == "more") {
      for (const Rational& r : menu)
        if (r > stat) return r;
    }
    return stat;
  }

  /// Either an array in room order or an object keyed by room id.
  std::vector<Rational> parse_rents(const Json& value) const {
    const std::size_t n = config_.rooms.size();
    std::vector<Rational> out;
    if (value.is_array()) {
      out = rationals_from_json(value);
    } else if (value.is_object()) {
      out.assign(n, Rational(0));
      for (auto it = value.begin(); it != value.end(); ++it) {
        auto r = std::find(config_.rooms.begin(), config_.rooms.end(), it.key());
        if (r == config_.rooms.end()) throw Error(ErrorCode::UnknownId, "unknown room id", it.key());
        out[static_cast<std::size_t>(r - config_.rooms.begin())] = rational_from_json(*it);
      }
      if (value.size() != n) out.clear();
    }
    if (out.size() != n) throw Error(ErrorCode::InvalidInput, "one rent per room required");
    return out;
  }

  std::string id_;
  SessionConfig config_;
  std::vector<AgentAnswers> answers_;
};

inline Json question_json(const Question& q) {
  Json out{{"agent", q.agent}, {"stage", stage_name(q.stage)}, {"text", q.text}};
  if (q.min) out["min"] = rational_json(*q.min);
  if (q.max) out["max"] = rational_json(*q.max);
  if (!q.options.empty()) out["options"] = rationals_json(q.options);
  if (!q.choices.empty()) out["choices"] = q.choices;
  if (q.rebate) out["rebate"] = rational_json(*q.rebate);
  if (q.overage) out["overage"] = rational_json(*q.overage);
  if (q.rent_sum) out["rent_sum"] = rational_json(*q.rent_sum);
  return out;
}

// ---------------------------------------------------------------------------
// Session storage

class SessionStore {
 public:
  virtual ~SessionStore() = default;
  virtual std::optional<Json> load(const std::string& id) = 0;
  virtual void save(const std::string& id, const Json& doc) = 0;
};

class MemoryStore : public SessionStore {
 public:
  std::optional<Json> load(const std::string& id) override {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = docs_.find(id);
    if (it == docs_.end()) return std::nullopt;
    return it->second;
  }
  void save(const std::string& id, const Json& doc) override {
    std::lock_guard<std::mutex> lock(mu_);
    docs_[id] = doc;
  }

 private:
  std::mutex mu_;
  std::map<std::string, Json> docs_;
};

/// One JSON file per session in a directory.
class FileStore : public SessionStore {
 public:
  explicit FileStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::optional<Json> load(const std::string& id) override {
    std::lock_guard<std::mutex> lock(mu_);
    std::ifstream in(path(id));
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str());
  }
  void save(const std::string& id, const Json& doc) override {
    std::lock_guard<std::mutex> lock(mu_);
    const auto tmp = path(id).string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << doc.dump(2);
    }
    std::filesystem::rename(tmp, path(id));
  }

 private:
  std::filesystem::path path(const std::string& id) const {
    for (char c : id)
      if (!std::isalnum(static_cast<unsigned char>(c))) throw Error(ErrorCode::InvalidInput, "malformed session id", id);
    return dir_ / (id + ".json");
  }

  std::mutex mu_;
  std::filesystem::path dir_;
};

/// Serializes access per session; separate sessions only share the store.
class SessionManager {
 public:
  explicit SessionManager(std::shared_ptr<SessionStore> store, std::uint64_t seed = std::random_device{}())
      : store_(std::move(store)), rng_(seed) {}

  ElicitationSession create(const Json& request) {
    SessionConfig cfg = ElicitationSession::config_from_json(request);
    std::string id;
    {
      std::lock_guard<std::mutex> lock(mu_);
      do {
        std::ostringstream os;
        os << std::hex << rng_();
        id = "s" + os.str();
      } while (store_->load(id));
    }
    ElicitationSession s(id, std::move(cfg));
    store_->save(id, s.to_json());
    return s;
  }

  /// Runs `fn` on the stored session under its lock and persists the result.
  template <class Fn>
  auto update(const std::string& id, Fn&& fn) {
    std::lock_guard<std::mutex> lock(lock_for(id));
    ElicitationSession s = get_unlocked(id);
    auto result = fn(s);
    store_->save(id, s.to_json());
    return result;
  }

  ElicitationSession get(const std::string& id) {
    std::lock_guard<std::mutex> lock(lock_for(id));
    return get_unlocked(id);
  }

 private:
  ElicitationSession get_unlocked(const std::string& id) {
    std::optional<Json> doc = store_->load(id);
    if (!doc) throw Error(ErrorCode::UnknownId, "unknown session id", id);
    return ElicitationSession::from_json(*doc);
  }

  std::mutex& lock_for(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto& p = locks_[id];
    if (!p) p = std::make_unique<std::mutex>();
    return *p;
  }

  std::shared_ptr<SessionStore> store_;
  std::mutex mu_;
  std::mt19937_64 rng_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace rentdiv
