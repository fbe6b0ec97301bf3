#pragma once

#include <memory>
#include <regex>
#include <string>
#include <utility>

#include <httplib.h>

#include "rentdiv/elicitation.hpp"
#include "rentdiv/json_io.hpp"
#include "rentdiv/solver.hpp"

namespace rentdiv {

struct Response {
  int status = 200;
  Json body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return 400;
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::Precondition: return 409;
    case ErrorCode::SessionDone: return 409;
    case ErrorCode::InternalInvariant: return 500;
  }
  return 500;
}

/// Solve with the certificate attached; an allocation that fails its own certificate is an
/// internal error and never reaches the caller.
inline Json certified_solve_json(const Economy& e, const Json& request) {
  const Objective obj = objective_from_json(e, request.value("objective", Json()));
  SolveResult r = solve(e, obj);
  if (!r.certificate.holds) throw Error(ErrorCode::InternalInvariant, "solver output failed its certificate");
  return solve_result_json(e, r, request.value("trace", false));
}

/// Transport-independent request handling; the HTTP server is a thin wrapper.
class Service {
 public:
  explicit Service(std::shared_ptr<SessionStore> store = std::make_shared<MemoryStore>())
      : sessions_(std::move(store)) {}

  Response handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, path, body);
    } catch (const Error& err) {
      return {http_status(err.code()), error_json(err)};
    } catch (const Json::exception& ex) {
      return {400, error_json(Error(ErrorCode::InvalidInput, "malformed request", ex.what()))};
    } catch (const std::exception& ex) {
      return {500, error_json(Error(ErrorCode::InternalInvariant, "unexpected failure", ex.what()))};
    }
  }

  /// Registers every route on an httplib server.
  void mount(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      Response r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Post(R"(/v1/.*)", forward);
    server.Get(R"(/v1/.*)", forward);
  }

 private:
  Response route(const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex session_re(R"(^/v1/sessions/([A-Za-z0-9]+)(/question|/answer|/solve)?$)");
    if (method == "GET" && path == "/v1/health") return {200, {{"status", "ok"}}};
    if (method == "POST" && path == "/v1/solve") {
      const Json req = parse_json_text(body);
      return {200, certified_solve_json(economy_from_json(json_detail::field(req, "economy", "request")), req)};
    }
    if (method == "POST" && path == "/v1/verify") {
      const Json req = parse_json_text(body);
      const Economy e = economy_from_json(json_detail::field(req, "economy", "request"));
      const Allocation z = allocation_from_json(e, json_detail::field(req, "allocation", "request"));
      validate_allocation(e, z, e.total_rent());
      const Objective obj = objective_from_json(e, req.value("objective", Json()));
      return {200, certificate_json(e, is_selection(e, z, obj))};
    }
    if (method == "POST" && path == "/v1/sessions") {
      ElicitationSession s = sessions_.create(parse_json_text(body));
      return {201, session_view(s)};
    }
    std::smatch m;
    if (std::regex_match(path, m, session_re)) {
      const std::string id = m[1], action = m[2];
      if (method == "GET" && action.empty()) return {200, session_view(sessions_.get(id))};
      if (method == "GET" && action == "/question") return {200, question_json(sessions_.get(id).next_question())};
      if (method == "POST" && action == "/answer") {
        const Json req = parse_json_text(body);
        if (!req.contains("value")) throw Error(ErrorCode::InvalidInput, "answer needs a 'value' field");
        Json view = sessions_.update(id, [&](ElicitationSession& s) {
          const std::string agent = req.contains("agent") ? req["agent"].get<std::string>() : s.next_question().agent;
          s.answer(agent, req["value"]);
          return session_view(s);
        });
        return {200, view};
      }
      if (method == "POST" && action == "/solve") {
        const Json req = body.empty() ? Json::object() : parse_json_text(body);
        const Economy e = sessions_.get(id).build_economy();
        Json out = certified_solve_json(e, req);
        out["economy"] = economy_json(e);
        return {200, out};
      }
    }
    throw Error(ErrorCode::UnknownId, "no such route", method + " " + path);
  }

  static Json session_view(const ElicitationSession& s) {
    Json out = s.to_json();
    if (!s.done()) out["question"] = question_json(s.next_question());
    return out;
  }

  SessionManager sessions_;
};

}  // namespace rentdiv
