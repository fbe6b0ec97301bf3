#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "rentdiv/elicitation.hpp"
#include "rentdiv/json_io.hpp"
#include "rentdiv/oracle.hpp"
#include "rentdiv/service.hpp"

using namespace rentdiv;

namespace {

Rational q(std::int64_t p, std::int64_t d = 1) { return make_rational(p, d); }

const char* kE1 = R"({
  "agents": [
    {"id": "1", "values": {"a": "100", "b": "60"}, "budget": "0", "rho": "0"},
    {"id": "2", "values": {"a": "80", "b": "70"}, "budget": "0", "rho": "0"}
  ],
  "rooms": ["a", "b"], "total_rent": "100", "rho_menu": ["0"], "rho_bar": "0"
})";

Json session_request(std::vector<std::string> agents, std::vector<std::string> rooms, const char* total,
                     Json menu = Json::array({"0", "1/2", "1"})) {
  return {{"agents", agents}, {"rooms", rooms}, {"total_rent", total}, {"rho_menu", menu}};
}

ElicitationSession session(std::vector<std::string> agents, std::vector<std::string> rooms, const char* total,
                           Json menu = Json::array({"0", "1/2", "1"})) {
  return ElicitationSession("s1", ElicitationSession::config_from_json(session_request(agents, rooms, total, menu)));
}

}  // namespace

TEST(EconomyDocument, RoundTripsExactly) {
  const Economy e = economy_from_json(Json::parse(kE1));
  EXPECT_EQ(e.value(1, 1), q(70));
  EXPECT_EQ(economy_from_json(economy_json(e)), e);

  Json third = Json::parse(kE1);
  third["agents"][0]["values"]["a"] = "1/3";
  const Economy t = economy_from_json(third);
  EXPECT_EQ(t.value(0, 0), q(1, 3));
  EXPECT_EQ(economy_json(t)["agents"][0]["values"]["a"], "1/3");

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Economy r = random_economy(seed);
    EXPECT_EQ(economy_from_json(parse_json_text(economy_json(r).dump())), r);
  }
}

TEST(EconomyDocument, RejectsMalformedDocuments) {
  Json floats = Json::parse(kE1);
  floats["total_rent"] = 100.5;
  EXPECT_THROW(economy_from_json(floats), Error);
  Json empty = Json::parse(kE1);
  empty["agents"] = Json::array();
  empty["rooms"] = Json::array();
  EXPECT_THROW(economy_from_json(empty), Error);
  Json stray = Json::parse(kE1);
  stray["agents"][0]["values"]["z"] = "1";
  EXPECT_THROW(economy_from_json(stray), Error);
  Json missing = Json::parse(kE1);
  missing["agents"][1]["values"].erase("b");
  EXPECT_THROW(economy_from_json(missing), Error);
  EXPECT_THROW(parse_json_text("{"), Error);
}

TEST(EconomyDocument, AllocationRoundTrip) {
  const Economy e = economy_from_json(Json::parse(kE1));
  const Allocation z{{1, 0}, {q(7, 3), q(293, 3)}};
  EXPECT_EQ(allocation_from_json(e, allocation_json(e, z)), z);
  EXPECT_THROW(allocation_from_json(e, Json::parse(R"({"assignment": {"1": "a", "2": "a"}, "rents": {"a": "1", "b": "2"}})")),
               Error);
}

TEST(Elicitation, CaseClassification) {
  EXPECT_EQ(classify_case({q(500), q(300)}, q(400)), 2);
  EXPECT_EQ(classify_case({q(30), q(70)}, q(100)), 1);
  EXPECT_EQ(classify_case({q(400), q(400)}, q(300)), 3);
  EXPECT_EQ(classify_case({q(400), q(400)}, q(400)), 1);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int budget = 0; budget <= 4; ++budget) {
        const std::vector<Rational> r{q(a), q(b)};
        const int c = classify_case(r, q(budget));
        const bool all_below = a <= budget && b <= budget;
        EXPECT_EQ(c == 1, all_below);
        EXPECT_EQ(c == 3, !all_below && a == b);
        EXPECT_EQ(c == 2, !all_below && a != b);
      }
}

TEST(Elicitation, InferRho) {
  const std::vector<Rational> menu{q(0), q(1), q(2)};
  EXPECT_EQ(infer_rho_raw(q(202), q(101), q(100)), q(101, 100));
  EXPECT_EQ(infer_rho(q(202), q(101), q(100), menu), q(1));
  EXPECT_EQ(infer_rho(q(101), q(101), q(100), menu), q(0));
  EXPECT_EQ(infer_rho(q(101) + q(100) * q(2), q(101), q(100), menu), q(2));
  EXPECT_EQ(infer_rho(q(3, 2), q(1), q(100), menu), q(0));  // halfway ties toward smaller
  EXPECT_THROW(infer_rho(q(100), q(101), q(100), menu), Error);
}

TEST(Elicitation, MixedRentsAskRebateEquivalent) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "800");
  s.answer("1", Json::array({"500", "300"}));
  s.answer("1", "400");
  EXPECT_EQ(s.answers(0).case_id, 2);
  Question qn = s.next_question();
  EXPECT_EQ(qn.stage, Stage::AwaitRhoEquivalent);
  EXPECT_EQ(*qn.rebate, q(1));  // one rent is within budget, so the anchor is 0
  EXPECT_EQ(*qn.overage, q(100));
  EXPECT_EQ(qn.options, (std::vector<Rational>{q(1), q(3, 2), q(2)}));
  EXPECT_EQ(*qn.max, q(2));
  EXPECT_THROW(s.answer("1", "150"), Error);
  s.answer("1", "3/2");
  EXPECT_EQ(*s.answers(0).rho, q(1, 2));
  EXPECT_EQ(s.answers(0).stage, Stage::Done);
}

TEST(Elicitation, AllRentsAboveBudgetAnchorOnSmallestViolation) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "950");
  s.answer("1", Json::array({"500", "450"}));
  s.answer("1", "400");
  Question qn = s.next_question();
  EXPECT_EQ(*qn.rebate, q(51));
  EXPECT_EQ(*qn.overage, q(100));
  EXPECT_EQ(*qn.max, q(51) + q(51));
}

TEST(Elicitation, CaseOneAndCaseThree) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "100");
  s.answer("1", Json::array({"30", "70"}));
  s.answer("1", "100");
  EXPECT_EQ(s.answers(0).stage, Stage::Done);
  EXPECT_TRUE(s.answers(0).rho_unused);
  EXPECT_EQ(*s.answers(0).rho, q(0));
  EXPECT_THROW(s.answer("1", "5"), Error);

  ElicitationSession t = session({"1", "2"}, {"a", "b"}, "800");
  t.answer("1", Json{{"a", "400"}, {"b", "400"}});
  t.answer("1", "300");
  EXPECT_EQ(t.next_question().stage, Stage::AwaitRhoSelfAssessment);
  EXPECT_THROW(t.answer("1", "harder"), Error);
  t.answer("1", "more");
  EXPECT_EQ(*t.answers(0).rho, q(1));  // one step above the menu median 1/2
}

TEST(Elicitation, RentsMustAddUp) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "800");
  EXPECT_THROW(s.answer("1", Json::array({"500", "200"})), Error);
  EXPECT_THROW(s.answer("1", Json::array({"800"})), Error);
  EXPECT_THROW(s.answer("9", Json::array({"500", "300"})), Error);
  s.answer("1", Json::array({"500", "300"}));
}

TEST(Elicitation, IndifferenceRentsRebuildEconomy) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "100", Json::array({"0"}));
  s.answer("1", Json::array({"70", "30"}));
  s.answer("1", "100");
  EXPECT_THROW(s.build_economy(), Error);
  s.answer("2", Json::array({"55", "45"}));
  s.answer("2", "100");
  ASSERT_TRUE(s.done());
  EXPECT_THROW(s.next_question(), Error);
  const Economy e = s.build_economy();
  EXPECT_EQ(e.value(0, 0), q(70));
  SolveResult r = solve(e);
  EXPECT_TRUE(r.certificate.holds);
  EXPECT_EQ(r.allocation.rents, (std::vector<Rational>{q(125, 2), q(75, 2)}));
  EXPECT_TRUE(is_envy_free(e, Allocation{{0, 1}, {q(65), q(35)}}).envy_free);
}

TEST(Elicitation, BudgetValuesKeepIndifference) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "800", Json::array({"0", "1"}));
  s.answer("1", Json::array({"500", "300"}));
  s.answer("1", "400");
  s.answer("1", "2");
  s.answer("2", Json::array({"400", "400"}));
  s.answer("2", "500");
  const Economy e = s.build_economy();
  EXPECT_EQ(e.preference(0).rho, q(1));
  EXPECT_EQ(eval_utility(e.preference(0), q(500), 0), eval_utility(e.preference(0), q(300), 1));
  EXPECT_EQ(economy_from_json(economy_json(e)), e);
}

TEST(Elicitation, SessionPersistence) {
  ElicitationSession s = session({"1", "2"}, {"a", "b"}, "800");
  s.answer("1", Json::array({"500", "300"}));
  s.answer("1", "400");
  const ElicitationSession back = ElicitationSession::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());

  const auto dir = std::filesystem::temp_directory_path() / "rentdiv_store_test";
  std::filesystem::remove_all(dir);
  {
    SessionManager m(std::make_shared<FileStore>(dir), 7);
    const std::string id = m.create(session_request({"1"}, {"a"}, "10")).id();
    m.update(id, [](ElicitationSession& x) {
      x.answer("1", Json::array({"10"}));
      return 0;
    });
    SessionManager reopened(std::make_shared<FileStore>(dir), 8);
    EXPECT_EQ(reopened.get(id).answers(0).stage, Stage::AwaitBudget);
    EXPECT_THROW(reopened.get("nope"), Error);
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(session({}, {}, "10"), Error);
}

TEST(Service, SolveAndVerify) {
  Service svc;
  Response r = svc.handle("POST", "/v1/solve", std::string(R"({"economy": )") + kE1 + R"(, "trace": true})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["allocation"]["rents"]["a"], "65");
  EXPECT_TRUE(r.body["certificate"]["holds"].get<bool>());
  EXPECT_TRUE(r.body.contains("trace"));

  Response rent = svc.handle("POST", "/v1/solve", std::string(R"({"economy": )") + kE1 +
                                                     R"(, "objective": {"kind": "maxmin-rent"}})");
  EXPECT_EQ(rent.body["allocation"]["rents"]["b"], "45");

  Response v = svc.handle("POST", "/v1/verify", std::string(R"({"economy": )") + kE1 +
                                                    R"(, "allocation": {"assignment": {"1": "a", "2": "b"},
                                                        "rents": {"a": "60", "b": "40"}}})");
  ASSERT_EQ(v.status, 200);
  EXPECT_FALSE(v.body["holds"].get<bool>());
  EXPECT_EQ(v.body["failing_agent"], "1");
}

TEST(Service, ErrorsCarryStableCodes) {
  Service svc;
  Response bad = svc.handle("POST", "/v1/solve", "{");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["code"], "invalid_input");
  EXPECT_TRUE(bad.body.contains("message"));
  EXPECT_TRUE(bad.body.contains("detail"));
  EXPECT_EQ(svc.handle("GET", "/v1/sessions/abc/question", "").body["code"], "unknown_id");
  EXPECT_EQ(svc.handle("GET", "/v1/nowhere", "").status, 404);
  EXPECT_EQ(svc.handle("POST", "/v1/solve", R"({"economy": {"rooms": [], "agents": [], "total_rent": "0"}})").status, 400);
}

TEST(Service, ElicitationFlow) {
  Service svc;
  Response created = svc.handle("POST", "/v1/sessions", session_request({"1", "2"}, {"a", "b"}, "800").dump());
  ASSERT_EQ(created.status, 201);
  const std::string id = created.body["id"];
  const std::string base = "/v1/sessions/" + id;
  EXPECT_EQ(svc.handle("GET", base + "/question", "").body["stage"], "await_rents");
  auto answer = [&](const std::string& agent, Json value) {
    return svc.handle("POST", base + "/answer", Json{{"agent", agent}, {"value", value}}.dump());
  };
  EXPECT_EQ(answer("1", Json::array({"500", "200"})).status, 400);
  EXPECT_EQ(answer("1", Json::array({"500", "300"})).status, 200);
  EXPECT_EQ(answer("1", "400").body["question"]["stage"], "await_rho_equivalent");
  EXPECT_EQ(svc.handle("POST", base + "/solve", "{}").body["code"], "precondition_failed");
  EXPECT_EQ(answer("1", "2").status, 200);
  EXPECT_EQ(answer("2", Json::array({"450", "350"})).status, 200);
  Response last = answer("2", "1000");
  EXPECT_TRUE(last.body["done"].get<bool>());
  EXPECT_EQ(svc.handle("GET", base + "/question", "").body["code"], "session_done");
  EXPECT_EQ(answer("2", "5").status, 409);

  Response solved = svc.handle("POST", base + "/solve", "{}");
  ASSERT_EQ(solved.status, 200);
  EXPECT_TRUE(solved.body["certificate"]["holds"].get<bool>());
  EXPECT_EQ(solved.body["economy"]["agents"][0]["rho"], "1");
}

TEST(Service, ServesOverHttp) {
  Service svc;
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/solve", std::string(R"({"economy": )") + kE1 + "}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["value"], "35");
  auto missing = client.Get("/v1/sessions/zzz");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.stop();
  worker.join();
}
