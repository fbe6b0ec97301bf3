#include <gtest/gtest.h>

#include "rentdiv/assignment.hpp"
#include "rentdiv/economy.hpp"
#include "rentdiv/graphs.hpp"
#include "rentdiv/lp.hpp"
#include "rentdiv/rational.hpp"

using namespace rentdiv;

namespace {

Rational q(std::int64_t p, std::int64_t d = 1) { return make_rational(p, d); }

Economy e1() {
  return Economy({"1", "2"}, {"a", "b"}, {{{q(100), q(60)}, q(0), q(0)}, {{q(80), q(70)}, q(0), q(0)}}, q(100),
                 {q(0)}, q(0));
}

Economy e2() {
  return Economy({"1", "2"}, {"a", "b"}, {{{q(100), q(60)}, q(60), q(1)}, {{q(80), q(70)}, q(0), q(0)}}, q(100),
                 {q(0), q(1)}, q(1));
}

}  // namespace

TEST(Rational, ParsesAndPrints) {
  EXPECT_EQ(parse_rational("3/6"), q(1, 2));
  EXPECT_EQ(parse_rational("-12.25"), q(-49, 4));
  EXPECT_EQ(parse_rational(" 7 "), q(7));
  EXPECT_EQ(to_string(q(-6, 4)), "-3/2");
  EXPECT_EQ(to_string(q(4, 2)), "2");
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
  EXPECT_THROW(parse_rational(""), Error);
}

TEST(Economy, UtilityIsKinkedAtBudget) {
  const Economy e = e2();
  EXPECT_EQ(eval_utility(e, "1", q(60), "a"), q(40));
  EXPECT_EQ(eval_utility(e, "1", q(70), "a"), q(20));
  EXPECT_EQ(eval_utility(e, "2", q(70), "a"), q(10));
  EXPECT_THROW(eval_utility(e, "1", q(0), "z"), Error);
  EXPECT_THROW(eval_utility(e, "9", q(0), "a"), Error);
}

TEST(Economy, RejectsMalformedInput) {
  EXPECT_THROW(Economy({"1"}, {"a", "b"}, {{{q(1), q(1)}, q(0), q(0)}}, q(0), {}, q(0)), Error);
  EXPECT_THROW(Economy({"1", "1"}, {"a", "b"}, {{{q(1), q(1)}, q(0), q(0)}, {{q(1), q(1)}, q(0), q(0)}}, q(0),
                       {}, q(0)),
               Error);
  EXPECT_THROW(Economy({"1"}, {"a"}, {{{q(1)}, q(-1), q(0)}}, q(0), {}, q(0)), Error);
  EXPECT_THROW(Economy({"1"}, {"a"}, {{{q(1)}, q(0), q(2)}}, q(0), {q(0), q(2)}, q(1)), Error);
  EXPECT_THROW(Economy({"1"}, {"a"}, {{{q(1)}, q(0), q(1)}}, q(0), {q(0)}, q(1)), Error);
}

TEST(Economy, RentForUtilityInvertsEval) {
  const Preference p{{q(100), q(60)}, q(60), q(1)};
  for (int target : {-30, 0, 20, 40, 55}) {
    Rational r = rent_for_utility(p, 0, q(target));
    EXPECT_EQ(eval_utility(p, r, 0), q(target));
  }
}

TEST(Graphs, EnvyFreenessAndWitness) {
  const Economy e = e1();
  EXPECT_TRUE(is_envy_free(e, Allocation{{0, 1}, {q(65), q(35)}}).envy_free);
  auto check = is_envy_free(e, Allocation{{0, 1}, {q(80), q(20)}});
  ASSERT_FALSE(check.envy_free);
  EXPECT_EQ(check.witness->envious, 0u);
  EXPECT_EQ(check.witness->envied, 1u);
  EXPECT_EQ(check.witness->gap, q(20));
  EXPECT_THROW(is_envy_free(e, Allocation{{0, 0}, {q(50), q(50)}}), Error);
}

TEST(Graphs, BudgetSetsAndLinearization) {
  const Economy e = e2();
  const std::vector<Rational> r{q(75), q(60)};
  BudgetSets literal = budget_sets(e, r);
  EXPECT_EQ(literal.strict_size(), 3u);  // agent 1 at a, agent 2 at a and b (budget 0)
  BudgetSets eff = effective_budget_sets(e, r);
  EXPECT_TRUE(eff.in_strict(0, 0));
  EXPECT_FALSE(eff.in_strict(0, 1));
  EXPECT_TRUE(eff.in_weak(0, 1));
  EXPECT_EQ(eff.strict_size(), 1u);

  Linearization down = linearize(e, r, Direction::Downward);
  EXPECT_EQ(down.lambda(0, 0), q(2));
  EXPECT_EQ(down.lambda(0, 1), q(1));
  EXPECT_EQ(down.nu(0, 0), q(160));
  Linearization up = linearize(e, r, Direction::Upward);
  EXPECT_EQ(up.lambda(0, 1), q(2));
}

TEST(Graphs, TieGraphAndReachability) {
  const Economy e = e2();
  Allocation z{{0, 1}, {q(85), q(75)}};
  TieGraph g = tie_graph(e, z);
  EXPECT_TRUE(g.has_edge(0, 0));
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_TRUE(g.has_edge(1, 1));
  EXPECT_EQ(g.weight(0, 0), q(2));
  EXPECT_EQ(*matching_weight(g, {0, 1}), q(2));
  EXPECT_FALSE(matching_weight(g, {1, 0}).has_value());

  EnvyGraph eg = envy_graph(e, z);
  auto paths = paths_to_set(eg, {0});
  ASSERT_TRUE(paths[1].has_value());
  EXPECT_EQ(*paths[1], (std::vector<AgentIndex>{1, 0}));
  auto none = paths_to_set(eg, {1});
  EXPECT_FALSE(none[0].has_value());

  EXPECT_THROW(tie_graph(e, Allocation{{0, 1}, {q(100), q(0)}}), Error);
}

TEST(Lp, TrivialCases) {
  LinearProgram lp;
  VarId x = lp.add_variable("x");
  lp.set_objective(Sense::Maximize, {{x, q(1)}});
  lp.add_constraint({{x, q(1)}}, Relation::LessEq, q(3));
  LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s[x], q(3));

  LinearProgram bad;
  VarId y = bad.add_variable("y");
  bad.add_constraint({{y, q(1)}}, Relation::LessEq, q(1));
  bad.add_constraint({{y, q(1)}}, Relation::GreaterEq, q(2));
  EXPECT_EQ(solve_lp(bad).status, LpStatus::Infeasible);

  LinearProgram open;
  VarId w = open.add_variable("w");
  open.set_objective(Sense::Minimize, {{w, q(1)}});
  EXPECT_EQ(solve_lp(open).status, LpStatus::Unbounded);

  EXPECT_THROW(lp.add_variable("x"), Error);
  LinearProgram dangling;
  dangling.set_objective(Sense::Maximize, {{VarId{4}, q(1)}});
  EXPECT_THROW(solve_lp(dangling), Error);
}

TEST(Lp, InitialMaxminProgramOnBudgetExample) {
  // V = ((80,60),(80,70)), sigma = (a,b), total 160.
  LinearProgram lp;
  VarId ra = lp.add_variable("r_a"), rb = lp.add_variable("r_b"), R = lp.add_variable("R");
  lp.set_objective(Sense::Maximize, {{R, q(1)}});
  lp.add_constraint({{R, q(1)}, {ra, q(2)}}, Relation::LessEq, q(160));
  lp.add_constraint({{R, q(1)}, {rb, q(1)}}, Relation::LessEq, q(70));
  lp.add_constraint({{ra, q(1)}, {rb, q(-1)}}, Relation::LessEq, q(20));
  lp.add_constraint({{ra, q(1)}, {rb, q(-1)}}, Relation::GreaterEq, q(10));
  lp.add_constraint({{ra, q(1)}, {rb, q(1)}}, Relation::Equal, q(160));
  LpSolution s = solve_lp(lp);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s[ra], q(85));
  EXPECT_EQ(s[rb], q(75));
  EXPECT_EQ(s.value, q(-10));
  for (const Constraint& c : lp.constraints()) EXPECT_TRUE(satisfied(c, s.point));
  EXPECT_NE(to_lp_format(lp).find("maximize"), std::string::npos);
}

TEST(Assignment, MaxSumWithLexicographicTies) {
  Matching m = max_sum_assignment(std::vector<std::vector<Rational>>{{q(100), q(60)}, {q(80), q(70)}});
  EXPECT_EQ(m.assignment, (std::vector<RoomIndex>{0, 1}));
  EXPECT_EQ(m.weight, q(170));
  Matching tie = max_sum_assignment(std::vector<std::vector<Rational>>{{q(1), q(1)}, {q(1), q(1)}});
  EXPECT_EQ(tie.assignment, (std::vector<RoomIndex>{0, 1}));
  Matching three = max_sum_assignment(
      std::vector<std::vector<Rational>>{{q(0), q(5), q(5)}, {q(5), q(0), q(5)}, {q(5), q(5), q(0)}});
  EXPECT_EQ(three.assignment, (std::vector<RoomIndex>{1, 2, 0}));
  EXPECT_EQ(three.weight, q(15));
}

TEST(Assignment, MaxTieMatchingUsesProducts) {
  TieGraph g{Square<char>(2, 1), Square<Rational>(2, q(1))};
  g.weight(0, 0) = q(2);
  g.weight(1, 1) = q(2);
  g.weight(0, 1) = q(3);
  g.weight(1, 0) = q(1);
  // 2*2 = 4 beats 3*1 = 3 though the sums tie.
  EXPECT_EQ(max_tie_matching(g).assignment, (std::vector<RoomIndex>{0, 1}));
  EXPECT_EQ(best_tie_matching(g, Direction::Upward).assignment, (std::vector<RoomIndex>{1, 0}));
  g.edges(0, 0) = 0;
  g.edges(0, 1) = 0;
  EXPECT_THROW(max_tie_matching(g), Error);
}
