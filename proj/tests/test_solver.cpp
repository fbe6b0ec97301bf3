#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rentdiv/json_io.hpp"
#include "rentdiv/oracle.hpp"
#include "rentdiv/solver.hpp"

using namespace rentdiv;

namespace {

Rational q(std::int64_t p, std::int64_t d = 1) { return make_rational(p, d); }

Economy e1(const Rational& m = make_rational(100)) {
  return Economy({"1", "2"}, {"a", "b"}, {{{q(100), q(60)}, q(0), q(0)}, {{q(80), q(70)}, q(0), q(0)}}, m, {q(0)},
                 q(0));
}

Economy e2() {
  return Economy({"1", "2"}, {"a", "b"}, {{{q(100), q(60)}, q(60), q(1)}, {{q(80), q(70)}, q(0), q(0)}}, q(100),
                 {q(0), q(1)}, q(1));
}

Economy single(const Rational& m) { return Economy({"1"}, {"a"}, {{{q(50)}, q(20), q(1)}}, m, {q(0), q(1)}, q(1)); }

Allocation alloc(std::vector<RoomIndex> sigma, std::vector<Rational> rents) {
  return Allocation{std::move(sigma), std::move(rents)};
}

Objective objective(ObjectiveKind k) { return Objective::of(k); }

}  // namespace

TEST(Selection, MaxminCertificate) {
  EXPECT_TRUE(is_maxmin(e1(), alloc({0, 1}, {q(65), q(35)})).holds);

  SelectionCertificate off = is_maxmin(e1(), alloc({0, 1}, {q(60), q(40)}));
  EXPECT_FALSE(off.holds);
  EXPECT_TRUE(off.envy_free);
  EXPECT_EQ(off.extremal, (std::vector<AgentIndex>{1}));
  EXPECT_EQ(off.failing_agent, std::optional<AgentIndex>(0));

  const Economy at130 = e2().with_total_rent(q(130));
  SelectionCertificate c = is_maxmin(at130, alloc({0, 1}, {q(70), q(60)}));
  EXPECT_FALSE(c.holds);
  EXPECT_EQ(c.value, q(10));
  EXPECT_TRUE(is_maxmin(at130, alloc({0, 1}, {q(220, 3), q(170, 3)})).holds);

  SelectionCertificate envious = is_maxmin(e1(), alloc({0, 1}, {q(80), q(20)}));
  EXPECT_FALSE(envious.envy_free);
  EXPECT_FALSE(envious.holds);
}

TEST(Selection, ObjectiveValidation) {
  Objective bad = objective(ObjectiveKind::MaxminUtility);
  bad.transform = {RentTransform{}, RentTransform{}};
  EXPECT_THROW(bad.validate(e1()), Error);
  Objective zero_beta = objective(ObjectiveKind::MaxminTransformedRent);
  zero_beta.transform = {RentTransform{q(0), q(0)}, RentTransform{}};
  EXPECT_THROW(zero_beta.validate(e1()), Error);
  EXPECT_EQ(parse_objective_kind("minmax-rent"), ObjectiveKind::MinmaxTransformedRent);
  EXPECT_THROW(parse_objective_kind("median"), Error);
}

TEST(Solver, StartingAllocationOnBudgetExample) {
  auto [M, z] = starting_allocation(e2());
  EXPECT_EQ(M, q(160));
  EXPECT_EQ(z.assignment, (std::vector<RoomIndex>{0, 1}));
  EXPECT_EQ(z.rents, (std::vector<Rational>{q(85), q(75)}));
}

TEST(Solver, StartingAllocationQuasiLinearAndSingleAgent) {
  auto [M, z] = starting_allocation(e1());
  EXPECT_EQ(M, q(100));  // spread 40, n * 40 = 80 < 100
  EXPECT_TRUE(is_maxmin(e1(), z).holds);
  auto [M1, z1] = starting_allocation(single(q(7)));
  EXPECT_EQ(M1, q(20));  // n * (spread 0 + budget 20)
  EXPECT_EQ(z1.rents, (std::vector<Rational>{q(20)}));
}

TEST(Solver, BudgetExampleTraceMatchesFixture) {
  const Economy e = e2();
  SolveResult r = solve(e);
  std::ifstream in(std::string(RENTDIV_FIXTURE_DIR) + "/e2_trace.json");
  ASSERT_TRUE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(trace_json(e, r.trace), Json::parse(ss.str()));

  ASSERT_EQ(r.trace.steps.size(), 2u);
  const TraceStep& first = r.trace.steps[0];
  EXPECT_EQ(first.lp_point, (std::vector<Rational>{q(70), q(60)}));
  EXPECT_EQ(first.branch, StepBranch::Corrected);
  EXPECT_EQ(first.rents, (std::vector<Rational>{q(75), q(60)}));
  EXPECT_EQ(first.budget_pairs_before, 2u);
  EXPECT_EQ(first.budget_pairs_after, 1u);
  EXPECT_EQ(r.allocation.rents, (std::vector<Rational>{q(190, 3), q(110, 3)}));
  EXPECT_EQ(utility_profile(e, r.allocation), (std::vector<Rational>{q(100, 3), q(100, 3)}));
  EXPECT_TRUE(check_progress(e, r.trace).ok);
  EXPECT_EQ(iteration_bound(e), 8u);
}

TEST(Solver, StartAtTargetTotalIsReturnedUnchanged) {
  const Allocation z = alloc({0, 1}, {q(65), q(35)});
  SolveResult r = descend_from(e1(), q(100), z);
  EXPECT_EQ(r.allocation, z);
  EXPECT_TRUE(r.trace.steps.empty());
}

TEST(Solver, QuasiLinearNeedsOnePass) {
  const Economy e = e1(q(10));
  SolveResult r = solve(e);
  EXPECT_LE(r.trace.steps.size(), 1u);
  OracleResult o = brute_force_maxmin(e);
  EXPECT_EQ(r.certificate.value, o.value);
}

TEST(Solver, EveryObjectiveOnWorkedExamples) {
  struct Case {
    Economy e;
    ObjectiveKind kind;
    Rational value;
  };
  const std::vector<Case> cases{
      {e1(), ObjectiveKind::MaxminUtility, q(35)},
      {e1(), ObjectiveKind::MaxminTransformedRent, q(45)},
      {e1(), ObjectiveKind::MinmaxUtility, q(35)},
      {e1(), ObjectiveKind::MinmaxTransformedRent, q(55)},
      {e2(), ObjectiveKind::MaxminUtility, q(100, 3)},
      {e2(), ObjectiveKind::MaxminTransformedRent, q(45)},
      {e2(), ObjectiveKind::MinmaxUtility, q(100, 3)},
      {e2(), ObjectiveKind::MinmaxTransformedRent, q(55)},
  };
  for (const Case& c : cases) {
    SCOPED_TRACE(objective_name(c.kind));
    SolveResult r = solve(c.e, objective(c.kind));
    EXPECT_TRUE(r.certificate.holds);
    EXPECT_EQ(r.certificate.value, c.value);
    EXPECT_EQ(brute_force_selection(c.e, objective(c.kind)).value, c.value);
    EXPECT_TRUE(check_progress(c.e, r.trace).ok);
  }
  EXPECT_EQ(solve(e1()).allocation.rents, (std::vector<Rational>{q(65), q(35)}));
  EXPECT_EQ(solve(e1(), objective(ObjectiveKind::MaxminTransformedRent)).allocation.rents,
            (std::vector<Rational>{q(55), q(45)}));
}

TEST(Solver, AffineRentTransform) {
  Objective obj = objective(ObjectiveKind::MaxminTransformedRent);
  obj.transform = {RentTransform{q(0), q(1)}, RentTransform{q(20), q(2)}};
  SolveResult r = solve(e1(), obj);
  EXPECT_TRUE(r.certificate.holds);
  EXPECT_EQ(r.certificate.value, brute_force_selection(e1(), obj).value);
}

TEST(Solver, SingleAgent) {
  SolveResult r = solve(single(q(30)));
  EXPECT_EQ(r.allocation.rents, (std::vector<Rational>{q(30)}));
  EXPECT_EQ(r.certificate.value, q(10));  // 50 - 30 - (30 - 20)
}

TEST(Noncompensation, WorkedExamples) {
  NoncompensationResult yes = has_noncompensation_ef(e1());
  EXPECT_TRUE(yes.exists);
  EXPECT_EQ(yes.witness.rents, (std::vector<Rational>{q(55), q(45)}));
  EXPECT_FALSE(has_noncompensation_ef(e1(q(-1000))).exists);
  EXPECT_TRUE(has_noncompensation_ef(single(q(0))).exists);
  EXPECT_FALSE(has_noncompensation_ef(single(q(-1))).exists);
}

TEST(Noncompensation, AgreesWithBruteForce) {
  GeneratorConfig cfg;
  cfg.max_agents = 4;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Economy e = random_economy(seed, cfg);
    OracleResult o = brute_force_selection(e, objective(ObjectiveKind::MaxminTransformedRent));
    EXPECT_EQ(has_noncompensation_ef(e).exists, o.value >= 0) << "seed " << seed;
  }
}

TEST(RebateStep, BudgetExample) {
  const Economy e = e2().with_total_rent(q(160));
  const Allocation z = alloc({0, 1}, {q(85), q(75)});
  const Allocation s = rebate_step(e, z, q(30));
  EXPECT_TRUE(is_envy_free(e, s).envy_free);
  EXPECT_GE(s.total(), q(130));
  EXPECT_LE(s.total(), q(160));
  EXPECT_GE(s.rents[1], q(60));
  EXPECT_EQ(rebate_step(e, z, q(0)), z);
  EXPECT_THROW(rebate_step(e, z, q(-1)), Error);
}

TEST(RebateStep, QuasiLinearReachesTarget) {
  const Allocation z = alloc({0, 1}, {q(65), q(35)});
  const Allocation s = rebate_step(e1(), z, q(500));
  EXPECT_EQ(s.total(), q(-400));
  EXPECT_TRUE(is_envy_free(e1(), s).envy_free);
}

TEST(Perturbation, LowerTotalsRaiseEveryUtility) {
  PerturbationReport r = check_h_maxmin_perturbation(e1(), alloc({0, 1}, {q(65), q(35)}), {q(0), q(1)});
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.cases[0].perturbed->rents, (std::vector<Rational>{q(65), q(35)}));
  EXPECT_EQ(r.cases[1].perturbed->rents, (std::vector<Rational>{q(129, 2), q(69, 2)}));
  EXPECT_EQ(utility_profile(e1(q(99)), *r.cases[1].perturbed), (std::vector<Rational>{q(71, 2), q(71, 2)}));

  const Economy e = e2();
  EXPECT_TRUE(check_h_maxmin_perturbation(e, solve(e).allocation, {q(3)}).ok);
  EXPECT_THROW(check_h_maxmin_perturbation(e1(), alloc({0, 1}, {q(60), q(40)}), {q(1)}), Error);
}

TEST(Perturbation, ConverseOnWorkedExamples) {
  EXPECT_THROW(check_converse_perturbation(e2(), alloc({0, 1}, {q(75), q(60)}), alloc({0, 1}, {q(190, 3), q(110, 3)})),
               Error);
  ConverseCheck c = check_converse_perturbation(e1(), alloc({0, 1}, {q(65), q(35)}), alloc({0, 1}, {q(129, 2), q(69, 2)}));
  EXPECT_TRUE(c.sigma_max_weight);
}

// A non-maximal assignment at an envy-free point: the converse perturbation hypotheses cannot
// be met, so no envy-free allocation with the same assignment has strictly lower rents.
TEST(Perturbation, ConverseNonMaximalAssignmentHasNoStrictDescent) {
  const Economy e({"1", "2", "3"}, {"a", "b", "c"},
                  {{{q(46), q(9), q(74)}, q(40), q(1, 2)},
                   {{q(49), q(3), q(78)}, q(20), q(1, 2)},
                   {{q(36), q(9), q(100)}, q(82), q(1, 2)}},
                  q(122), {q(0), q(1, 2)}, q(1, 2));
  const Allocation z = alloc({0, 1, 2}, {q(38), q(1), q(83)});
  ASSERT_TRUE(is_envy_free(e, z).envy_free);
  const TieGraph g = tie_graph(e, z);
  EXPECT_EQ(*matching_weight(g, z.assignment), q(3, 2));
  EXPECT_EQ(max_tie_matching(g).weight, q(9, 4));
  for (std::int64_t d : {1, 5, 20}) {
    const Rational total = q(122 - d);
    OracleQuery query{total, {}, {}, std::vector<std::vector<RoomIndex>>{z.assignment}};
    for (RoomIndex a = 0; a < 3; ++a) query.objective.push_back(OracleTerm::rent(a, q(-1), z.rents[a]));
    OracleResult r = brute_force(e.with_total_rent(total), query);
    EXPECT_TRUE(!r.feasible || r.value <= 0) << "d=" << d;
  }
}

TEST(Theta, EqualityCaseAndBudgetExample) {
  EXPECT_EQ(theta(e1()), q(1, 2));
  ThetaCheck c = check_theta_bound(e1(), 0, q(100), q(10));
  EXPECT_EQ(c.low, q(70));
  EXPECT_EQ(c.high, q(75));
  EXPECT_EQ(c.gain, q(5));
  EXPECT_EQ(c.required, q(5));
  EXPECT_TRUE(c.holds);

  EXPECT_EQ(theta(e2()), q(1, 32));
  for (std::int64_t l : {60, 100, 130, 160})
    for (std::int64_t eps : {1, 3, 10})
      for (RoomIndex a = 0; a < 2; ++a) EXPECT_TRUE(check_theta_bound(e2(), a, q(l), q(eps)).holds);

  ThetaCheck one = check_theta_bound(single(q(0)), 0, q(5), q(3));
  EXPECT_EQ(one.gain, q(3));
}

TEST(Oracle, AgreesWithSolverOnSeededEconomies) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Economy e = random_economy(seed);
    SolveResult r = solve(e);
    EXPECT_EQ(r.certificate.value, brute_force_maxmin(e).value) << "seed " << seed;
    EXPECT_TRUE(check_progress(e, r.trace).ok) << "seed " << seed;
  }
}

TEST(Oracle, TableAndSamples) {
  OracleResult o = brute_force_maxmin(e1(), true);
  ASSERT_EQ(o.table.size(), 2u);
  EXPECT_TRUE(o.table[0].feasible);
  EXPECT_FALSE(o.table[1].feasible);
  EXPECT_EQ(o.value, q(35));
  for (const Allocation& z : sample_envy_free(e2(), q(100))) EXPECT_TRUE(is_envy_free(e2(), z).envy_free);
  EXPECT_EQ(distance_to_envy_free(e1(), {q(80), q(20)}, q(100)), q(10));
  EXPECT_EQ(distance_to_envy_free(e1(), {q(60), q(40)}, q(100)), q(0));
}
