#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "beldec/bribery.hpp"
#include "doctest.h"

using namespace beldec;

namespace {

MultiMechanism one_agent(double beta, double offset, double slope) {
  return MultiMechanism{{make_quadratic(beta)}, make_affine_single(offset, slope)};
}

BriberType point_briber(double action_value, std::vector<double> beliefs) {
  return BriberType{action_value, {RecommenderProfile{std::move(beliefs), 1.0}}};
}

}  // namespace

TEST_CASE("briber payoff weighs the shifted action against the bribes paid") {
  // beta = 1, pact = 0.4 r, d = 100, belief 0: a bribe of 5 buys r* = 1,
  // so the briber nets (100 - 5) * 0.4 = 38.
  MultiMechanism mech = one_agent(1.0, 0.0, 0.4);
  BriberType briber = point_briber(100.0, {0.0});
  std::vector<double> five{5.0};
  CHECK(briber_util(mech, five, briber) == doctest::Approx(38.0).epsilon(1e-5));

  std::vector<double> zero{0.0};
  CHECK(briber_util(mech, zero, briber) == doctest::Approx(0.0).epsilon(1e-6));

  // Paying out more than the action is worth can never net a positive payoff.
  BriberType small = point_briber(1.0, {0.5});
  std::vector<double> heavy{2.0};
  CHECK(briber_util(mech, heavy, small) <= 0.0);

  std::vector<double> wrong_size{1.0, 1.0};
  CHECK_THROWS_AS(briber_util(mech, wrong_size, briber), std::invalid_argument);
  std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(briber_util(mech, negative, briber), std::invalid_argument);
  BriberType bad_profile{10.0, {RecommenderProfile{{0.5, 0.5}, 1.0}}};
  CHECK_THROWS_AS(briber_util(mech, zero, bad_profile), std::invalid_argument);
  BriberType bad_weight{10.0, {RecommenderProfile{{0.5}, 0.0}}};
  CHECK_THROWS_AS(briber_util(mech, zero, bad_weight), std::invalid_argument);
}

TEST_CASE("bribe search respects the cap and finds the profitable bribe") {
  MultiMechanism mech = one_agent(1.0, 0.0, 0.4);
  BriberType briber = point_briber(100.0, {0.0});

  BribeSearch best = optimal_bribe(mech, briber, 0.5, 10.0);
  REQUIRE(best.bribes.size() == 1);
  CHECK(best.bribes[0] <= 10.0 + 1e-12);
  // c = 5 already saturates r* = 1; anything larger just burns money.
  CHECK(best.bribes[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(best.value == doctest::Approx(38.0).epsilon(1e-5));

  // Against a well-funded mechanism the zero bribe is optimal.
  MultiMechanism stiff = one_agent(2.0, 0.2, 0.6);
  BriberType poor = point_briber(1.0, {0.5});
  BribeSearch none = optimal_bribe(stiff, poor, 0.05, 1.0);
  double total = 0;
  for (double c : none.bribes) total += c;
  CHECK(total <= 1e-12);

  CHECK_THROWS_AS(optimal_bribe(mech, briber, -0.1, 1.0), std::invalid_argument);
}

TEST_CASE("exhaustive scan certifies bribe-freeness for the funded mechanism") {
  // beta = 2, d = 1, pact = 0.2 + 0.6 r; coarse grids keep the scan quick.
  MultiMechanism mech = one_agent(2.0, 0.2, 0.6);
  BribeFreeCheck check = is_bribe_free(mech, 1.0, 0.05, 0.02);
  CHECK(check.bribe_free);
  CHECK(check.worst_gain <= 0.0);

  // The underfunded instance has a strictly profitable bribe.
  MultiMechanism weak = one_agent(1.0, 0.0, 0.4);
  BribeFreeCheck broken = is_bribe_free(weak, 100.0, 0.25, 1.0);
  CHECK_FALSE(broken.bribe_free);
  CHECK(broken.worst_gain > 1.0);
  REQUIRE(broken.worst_bribes.size() == 1);
  CHECK(broken.worst_bribes[0] > 0.0);

  CHECK_THROWS_AS(is_bribe_free(mech, -1.0, 0.05, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(is_bribe_free(mech, 1.0, 0.0, 0.02), std::invalid_argument);
}

TEST_CASE("necessary budget condition and the critical bribe level") {
  // d * Delta^2 = 100 * 0.16 = 16 > 8 * beta * max_pact = 3.2: bribable.
  NecessaryCheck broken = necessary_condition_single(0.4, 1.0, 100.0, 0.4);
  CHECK_FALSE(broken.holds);
  // (d*Delta^2 - 8*beta*max_pact) / (Delta^2 + 2*Delta*max_pact) = 12.8 / 0.48.
  CHECK(broken.critical_bribe == doctest::Approx(12.8 / 0.48).epsilon(1e-9));

  // At d = 20 the same mechanism passes with the boundary exactly met.
  NecessaryCheck boundary = necessary_condition_single(0.4, 1.0, 20.0, 0.4);
  CHECK(boundary.holds);
  CHECK(boundary.critical_bribe == 0.0);

  CHECK_THROWS_AS(necessary_condition_single(-0.1, 1.0, 1.0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(necessary_condition_single(0.4, 0.0, 1.0, 0.4), std::invalid_argument);
}

TEST_CASE("sufficient budget conditions, single and many recommenders") {
  // L^2 = 0.36 <= (beta/d) * min_pact = 2 * 0.2 = 0.4.
  ConditionCheck single = sufficient_condition_single(0.6, 2.0, 1.0, 0.2);
  CHECK(single.holds);
  CHECK(single.lhs == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(single.rhs == doctest::Approx(0.4).epsilon(1e-12));

  CHECK_FALSE(sufficient_condition_single(0.6, 2.0, 10.0, 0.2).holds);

  // Five slopes of 0.2: sum of squares 0.2 <= (1/1) * 0.25, split evenly.
  std::vector<double> slopes(5, 0.2);
  SufficientMulti multi = sufficient_condition_multi(slopes, 1.0, 1.0, 0.25);
  CHECK(multi.holds);
  CHECK(multi.lhs == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(multi.rhs == doctest::Approx(0.25).epsilon(1e-12));
  REQUIRE(multi.budgets.size() == 5);
  double total = 0;
  for (double b : multi.budgets) {
    CHECK(b == doctest::Approx(0.2).epsilon(1e-12));
    total += b;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // A single entry must agree with the single-recommender condition.
  std::vector<double> lone{0.6};
  SufficientMulti as_multi = sufficient_condition_multi(lone, 2.0, 1.0, 0.2);
  CHECK(as_multi.holds == single.holds);
  CHECK(as_multi.lhs == doctest::Approx(single.lhs).epsilon(1e-12));
  CHECK(as_multi.rhs == doctest::Approx(single.rhs).epsilon(1e-12));
  CHECK(as_multi.budgets[0] == doctest::Approx(2.0).epsilon(1e-12));

  std::vector<double> zeros(3, 0.0);
  CHECK_THROWS_AS(sufficient_condition_multi(zeros, 1.0, 1.0, 0.25), std::invalid_argument);
}

TEST_CASE("multi-recommender search finds no profitable bribe when funded") {
  std::vector<double> slopes(5, 0.2);
  SufficientMulti split = sufficient_condition_multi(slopes, 1.0, 1.0, 0.25);
  REQUIRE(split.holds);

  MultiMechanism mech;
  for (double b : split.budgets) mech.scorings.push_back(make_quadratic(b));
  mech.decision = make_clipped_linear(1.0, -0.25, 0.0, 5);

  BriberType briber{1.0, {}};
  for (double q : {0.1, 0.5, 0.9})
    briber.belief_profiles.push_back(RecommenderProfile{std::vector<double>(5, q), 1.0});

  BribeSearch best = optimal_bribe(mech, briber, 0.05, 1.0, 1e-3);
  double zero_value = briber_util(mech, std::vector<double>(5, 0.0), briber, 1e-3);
  double total = 0;
  for (double c : best.bribes) total += c;
  CHECK(total <= 1e-12);
  CHECK(best.value <= zero_value + 1e-9);
}
