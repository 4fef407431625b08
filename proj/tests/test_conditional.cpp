#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "beldec/conditional.hpp"
#include "doctest.h"

using namespace beldec;

namespace {

double pact1(const RandomizedMechanism& mech, double r) {
  return mech_pact(mech, std::span<const double>(&r, 1));
}

double epay1(const RandomizedMechanism& mech, double r, int outcome) {
  return mech_epay(mech, 0, std::span<const double>(&r, 1), outcome);
}

RandomizedMechanism quad_affine_mech(double offset, double slope, int act_states = 64) {
  return make_unconditional({make_quadratic(1.0)}, make_affine_single(offset, slope), act_states);
}

}  // namespace

TEST_CASE("unconditional realization quantizes the action probability") {
  // pact(0.5) = 0.5 is a multiple of 1/64, so the realization is exact.
  RandomizedMechanism exact = quad_affine_mech(0.3, 0.4);
  CHECK(pact1(exact, 0.5) == 0.5);

  // pact(0.5) = 0.2 rounds up to 13/64 under the midpoint rule.
  RandomizedMechanism coarse = quad_affine_mech(0.0, 0.4);
  CHECK(pact1(coarse, 0.5) == doctest::Approx(13.0 / 64.0).epsilon(1e-15));

  // Payments ignore the state, so expected pay is the scoring payment.
  CHECK(epay1(coarse, 0.5, 1) == doctest::Approx(expected_payment(make_quadratic(1.0), 0.5, 1.0))
                                     .epsilon(1e-12));
  CHECK(coarse.budget == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(coarse.arity == 1);

  RandomizedMechanism pair =
      make_unconditional({make_quadratic(0.6), make_quadratic(0.4)}, make_constant(0.5, 2));
  CHECK(pair.budget == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_unconditional({}, make_constant(0.5)), std::invalid_argument);
  CHECK_THROWS_AS(make_unconditional({make_quadratic(1.0)}, make_constant(0.5, 2)),
                  std::invalid_argument);
}

TEST_CASE("evaluation validates reports, indices, and outcomes") {
  RandomizedMechanism mech = quad_affine_mech(0.0, 0.4);
  std::vector<double> two{0.5, 0.5};
  std::vector<double> bad{1.5};
  std::vector<double> ok{0.5};
  CHECK_THROWS_AS(mech_pact(mech, two), std::invalid_argument);
  CHECK_THROWS_AS(mech_pact(mech, bad), std::invalid_argument);
  CHECK_THROWS_AS(mech_epay(mech, 1, ok, 1), std::invalid_argument);
  CHECK_THROWS_AS(mech_epay(mech, 0, ok, 2), std::invalid_argument);
}

TEST_CASE("conditional-payment classification") {
  // Scoring payments depend on the outcome even when the action is off.
  CpfCheck plain = is_cpf(quad_affine_mech(0.0, 0.4));
  CHECK_FALSE(plain.conditional);
  CHECK(plain.worst_diff > 0.1);

  CpfCheck cpm = is_cpf(make_cpm(0.5, 2));
  CHECK(cpm.conditional);
  CHECK(cpm.worst_diff <= 1e-12);

  // Decoupling pays zero on the no-act branch, which is outcome-free.
  RandomizedMechanism outer = alpha_decouple(quad_affine_mech(0.0, 0.4), 0.25);
  CHECK(is_cpf(outer).conditional);
}

TEST_CASE("critical value of a deterministic threshold rule") {
  DecisionRule step = make_mean_threshold_step(0.5, 2);
  std::vector<double> high{0.8};
  CriticalValue low = cpm_critical_value(step, high);
  CHECK(low.crossed);
  CHECK(low.value == doctest::Approx(0.2).epsilon(1e-8));

  std::vector<double> lowothers{0.2};
  CriticalValue hi = cpm_critical_value(step, lowothers);
  CHECK(hi.crossed);
  CHECK(hi.value == doctest::Approx(0.8).epsilon(1e-8));

  // Threshold zero fires immediately; an unreachable threshold never does.
  CriticalValue at_zero = cpm_critical_value(make_mean_threshold_step(0.0, 1), {});
  CHECK(at_zero.crossed);
  CHECK(at_zero.value == 0.0);
  std::vector<double> small{0.3};
  CriticalValue never = cpm_critical_value(make_mean_threshold_step(0.9, 2), small);
  CHECK_FALSE(never.crossed);
  CHECK(never.value == 1.0);

  // Probabilistic rules have no critical value.
  CHECK_THROWS_AS(cpm_critical_value(make_affine_single(0.0, 0.4), {}), std::invalid_argument);
}

TEST_CASE("expected payment under outcome-dependent peer beliefs") {
  DecisionRule step = make_mean_threshold_step(0.5, 2);
  // Peers report 0.8 when the outcome will be 1 and 0.2 when it will be 0,
  // so the own-report critical values are x = 0.2 and y = 0.8.
  ConditionalBeliefPair pair{{0.2}, {0.8}, 1.0};

  CHECK(cpm_expected_pay_dependent(step, 0.1, pair, 0.5) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(cpm_expected_pay_dependent(step, 0.5, pair, 0.5) == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(cpm_expected_pay_dependent(step, 0.9, pair, 0.5) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("optimal reports against independent peers keep the decision truthful") {
  DecisionRule step = make_mean_threshold_step(0.5, 2);
  // Peers at 0.4 either way: own critical value is 0.6.
  ConditionalBeliefPair pair{{0.4}, {0.4}, 1.0};

  CpmReport above = cpm_optimal_report(step, pair, 0.8);
  CHECK(above.report == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(above.expected_pay == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(above.truthful_decision);

  CpmReport below = cpm_optimal_report(step, pair, 0.3);
  CHECK(below.report == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(below.expected_pay == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(below.truthful_decision);
}

TEST_CASE("optimal reports under dependent peers pin to the low critical value") {
  DecisionRule step = make_mean_threshold_step(0.5, 2);
  ConditionalBeliefPair pair{{0.2}, {0.8}, 1.0};

  double first = cpm_optimal_report(step, pair, 0.05).report;
  for (double q : {0.05, 0.5, 0.95}) {
    CpmReport best = cpm_optimal_report(step, pair, q);
    CHECK(best.report >= 0.2 - 1e-9);
    CHECK(best.report < 0.8);
    CHECK(best.report == doctest::Approx(first).epsilon(1e-9));
    CHECK(best.expected_pay == doctest::Approx(0.8 + 0.2 * q).epsilon(1e-8));
  }
}

TEST_CASE("decoupling keeps payments and lifts the action floor") {
  RandomizedMechanism inner = quad_affine_mech(0.0, 0.4);

  RandomizedMechanism outer = alpha_decouple(inner, 0.25);
  CHECK(outer.budget == doctest::Approx(inner.budget).epsilon(1e-12));
  for (double r = 0.0; r <= 1.0; r += 0.125) {
    CHECK(std::fabs(pact1(outer, r) - (0.25 + 0.75 * pact1(inner, r))) <= 1e-15);
    for (int o : {0, 1})
      CHECK(std::fabs(epay1(outer, r, o) - epay1(inner, r, o)) <= 1e-13);
  }

  // Exact quantized case: inner pact 0.5 maps to 0.25 + 0.75 * 0.5.
  RandomizedMechanism mid = alpha_decouple(quad_affine_mech(0.3, 0.4), 0.25);
  CHECK(pact1(mid, 0.5) == doctest::Approx(0.625).epsilon(1e-15));

  // alpha = 1 always acts and still pays the same.
  RandomizedMechanism always = alpha_decouple(inner, 1.0);
  for (double r = 0.0; r <= 1.0; r += 0.25) {
    CHECK(pact1(always, r) == 1.0);
    CHECK(std::fabs(epay1(always, r, 1) - epay1(inner, r, 1)) <= 1e-13);
  }

  CHECK_THROWS_AS(alpha_decouple(inner, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_decouple(inner, 1.5), std::invalid_argument);

  for (double alpha : {0.1, 0.25, 0.5, 1.0}) {
    DecouplingCheck chk = check_decoupling(inner, alpha_decouple(inner, alpha), alpha);
    CHECK(chk.holds);
    CHECK(chk.conditional);
    CHECK(chk.max_epay_diff <= 1e-12);
    CHECK(chk.max_pact_diff <= 1e-12);
  }
}

TEST_CASE("strict truthfulness of separable unconditional payments") {
  RandomizedMechanism mech =
      make_unconditional({make_quadratic(1.0), make_quadratic(1.0)}, make_constant(0.5, 2));

  TruthfulnessCheck all = strict_truthfulness_check(mech, BeliefDomain::All, Strictness::Strict);
  CHECK(all.holds);
  // Worst margin on a 0.1 lattice is beta * 0.1^2.
  CHECK(all.worst_margin >= 0.01 - 1e-9);

  TruthfulnessCheck ind =
      strict_truthfulness_check(mech, BeliefDomain::Independent, Strictness::Strict);
  CHECK(ind.holds);
}

TEST_CASE("threshold payments are only weakly truthful, and fail off-diagonal") {
  RandomizedMechanism cpm = make_cpm(0.5, 2);

  TruthfulnessCheck weak =
      strict_truthfulness_check(cpm, BeliefDomain::Independent, Strictness::Weak);
  CHECK(weak.holds);
  CHECK(weak.worst_margin >= -1e-12);

  TruthfulnessCheck strict =
      strict_truthfulness_check(cpm, BeliefDomain::Independent, Strictness::Strict);
  CHECK_FALSE(strict.holds);

  // Outcome-dependent peer reports create a strictly profitable deviation.
  TruthfulnessCheck all = strict_truthfulness_check(cpm, BeliefDomain::All, Strictness::Weak);
  CHECK_FALSE(all.holds);
  CHECK(all.worst_margin < -1e-3);
  CHECK(all.others_if_zero.size() == 1);
  CHECK(all.others_if_one.size() == 1);
  CHECK(all.report >= 0.0);
  CHECK(all.report <= 1.0);

  // Oversized lattices are rejected rather than scanned.
  RandomizedMechanism wide = make_cpm(0.5, 9);
  CHECK_THROWS_AS(strict_truthfulness_check(wide, BeliefDomain::All, Strictness::Weak),
                  std::invalid_argument);
}

TEST_CASE("mechanisms round-trip through their document form") {
  RandomizedMechanism uncond = quad_affine_mech(0.0, 0.4);
  RandomizedMechanism cpm = make_cpm(0.5, 2);
  RandomizedMechanism outer = alpha_decouple(uncond, 0.25);

  for (const RandomizedMechanism* mech : {&uncond, &cpm, &outer}) {
    Document doc = mechanism_to_document(*mech);
    RandomizedMechanism back = mechanism_from_document(doc);
    CHECK(back.arity == mech->arity);
    CHECK(back.budget == doctest::Approx(mech->budget).epsilon(1e-12));
    std::vector<double> probe(static_cast<size_t>(mech->arity), 0.0);
    for (double r = 0.0; r <= 1.0; r += 0.25) {
      std::fill(probe.begin(), probe.end(), r);
      CHECK(mech_pact(back, probe) == doctest::Approx(mech_pact(*mech, probe)).epsilon(1e-12));
      for (int o : {0, 1})
        for (int i = 0; i < mech->arity; ++i)
          CHECK(mech_epay(back, i, probe, o) ==
                doctest::Approx(mech_epay(*mech, i, probe, o)).epsilon(1e-12));
    }
  }

  RandomizedMechanism blank;
  CHECK_THROWS_AS(mechanism_to_document(blank), std::invalid_argument);

  Document unknown;
  unknown.add("mechanism").set("kind", "mystery");
  CHECK_THROWS_AS(mechanism_from_document(unknown), ConfigError);
}
