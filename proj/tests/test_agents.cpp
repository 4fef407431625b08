#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "beldec/agents.hpp"
#include "doctest.h"

using namespace beldec;

namespace {

SingleMechanism quad_affine(double beta, double offset, double slope) {
  return SingleMechanism{make_quadratic(beta), make_affine_single(offset, slope)};
}

}  // namespace

TEST_CASE("reporting utility adds the action payoff to the proper score") {
  SingleMechanism mech = quad_affine(1.0, 0.0, 0.4);
  RecommenderType type{0.3, 0.5, {}};
  // S(0.3, 0.3) = 0.51*0.3 + 0.91*0.7 = 0.79, plus 0.5 * pact(0.3) = 0.06.
  CHECK(se_util(mech, 0.3, type) == doctest::Approx(0.85).epsilon(1e-12));
  // With no incentive the utility is just the proper score.
  RecommenderType flat{0.3, 0.0, {}};
  CHECK(se_util(mech, 0.5, flat) == doctest::Approx(expected_payment(mech.scoring, 0.5, 0.3))
                                         .epsilon(1e-12));
}

TEST_CASE("best response shifts the report by c*L/(2*beta) until it clips") {
  SingleMechanism mech = quad_affine(1.0, 0.0, 0.4);

  CHECK(optimal_report(mech, RecommenderType{0.3, 0.5, {}}) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(optimal_report(mech, RecommenderType{0.3, 0.0, {}}) == doctest::Approx(0.3).epsilon(1e-6));
  // Strong incentive pushes past the boundary and clips at 1.
  CHECK(optimal_report(mech, RecommenderType{0.95, 2.0, {}}) == doctest::Approx(1.0).epsilon(1e-6));

  // Scaling the payment budget shrinks the shift proportionally.
  SingleMechanism stiff = quad_affine(2.0, 0.0, 0.4);
  CHECK(optimal_report(stiff, RecommenderType{0.3, 0.5, {}}) ==
        doctest::Approx(0.35).epsilon(1e-6));
}

TEST_CASE("decision shift matches the closed form for linear action rules") {
  SingleMechanism mech = quad_affine(1.0, 0.0, 0.4);

  ManipResult shift = manipulability_single(mech, 0.5);
  // Shift in pact = L * c*L/(2*beta) = 0.4 * 0.1 = 0.04 at every interior belief.
  CHECK(shift.manip == doctest::Approx(0.04).epsilon(1e-6));
  CHECK(shift.worst_report ==
        doctest::Approx(shift.worst_belief + 0.1).epsilon(1e-6));

  CHECK(manipulability_single(mech, 0.0).manip <= 1e-6);

  SingleMechanism inert{make_quadratic(1.0), make_constant(0.3)};
  CHECK(manipulability_single(inert, 5.0).manip == 0.0);

  // More money on the table cannot shrink the induced shift.
  double low = manipulability_single(mech, 0.2).manip;
  double mid = manipulability_single(mech, 0.5).manip;
  double high = manipulability_single(mech, 1.0).manip;
  CHECK(low <= mid + 1e-9);
  CHECK(mid <= high + 1e-9);

  CHECK_THROWS_AS(manipulability_single(mech, -1.0), std::invalid_argument);
}

TEST_CASE("constructive witness certifies the lower-bound gap") {
  auto T = [](double r) { return 0.2 * r; };
  WitnessResult w = manipulation_witness(make_quadratic(1.0), T, 1.0, 0.2);

  CHECK(w.bound == doctest::Approx(0.04 / 8.4).epsilon(1e-12));
  CHECK(w.t_gap >= w.bound - 1e-12);
  CHECK(w.util_gain >= -1e-12);
  // Spacing delta/(4*beta) = 0.05 gives ceil(1/0.05)+1 = 21 sequence points.
  CHECK(w.sequence_len == 21);
  CHECK(w.q >= 0.0);
  CHECK(w.q <= 1.0);
  CHECK(w.r >= 0.0);
  CHECK(w.r <= 1.0);
  CHECK(w.t_gap == doctest::Approx(T(w.r) - T(w.q)).epsilon(1e-12));

  // The same argument works for a non-quadratic bounded proper rule.
  ScoringRule bent = make_random_convex_rule(1.5, 424242);
  WitnessResult w2 = manipulation_witness(bent, T, 1.5, 0.15);
  CHECK(w2.t_gap >= w2.bound - 1e-12);
  CHECK(w2.util_gain >= -1e-12);

  // A decision payoff that never moves by delta cannot be forced to shift.
  CHECK_THROWS_AS(manipulation_witness(make_quadratic(1.0), T, 1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(manipulation_witness(make_quadratic(1.0), T, 0.0, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(manipulation_witness(make_quadratic(1.0), T, 1.0, -0.1),
                  std::invalid_argument);
}

TEST_CASE("measured shift sits between the structural lower and upper bounds") {
  SingleMechanism mech = quad_affine(1.0, 0.0, 0.4);
  ManipBounds b = check_manip_bounds(mech, 0.5);

  CHECK(b.delta == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(b.slope == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(b.manip == doctest::Approx(0.04).epsilon(1e-6));
  // Lower bound 0.16 / (8/0.5 + 0.8) and quadratic upper bound c*L^2/beta.
  CHECK(b.lower == doctest::Approx(0.16 / 16.8).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(b.lower_holds);
  CHECK(b.upper_holds);

  // The sandwich stays valid across budgets and slopes.
  for (double beta : {0.5, 2.0}) {
    for (double slope : {0.1, 0.8}) {
      ManipBounds bb = check_manip_bounds(quad_affine(beta, 0.1, slope), 0.7);
      CHECK(bb.lower_holds);
      CHECK(bb.upper_holds);
    }
  }
}
