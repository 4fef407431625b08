#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "beldec/rng.hpp"
#include "beldec/scoring.hpp"

using namespace beldec;

namespace {

// Log rule clipped at payment 0 and normalized into [0,1].
ScoringRule make_clipped_log() {
  ScoringRule rule;
  rule.kind = RuleKind::Table;
  rule.beta = 1.0;
  rule.pay_on_one = [](double r) { return 1.0 + std::max(std::log(r), -4.0) / 4.0; };
  rule.pay_on_zero = [](double r) { return 1.0 + std::max(std::log(1.0 - r), -4.0) / 4.0; };
  rule.breakpoints = {std::exp(-4.0), 1.0 - std::exp(-4.0)};
  return rule;
}

// Direct fine-grid minimization of S(q,q) - S(q+eps,q), as an independent
// oracle for cost_of_lying.
double brute_cost(const ScoringRule& rule, double eps, double step) {
  double lo = std::max(0.0, -eps);
  double hi = std::min(1.0, 1.0 - eps);
  double best = std::numeric_limits<double>::infinity();
  for (double q = lo; q <= hi + 1e-15; q += step) {
    double qq = std::min(q, hi);
    double regret = expected_payment(rule, qq, qq) - expected_payment(rule, qq + eps, qq);
    best = std::min(best, regret);
  }
  return best;
}

}  // namespace

TEST_CASE("quadratic payments match the closed form") {
  ScoringRule one = make_quadratic(1.0);
  CHECK(expected_payment(one, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_payment(one, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(expected_payment(one, 0.5, 0.5) == doctest::Approx(0.75).epsilon(1e-12));

  ScoringRule two = make_quadratic(2.0);
  CHECK(two.pay_on_one(0.5) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(two.pay_on_zero(0.5) == doctest::Approx(1.5).epsilon(1e-12));

  CHECK_THROWS_AS(make_quadratic(0.0), std::invalid_argument);
  CHECK_THROWS_AS(expected_payment(one, 1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(expected_payment(one, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("quadratic regret is exactly beta times squared distance") {
  ScoringRule rule = make_quadratic(1.7);
  for (double q = 0; q <= 1.0 + 1e-12; q += 0.05) {
    for (double r = 0; r <= 1.0 + 1e-12; r += 0.05) {
      double qq = std::min(q, 1.0), rr = std::min(r, 1.0);
      double regret = expected_payment(rule, qq, qq) - expected_payment(rule, rr, qq);
      CHECK(regret == doctest::Approx(1.7 * (qq - rr) * (qq - rr)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cost of lying: quadratic attains eps^2 * beta") {
  for (double beta : {0.5, 1.0, 2.0}) {
    ScoringRule rule = make_quadratic(beta);
    for (double mag : {0.01, 0.05, 0.1, 0.3, 0.5}) {
      for (double eps : {mag, -mag}) {
        CHECK(cost_of_lying(rule, eps) ==
              doctest::Approx(eps * eps * beta).epsilon(1e-9));
      }
    }
  }
  CHECK(cost_of_lying(make_quadratic(1.0), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cost_of_lying(make_quadratic(2.0), -0.3) == doctest::Approx(0.18).epsilon(1e-9));
  CHECK_THROWS_AS(cost_of_lying(make_quadratic(1.0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_of_lying(make_quadratic(1.0), -1.2), std::invalid_argument);
}

TEST_CASE("cost of lying upper bound holds across rule families") {
  std::vector<ScoringRule> rules;
  rules.push_back(make_quadratic(1.0));
  rules.push_back(make_clipped_log());
  for (uint64_t s = 1; s <= 4; ++s) rules.push_back(make_random_convex_rule(1.0, s, s % 2 == 0));
  for (const ScoringRule& rule : rules) {
    for (double mag : {0.05, 0.2, 0.5}) {
      for (double eps : {mag, -mag}) {
        CostBoundCheck chk = check_cost_upper_bound(rule, eps);
        CAPTURE(eps);
        CHECK(chk.holds);
        CHECK(chk.bound == doctest::Approx(eps * eps * rule.beta / (1 - std::abs(eps))));
      }
    }
  }
}

TEST_CASE("cost of lying matches a brute-force oracle") {
  ScoringRule convex = make_random_convex_rule(1.0, 99);
  for (double eps : {0.2, -0.15}) {
    double fast = cost_of_lying(convex, eps);
    double brute = brute_cost(convex, eps, 1e-5);
    CHECK(fast <= brute + 1e-9);  // kink candidates reach the true minimum
    CHECK(fast >= brute - 1e-4);  // oracle grid itself is only 1e-5 wide
  }
  ScoringRule logr = make_clipped_log();
  double fast = cost_of_lying(logr, 0.2);
  double brute = brute_cost(logr, 0.2, 1e-5);
  CHECK(fast == doctest::Approx(brute).epsilon(1e-5));
  CHECK(check_cost_upper_bound(logr, 0.2).holds);
}

TEST_CASE("telescoping gap sums") {
  ScoringRule rule = make_quadratic(1.0);
  std::vector<double> xs = {0, 0.5, 1};
  TelescopingCheck chk = telescoping_gap_sum(rule, xs);
  // Each four-term block equals 2*beta*(y-x)^2, so the sum is 1.0 and both
  // bounds are attained with equality for uniform half-unit gaps.
  CHECK(chk.sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chk.max_gap == doctest::Approx(0.5));
  CHECK(chk.bound_bracket == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chk.bound_budget == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chk.holds);

  std::vector<double> down = {1, 0.5, 0};
  TelescopingCheck rev = telescoping_gap_sum(rule, down);
  CHECK(rev.sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rev.holds);

  std::vector<double> single = {0.3};
  TelescopingCheck one = telescoping_gap_sum(rule, single);
  CHECK(one.sum == 0.0);
  CHECK(one.holds);

  std::vector<double> bad = {0, 0.7, 0.3};
  CHECK_THROWS_AS(telescoping_gap_sum(rule, bad), std::invalid_argument);
  std::vector<double> outside = {0, 1.2};
  CHECK_THROWS_AS(telescoping_gap_sum(rule, outside), std::invalid_argument);
}

TEST_CASE("telescoping holds for random convex rules and sequences") {
  CounterRng rng(2024, 1);
  for (int k = 0; k < 40; ++k) {
    ScoringRule rule = make_random_convex_rule(rng.next_range(0.5, 2.0), 100 + k, k % 2 == 0);
    long len = 2 + static_cast<long>(rng.next_range(0, 8));
    std::vector<double> xs(static_cast<size_t>(len));
    for (double& x : xs) x = rng.next_double();
    std::sort(xs.begin(), xs.end());
    if (rng.next_bernoulli(0.5)) std::reverse(xs.begin(), xs.end());
    TelescopingCheck chk = telescoping_gap_sum(rule, xs);
    CAPTURE(k);
    CHECK(chk.holds);
  }
}

TEST_CASE("scoring identity residual vanishes") {
  ScoringRule quad = make_quadratic(1.0);
  CHECK(scoring_identity_residual(quad, 0.2, 0.7) <= 1e-12);
  CHECK(scoring_identity_residual(quad, 0.0, 1.0) <= 1e-12);
  CHECK_THROWS_AS(scoring_identity_residual(quad, 0.4, 0.4), std::invalid_argument);

  CounterRng rng(7, 2);
  for (int k = 0; k < 30; ++k) {
    ScoringRule rule = make_random_convex_rule(1.0, 500 + k, k % 3 == 0);
    double x = rng.next_double();
    double y = rng.next_double();
    if (x == y) continue;
    CHECK(scoring_identity_residual(rule, x, y) <= 1e-12);
  }
  CHECK(scoring_identity_residual(make_clipped_log(), 0.25, 0.8) <= 1e-12);
}

TEST_CASE("properness detection") {
  PropernessCheck quad = is_proper(make_quadratic(1.5));
  CHECK(quad.proper);
  CHECK(quad.worst_margin == doctest::Approx(1.5).epsilon(1e-6));

  ScoringRule reversed = make_quadratic(1.0);
  std::swap(reversed.pay_on_one, reversed.pay_on_zero);
  PropernessCheck rev = is_proper(reversed);
  CHECK_FALSE(rev.proper);
  CHECK(rev.worst_margin < 0);

  ScoringRule flat;
  flat.beta = 1.0;
  flat.pay_on_one = [](double) { return 0.5; };
  flat.pay_on_zero = [](double) { return 0.5; };
  CHECK_FALSE(is_proper(flat).proper);
}

TEST_CASE("random convex rules are bounded and weakly proper") {
  for (uint64_t s = 11; s < 17; ++s) {
    ScoringRule rule = make_random_convex_rule(1.3, s, s % 2 == 0);
    CHECK(rule.beta == 1.3);
    for (double r = 0; r <= 1.0 + 1e-12; r += 0.01) {
      double rr = std::min(r, 1.0);
      CHECK(rule.pay_on_one(rr) >= -1e-12);
      CHECK(rule.pay_on_one(rr) <= 1.3 + 1e-12);
      CHECK(rule.pay_on_zero(rr) >= -1e-12);
      CHECK(rule.pay_on_zero(rr) <= 1.3 + 1e-12);
    }
    PropernessCheck chk = is_proper(rule);
    CHECK(chk.worst_margin >= -1e-9);  // weakly proper: flat stretches allowed
  }
}

TEST_CASE("scoring serialization round-trips") {
  Record quad_rec = scoring_to_record(make_quadratic(2.5));
  ScoringRule quad = scoring_from_record(quad_rec);
  CHECK(quad.beta == 2.5);
  CHECK(expected_payment(quad, 0.3, 0.8) ==
        doctest::Approx(expected_payment(make_quadratic(2.5), 0.3, 0.8)).epsilon(1e-12));

  ScoringRule convex = make_random_convex_rule(1.0, 42);
  Record rec = scoring_to_record(convex, 1.0 / 128);
  ScoringRule back = scoring_from_record(rec);
  for (int k = 0; k <= 128; ++k) {
    double r = static_cast<double>(k) / 128;
    CHECK(back.pay_on_one(r) == doctest::Approx(convex.pay_on_one(r)).epsilon(1e-12));
    CHECK(back.pay_on_zero(r) == doctest::Approx(convex.pay_on_zero(r)).epsilon(1e-12));
  }

  Record bad;
  bad.set("kind", "quadratic");
  CHECK_THROWS_AS(scoring_from_record(bad), ConfigError);
}
