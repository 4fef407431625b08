#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "beldec/records.hpp"

namespace beldec {

enum class RuleKind { Quadratic, Table, ConvexGenerated };

// A bounded scoring rule for a binary outcome, stored as its outcome-payoff
// pair: pay_on_one(r) is the payment when the outcome is 1, pay_on_zero(r)
// when it is 0. Payments lie in [0, beta]. The expected payment of report r
// under belief q is S(r, q) = pay_on_one(r)*q + pay_on_zero(r)*(1-q).
struct ScoringRule {
  RuleKind kind = RuleKind::Table;
  double beta = 1.0;
  std::function<double(double)> pay_on_one;
  std::function<double(double)> pay_on_zero;
  // Interior kinks of the payment curves (sorted). Grid searches add these as
  // candidate points so piecewise forms are optimized exactly.
  std::vector<double> breakpoints;
  // Set by constructors that know the rule is strictly proper.
  bool strict_hint = false;
};

// Payment magnitudes beta*(2r - r^2) on outcome 1 and beta*(1 - r^2) on
// outcome 0. Strictly proper; S(q,q) - S(q+e,q) = e^2*beta for every feasible q.
ScoringRule make_quadratic(double beta);

double expected_payment(const ScoringRule& rule, double report, double belief);

// Worst-case (over beliefs) utility a recommender gives up by shifting their
// report eps away from their belief:
//   cost(eps) = min over feasible q of S(q,q) - S(q+eps,q).
// Minimized on a uniform q-grid plus the rule's breakpoints, then refined.
double cost_of_lying(const ScoringRule& rule, double eps, double grid = 1e-3);

struct CostBoundCheck {
  double cost = 0;
  double bound = 0;  // eps^2 * beta / (1 - |eps|)
  bool holds = false;
};
// Checks cost_of_lying(eps) <= eps^2*beta/(1-|eps|) + tol, the ceiling no
// bounded rule can beat by more than the stated slack.
CostBoundCheck check_cost_upper_bound(const ScoringRule& rule, double eps, double tol = 1e-9,
                                      double grid = 1e-3);

struct TelescopingCheck {
  double sum = 0;           // sum of the per-step four-term expressions
  double max_gap = 0;       // largest adjacent gap in the sequence
  double bound_bracket = 0; // max_gap * telescoped payment bracket
  double bound_budget = 0;  // 2 * max_gap * beta
  bool holds = false;
};
// For a monotone sequence x_1..x_K, sums
//   S(x_k,x_k) - S(x_{k+1},x_k) + S(x_{k+1},x_{k+1}) - S(x_k,x_{k+1})
// over adjacent pairs and checks it against both closed-form ceilings. The
// bracket bound is met with equality when all gaps are equal.
TelescopingCheck telescoping_gap_sum(const ScoringRule& rule, std::span<const double> xs,
                                     double tol = 1e-9);

// Absolute residual of the exchange identity
//   S(x,x)-S(y,x)+S(y,y)-S(x,y) = (y-x)*(S(x,0)-S(y,0)-S(x,1)+S(y,1)),
// which holds for every outcome-payoff pair; expected to sit at float noise.
double scoring_identity_residual(const ScoringRule& rule, double x, double y);

struct PropernessCheck {
  bool proper = false;
  double worst_margin = 0;  // min over grid pairs of (S(q,q)-S(r,q)) / (r-q)^2
  double q = 0;             // minimizing pair
  double r = 0;
};
// Scans all grid pairs r != q and reports whether truth-telling beats every
// deviation with normalized margin above `margin`.
PropernessCheck is_proper(const ScoringRule& rule, double grid = 1e-3, double margin = 1e-9);

// Random bounded proper rule: integrates a random convex piecewise-linear
// potential (optionally mixed with quadratic curvature so the result is
// strictly proper) and normalizes payments to [0, beta]. Deterministic in seed.
ScoringRule make_random_convex_rule(double beta, uint64_t seed, bool strict_mix = false);

// Declarative text record: kind, beta, and payment-curve samples on a uniform
// grid. Non-quadratic rules deserialize as piecewise-linear interpolants of
// the samples; quadratic rules reconstruct their closed form.
Record scoring_to_record(const ScoringRule& rule, double sample_step = 0.015625);
ScoringRule scoring_from_record(const Record& rec);

}  // namespace beldec
