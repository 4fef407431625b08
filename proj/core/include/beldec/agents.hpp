#pragma once

#include <functional>
#include <span>
#include <vector>

#include "beldec/decision.hpp"
#include "beldec/scoring.hpp"

namespace beldec {

// A recommender: belief q about the binary outcome, plus a side incentive c
// per unit of acting probability. others_belief optionally carries a finite
// mixture of outcome-conditional profiles of the remaining recommenders.
struct RecommenderType {
  double belief = 0.5;
  double incentive = 0.0;
  std::vector<ConditionalBeliefPair> others_belief;
};

struct SingleMechanism {
  ScoringRule scoring;
  DecisionRule decision;  // arity 1
};

struct MultiMechanism {
  std::vector<ScoringRule> scorings;  // one per recommender
  DecisionRule decision;              // arity = scorings.size()
};

// Reporting utility S(r, q) + c * pact(r).
double se_util(const SingleMechanism& mech, double report, const RecommenderType& type);

// argmax of se_util: uniform grid scan plus ternary refinement in the best
// cell, ties toward the smallest report.
double optimal_report(const SingleMechanism& mech, const RecommenderType& type, double grid = 1e-4);

// Coordinate best response in a profile: maximizes S_i(r, q) + c * pact with
// the remaining coordinates pinned at `others`.
double optimal_report_coord(const ScoringRule& scoring, const DecisionRule& decision, int index,
                            std::span<const double> others, double belief, double incentive,
                            double grid = 1e-4);

struct ManipResult {
  double manip = 0;         // max over beliefs of |pact(r*(q,c)) - pact(q)|
  double worst_belief = 0;  // maximizing q
  double worst_report = 0;  // r*(worst_belief, c)
};
ManipResult manipulability_single(const SingleMechanism& mech, double incentive,
                                  double report_grid = 1e-4, double belief_grid = 1e-3);

// Constructive decision-shift witness. Builds the monotone sequence from
// argmin T to argmax T with spacing at most delta/(4*beta), applies the
// pigeonhole step to u(r, q) = S(r, q) + T(r), and returns the adjacent pair
// certifying a T-gap of at least delta^2 / (8*beta + 2*delta).
struct WitnessResult {
  double q = 0;          // belief at which deviating pays
  double r = 0;          // the profitable deviation
  double t_gap = 0;      // T(r) - T(q)
  double bound = 0;      // delta^2 / (8*beta + 2*delta)
  double util_gain = 0;  // u(r, q) - u(q, q), nonnegative
  long sequence_len = 0;
};
WitnessResult manipulation_witness(const ScoringRule& scoring, const std::function<double(double)>& T,
                                   double beta, double delta, double scan_grid = 1e-4);

// Sandwich check: lower = Delta^2 / (8*beta/c + 2*Delta) from the witness
// argument, upper = c*L^2/beta for quadratic payments (vacuous +inf for other
// rules), against the measured manipulability.
struct ManipBounds {
  double manip = 0;
  double lower = 0;
  double upper = 0;
  double delta = 0;  // sensitivity of the decision rule
  double slope = 0;  // max uniform sensitivity over [0,1]
  bool lower_holds = false;
  bool upper_holds = false;
};
ManipBounds check_manip_bounds(const SingleMechanism& mech, double incentive, double tol = 1e-6);

}  // namespace beldec
