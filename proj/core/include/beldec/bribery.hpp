#pragma once

#include <span>
#include <vector>

#include "beldec/agents.hpp"

namespace beldec {

// A point-mass belief of the briber about the recommenders: their beliefs
// q_1..q_n, carried with a mixture weight.
struct RecommenderProfile {
  std::vector<double> beliefs;
  double weight = 1.0;
};

// An outside party who values the action at `action_value` (d) and can offer
// each recommender a per-unit-of-pact transfer c_i on top of the mechanism.
struct BriberType {
  double action_value = 0.0;
  std::vector<RecommenderProfile> belief_profiles;
};

// Expected briber payoff (d - sum c_i) * pact(r*), averaged over the belief
// mixture; each r_i* is the recommender's best response to incentive c_i with
// the others pinned at their believed-truthful reports.
double briber_util(const MultiMechanism& mech, std::span<const double> bribes,
                   const BriberType& briber, double report_grid = 1e-4);

struct BribeSearch {
  std::vector<double> bribes;
  double value = 0;
};
// Grid search over bribe vectors in [0, cap]^n: exhaustive for n <= 2, the
// single-target and uniform families for larger n. Defaults: step d/200,
// cap d. Ties prefer the smaller total bribe, then lexicographic order.
BribeSearch optimal_bribe(const MultiMechanism& mech, const BriberType& briber, double c_step = 0,
                          double cap = 0, double report_grid = 1e-4);

struct BribeFreeCheck {
  bool bribe_free = false;
  double worst_gain = 0;  // max over the scanned lattice of util(c) - util(0)
  double worst_belief = 0;
  std::vector<double> worst_bribes;
};
// Strict bribe-freeness on a lattice: symmetric belief profiles q on a grid,
// bribe vectors from the same families as optimal_bribe with c > 0. A gain
// that is not below -margin (zero-gain bribes included) counts as a violation.
BribeFreeCheck is_bribe_free(const MultiMechanism& mech, double action_value, double q_step = 0.01,
                             double c_step = 0, double margin = 1e-9, double report_grid = 1e-4);

struct ConditionCheck {
  bool holds = false;
  double lhs = 0;
  double rhs = 0;
};

struct NecessaryCheck {
  bool holds = false;        // d * Delta^2 <= 8 * beta * max_pact
  double critical_bribe = 0; // bribe level that already pays when the check fails
};
// Necessary condition for bribe-freeness given decision sensitivity Delta,
// payment budget beta, briber value d, and the largest acting probability.
NecessaryCheck necessary_condition_single(double delta, double beta, double action_value,
                                          double max_pact);

// Sufficient condition: L^2 <= (beta/d) * min_pact for max uniform
// sensitivity L and the smallest acting probability.
ConditionCheck sufficient_condition_single(double slope, double beta, double action_value,
                                           double min_pact);

struct SufficientMulti {
  bool holds = false;
  double lhs = 0;  // sum of squared slopes
  double rhs = 0;  // (beta/d) * min_pact
  std::vector<double> budgets;  // per-recommender payment budgets, summing to beta
};
// Multi-recommender version: sum_j L_j^2 <= (beta/d) * min_pact, with the
// aggregate budget split as beta_i = beta * L_i^2 / sum_j L_j^2.
SufficientMulti sufficient_condition_multi(std::span<const double> slopes, double beta,
                                           double action_value, double min_pact);

}  // namespace beldec
