#pragma once

#include <functional>
#include <span>
#include <vector>

#include "beldec/agents.hpp"
#include "beldec/decision.hpp"
#include "beldec/records.hpp"
#include "beldec/scoring.hpp"

namespace beldec {

// A mechanism with finite internal randomness: states drawn with the listed
// probabilities, a binary act function, and one payment function per
// recommender. Expectations over the randomness are exact finite sums.
struct RandomizedMechanism {
  int arity = 1;
  std::vector<double> state_probs;
  std::function<int(std::span<const double>, int)> act;  // (reports, state) -> {0,1}
  std::vector<std::function<double(std::span<const double>, int, int)>> pay;  // (reports, outcome, state)
  double budget = 1.0;  // declared ceiling on the total expected payment
  Document description;  // declarative parts, kept for serialization
};

double mech_pact(const RandomizedMechanism& mech, std::span<const double> reports);
double mech_epay(const RandomizedMechanism& mech, int recommender, std::span<const double> reports,
                 int outcome);

// Scoring payments made unconditionally, with the acting probability realized
// by thresholding `act_states` equally likely internal draws.
RandomizedMechanism make_unconditional(std::vector<ScoringRule> scorings, DecisionRule decision,
                                       int act_states = 64);

// Critical-payment mechanism on a mean-threshold act: deterministic, pays
// outcome o when acting and each recommender's own critical value otherwise.
RandomizedMechanism make_cpm(double threshold, int arity);

// Forced-act transform: act unconditionally with probability alpha, otherwise
// run the inner mechanism with payments scaled by 1/alpha when the forced
// branch pays. Expected payments are preserved; pact becomes
// alpha + (1-alpha) * inner pact; the result pays conditionally on the action.
RandomizedMechanism alpha_decouple(const RandomizedMechanism& inner, double alpha);

struct CpfCheck {
  bool conditional = false;  // payments ignore the outcome whenever act = 0
  double worst_diff = 0;
  std::vector<double> worst_reports;
  int worst_state = 0;
  int worst_recommender = 0;
};
// Scans a product report grid and every internal state.
CpfCheck is_cpf(const RandomizedMechanism& mech, double grid = 0.25, double tol = 1e-12);

struct CriticalValue {
  double value = 1.0;
  bool crossed = false;  // false: act never fires, value pinned to 1
};
// Smallest own report that makes a deterministic act fire, holding the other
// reports fixed; found by bisection to 1e-9. Always-on acts return 0.
CriticalValue cpm_critical_value(const DecisionRule& act, std::span<const double> others);

// Expected critical-payment under an outcome-conditional profile of the
// others: they report pair.if_one when the outcome is 1, pair.if_zero when 0.
double cpm_expected_pay_dependent(const DecisionRule& act, double report,
                                  const ConditionalBeliefPair& pair, double belief);

struct CpmReport {
  double report = 0;
  double expected_pay = 0;
  bool truthful_decision = false;  // act at the optimum matches act at the belief
};
// Maximizes the expected critical-payment over reports. Plateau ties resolve
// to the smallest report; exact indifference between plateaus (boundary
// beliefs) is broken by an infinitesimally perturbed belief so the selection
// is stable in q.
CpmReport cpm_optimal_report(const DecisionRule& act, const ConditionalBeliefPair& pair,
                             double belief, double grid = 1e-3);

struct DecouplingCheck {
  bool holds = false;
  double max_epay_diff = 0;
  double max_pact_diff = 0;  // against alpha + (1-alpha) * inner pact
  bool conditional = false;  // outer mechanism passes is_cpf
};
DecouplingCheck check_decoupling(const RandomizedMechanism& inner, const RandomizedMechanism& outer,
                                 double alpha, double grid = 0.25, double tol = 1e-12);

enum class BeliefDomain { All, Independent };
enum class Strictness { Weak, Strict };

struct TruthfulnessCheck {
  bool holds = false;
  double worst_margin = 0;  // min over the lattice of E[truthful] - E[deviate]
  int recommender = 0;
  double belief = 0;
  double report = 0;
  std::vector<double> others_if_zero, others_if_one;
};
// Truthfulness of reported beliefs against outcome-conditional point-mass
// profiles of the other recommenders (the binding case; mixtures follow by
// linearity). Independent domain pins both conditional profiles equal.
// Strict mode demands margin > 1e-9 at every lattice point, weak mode allows
// exact ties.
TruthfulnessCheck strict_truthfulness_check(const RandomizedMechanism& mech, BeliefDomain domain,
                                            Strictness strictness, double q_grid = 0.1,
                                            double r_grid = 0.1, double margin = 1e-9);

// Declarative serialization of the mechanisms built above. Decoupled wrappers
// nest their inner description with an "inner_" section prefix.
Document mechanism_to_document(const RandomizedMechanism& mech);
RandomizedMechanism mechanism_from_document(const Document& doc);

}  // namespace beldec
