#pragma once

#include <span>
#include <variant>
#include <vector>

#include "beldec/records.hpp"

namespace beldec {

// Decision rules map a report profile in [0,1]^n to a probability of acting.
// All sensitivity quantities below are computed in closed form (piecewise
// tables via their knots), which is exact for every supported family.

// clamp(slope * (mean(r) - threshold), floor_prob, 1)
struct ClippedLinear {
  double slope = 1;
  double threshold = 0;
  double floor_prob = 0;
};

struct ConstantProb {
  double prob = 0;
};

// offset + slope * r, arity 1, kept exactly affine (no clipping); the
// constructor requires both endpoints to be valid probabilities.
struct AffineSingle {
  double offset = 0;
  double slope = 0;
};

// 1 iff mean(r) >= threshold. Deterministic; not strictly increasing.
struct MeanThresholdStep {
  double threshold = 0.5;
};

// Piecewise-linear interpolation through (report, probability) knots, arity 1.
struct PiecewiseTable {
  std::vector<double> knot_reports;
  std::vector<double> knot_probs;
};

struct DecisionRule {
  int arity = 1;
  std::variant<ClippedLinear, ConstantProb, AffineSingle, MeanThresholdStep, PiecewiseTable> form;
};

DecisionRule make_clipped_linear(double slope, double threshold, double floor_prob, int arity = 1);
DecisionRule make_constant(double prob, int arity = 1);
DecisionRule make_affine_single(double offset, double slope);
DecisionRule make_mean_threshold_step(double threshold, int arity = 1);
DecisionRule make_piecewise_table(std::vector<double> knot_reports, std::vector<double> knot_probs);

double pact_eval(const DecisionRule& rule, std::span<const double> reports);

// True for rules whose output is always exactly 0 or 1.
bool is_deterministic(const DecisionRule& rule);
// Step rules are flat with a jump, so they are not strictly increasing in any
// coordinate; probabilistic families with positive slope are.
bool is_strictly_increasing(const DecisionRule& rule);

// Largest change of pact attainable by moving coordinate `index` alone, with
// the remaining coordinates pinned at `others` (size arity-1).
double sensitivity(const DecisionRule& rule, int index, std::span<const double> others);

enum class SensMode { Max, Min };

// Extremal difference quotient sup/inf |pact(r') - pact(r)| / |r' - r| over
// distinct pairs in [lo, hi] for coordinate `index`. A jump inside the
// interval makes the Max mode infinite.
double uniform_sensitivity(const DecisionRule& rule, int index, std::span<const double> others,
                           double lo, double hi, SensMode mode);

// Others' reports conditioned on the outcome, used for dependent-belief
// analysis: the profile is if_one when the outcome is 1, if_zero otherwise.
struct ConditionalBeliefPair {
  std::vector<double> if_zero;
  std::vector<double> if_one;
  double weight = 1.0;
};

Record decision_to_record(const DecisionRule& rule);
DecisionRule decision_from_record(const Record& rec);

}  // namespace beldec
