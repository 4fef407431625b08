#include "beldec/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "beldec/optimize.hpp"

namespace beldec {

namespace {

void check_single(const SingleMechanism& mech) {
  if (mech.decision.arity != 1)
    throw std::invalid_argument("single-recommender mechanism needs an arity-1 decision rule");
}

void check_incentive(double c) {
  if (!(c >= 0)) throw std::invalid_argument("incentive must be >= 0");
}

// Candidate points where piecewise decision rules kink, so the report scan
// hits them exactly.
std::vector<double> report_candidates(const DecisionRule& decision, int index,
                                      std::span<const double> others) {
  std::vector<double> out;
  double n = static_cast<double>(decision.arity);
  double sum = 0;
  for (double r : others) sum += r;
  if (const auto* f = std::get_if<ClippedLinear>(&decision.form)) {
    if (f->slope > 0) {
      double b = f->slope * (sum / n - f->threshold);
      double a = f->slope / n;
      out.push_back((f->floor_prob - b) / a);
      out.push_back((1.0 - b) / a);
    }
  } else if (const auto* f = std::get_if<MeanThresholdStep>(&decision.form)) {
    double v = n * f->threshold - sum;
    out.push_back(v);
    out.push_back(v - 1e-12);
  } else if (const auto* f = std::get_if<PiecewiseTable>(&decision.form)) {
    out.insert(out.end(), f->knot_reports.begin(), f->knot_reports.end());
  }
  (void)index;
  return out;
}

}  // namespace

double se_util(const SingleMechanism& mech, double report, const RecommenderType& type) {
  check_single(mech);
  check_incentive(type.incentive);
  double pact = pact_eval(mech.decision, std::span<const double>(&report, 1));
  return expected_payment(mech.scoring, report, type.belief) + type.incentive * pact;
}

double optimal_report_coord(const ScoringRule& scoring, const DecisionRule& decision, int index,
                            std::span<const double> others, double belief, double incentive,
                            double grid) {
  if (index < 0 || index >= decision.arity) throw std::invalid_argument("index out of range");
  if (static_cast<int>(others.size()) != decision.arity - 1)
    throw std::invalid_argument("others must have arity-1 entries");
  check_incentive(incentive);
  if (!(grid > 0)) throw std::invalid_argument("grid must be > 0");

  std::vector<double> profile(static_cast<size_t>(decision.arity));
  for (int j = 0, k = 0; j < decision.arity; ++j)
    if (j != index) profile[static_cast<size_t>(j)] = others[static_cast<size_t>(k++)];

  auto util = [&](double r) {
    profile[static_cast<size_t>(index)] = r;
    return expected_payment(scoring, r, belief) + incentive * pact_eval(decision, profile);
  };
  std::vector<double> extras = report_candidates(decision, index, others);
  std::erase_if(extras, [](double x) { return !(x >= 0.0 && x <= 1.0); });
  return maximize_scalar(util, 0.0, 1.0, grid, extras).arg;
}

double optimal_report(const SingleMechanism& mech, const RecommenderType& type, double grid) {
  check_single(mech);
  return optimal_report_coord(mech.scoring, mech.decision, 0, {}, type.belief, type.incentive, grid);
}

ManipResult manipulability_single(const SingleMechanism& mech, double incentive, double report_grid,
                                  double belief_grid) {
  check_single(mech);
  check_incentive(incentive);
  if (!(belief_grid > 0)) throw std::invalid_argument("belief grid must be > 0");

  auto shift = [&](double q) {
    RecommenderType t{q, incentive, {}};
    double r = optimal_report(mech, t, report_grid);
    double pr = pact_eval(mech.decision, std::span<const double>(&r, 1));
    double pq = pact_eval(mech.decision, std::span<const double>(&q, 1));
    return std::abs(pr - pq);
  };
  std::vector<double> extras = report_candidates(mech.decision, 0, {});
  std::erase_if(extras, [](double x) { return !(x >= 0.0 && x <= 1.0); });
  ScanResult best = maximize_scalar(shift, 0.0, 1.0, belief_grid, extras);

  ManipResult out;
  out.manip = best.value;
  out.worst_belief = best.arg;
  out.worst_report = optimal_report(mech, RecommenderType{best.arg, incentive, {}}, report_grid);
  return out;
}

WitnessResult manipulation_witness(const ScoringRule& scoring, const std::function<double(double)>& T,
                                   double beta, double delta, double scan_grid) {
  if (!(beta > 0)) throw std::invalid_argument("manipulation_witness: beta must be > 0");
  if (!(delta > 0)) throw std::invalid_argument("manipulation_witness: delta must be > 0");

  ScanResult lo = minimize_scalar(T, 0.0, 1.0, scan_grid);
  ScanResult hi = maximize_scalar(T, 0.0, 1.0, scan_grid);
  if (hi.value - lo.value + 1e-12 < delta)
    throw std::invalid_argument("manipulation_witness: T never moves by delta");

  double eps = delta / (4.0 * beta);
  long steps = static_cast<long>(std::ceil(1.0 / eps));  // sequence has steps+1 points
  if (steps > 20'000'000)
    throw std::invalid_argument("manipulation_witness: delta too small for the sequence build");

  double x0 = lo.arg, x1 = hi.arg;
  auto point = [&](long k) {
    return x0 + (x1 - x0) * (static_cast<double>(k) / static_cast<double>(steps));
  };
  auto util = [&](double r, double q) { return expected_payment(scoring, r, q) + T(r); };

  WitnessResult out;
  out.bound = delta * delta / (8.0 * beta + 2.0 * delta);
  out.sequence_len = steps + 1;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < steps; ++k) {
    double q = point(k), r = point(k + 1);
    double gain = util(r, q) - util(q, q);
    if (gain > best_gain) {
      best_gain = gain;
      out.q = q;
      out.r = r;
    }
  }
  out.util_gain = best_gain;
  out.t_gap = T(out.r) - T(out.q);
  return out;
}

ManipBounds check_manip_bounds(const SingleMechanism& mech, double incentive, double tol) {
  check_single(mech);
  check_incentive(incentive);

  ManipBounds out;
  out.delta = sensitivity(mech.decision, 0, {});
  out.slope = uniform_sensitivity(mech.decision, 0, {}, 0.0, 1.0, SensMode::Max);
  out.manip = manipulability_single(mech, incentive).manip;
  out.lower = (incentive == 0.0 || out.delta == 0.0)
                  ? 0.0
                  : out.delta * out.delta / (8.0 * mech.scoring.beta / incentive + 2.0 * out.delta);
  out.upper = mech.scoring.kind == RuleKind::Quadratic
                  ? incentive * out.slope * out.slope / mech.scoring.beta
                  : std::numeric_limits<double>::infinity();
  out.lower_holds = out.lower <= out.manip + tol;
  out.upper_holds = out.manip <= out.upper + tol;
  return out;
}

}  // namespace beldec
