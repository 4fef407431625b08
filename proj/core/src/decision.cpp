#include "beldec/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beldec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_prob(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

double mean_of(std::span<const double> reports) {
  double s = 0;
  for (double r : reports) s += r;
  return s / static_cast<double>(reports.size());
}

}  // namespace

DecisionRule make_clipped_linear(double slope, double threshold, double floor_prob, int arity) {
  if (!(slope >= 0)) throw std::invalid_argument("clipped_linear: slope must be >= 0");
  if (!std::isfinite(threshold)) throw std::invalid_argument("clipped_linear: threshold must be finite");
  require_prob(floor_prob, "clipped_linear floor_prob");
  if (arity < 1) throw std::invalid_argument("clipped_linear: arity must be >= 1");
  return DecisionRule{arity, ClippedLinear{slope, threshold, floor_prob}};
}

DecisionRule make_constant(double prob, int arity) {
  require_prob(prob, "constant prob");
  if (arity < 1) throw std::invalid_argument("constant: arity must be >= 1");
  return DecisionRule{arity, ConstantProb{prob}};
}

DecisionRule make_affine_single(double offset, double slope) {
  require_prob(offset, "affine_single offset");
  require_prob(offset + slope, "affine_single offset + slope");
  return DecisionRule{1, AffineSingle{offset, slope}};
}

DecisionRule make_mean_threshold_step(double threshold, int arity) {
  require_prob(threshold, "mean_threshold_step threshold");
  if (arity < 1) throw std::invalid_argument("mean_threshold_step: arity must be >= 1");
  return DecisionRule{arity, MeanThresholdStep{threshold}};
}

DecisionRule make_piecewise_table(std::vector<double> knot_reports, std::vector<double> knot_probs) {
  if (knot_reports.size() != knot_probs.size() || knot_reports.size() < 2)
    throw std::invalid_argument("piecewise_table: need >= 2 aligned knots");
  if (knot_reports.front() != 0.0 || knot_reports.back() != 1.0)
    throw std::invalid_argument("piecewise_table: knots must span [0,1]");
  for (size_t k = 0; k + 1 < knot_reports.size(); ++k)
    if (!(knot_reports[k] < knot_reports[k + 1]))
      throw std::invalid_argument("piecewise_table: knot reports must be strictly increasing");
  for (double p : knot_probs) require_prob(p, "piecewise_table prob");
  return DecisionRule{1, PiecewiseTable{std::move(knot_reports), std::move(knot_probs)}};
}

double pact_eval(const DecisionRule& rule, std::span<const double> reports) {
  if (static_cast<int>(reports.size()) != rule.arity)
    throw std::invalid_argument("pact_eval: report count does not match arity");
  for (double r : reports) require_prob(r, "report");

  if (const auto* f = std::get_if<ClippedLinear>(&rule.form))
    return std::min(std::max(f->slope * (mean_of(reports) - f->threshold), f->floor_prob), 1.0);
  if (const auto* f = std::get_if<ConstantProb>(&rule.form)) return f->prob;
  if (const auto* f = std::get_if<AffineSingle>(&rule.form)) return f->offset + f->slope * reports[0];
  if (const auto* f = std::get_if<MeanThresholdStep>(&rule.form))
    return mean_of(reports) >= f->threshold ? 1.0 : 0.0;
  const auto& t = std::get<PiecewiseTable>(rule.form);
  double x = reports[0];
  size_t j = static_cast<size_t>(std::upper_bound(t.knot_reports.begin(), t.knot_reports.end(), x) -
                                 t.knot_reports.begin());
  if (j > 0) --j;
  j = std::min(j, t.knot_reports.size() - 2);
  double w = (x - t.knot_reports[j]) / (t.knot_reports[j + 1] - t.knot_reports[j]);
  return t.knot_probs[j] + w * (t.knot_probs[j + 1] - t.knot_probs[j]);
}

bool is_deterministic(const DecisionRule& rule) {
  if (std::holds_alternative<MeanThresholdStep>(rule.form)) return true;
  if (const auto* f = std::get_if<ConstantProb>(&rule.form)) return f->prob == 0.0 || f->prob == 1.0;
  return false;
}

bool is_strictly_increasing(const DecisionRule& rule) {
  if (const auto* f = std::get_if<AffineSingle>(&rule.form)) return f->slope > 0;
  if (const auto* f = std::get_if<PiecewiseTable>(&rule.form)) {
    for (size_t k = 0; k + 1 < f->knot_probs.size(); ++k)
      if (!(f->knot_probs[k + 1] > f->knot_probs[k])) return false;
    return true;
  }
  if (const auto* f = std::get_if<ClippedLinear>(&rule.form)) {
    // Strict only when neither clip is ever active on the report domain.
    return f->slope > 0 && f->slope * (0.0 - f->threshold) >= f->floor_prob &&
           f->slope * (1.0 - f->threshold) <= 1.0;
  }
  return false;
}

namespace {

void check_coord_args(const DecisionRule& rule, int index, std::span<const double> others) {
  if (index < 0 || index >= rule.arity) throw std::invalid_argument("coordinate index out of range");
  if (static_cast<int>(others.size()) != rule.arity - 1)
    throw std::invalid_argument("others must have arity-1 entries");
  for (double r : others) require_prob(r, "others report");
}

double sum_of(std::span<const double> xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace

double sensitivity(const DecisionRule& rule, int index, std::span<const double> others) {
  check_coord_args(rule, index, others);
  double n = static_cast<double>(rule.arity);

  if (const auto* f = std::get_if<ClippedLinear>(&rule.form)) {
    double base = f->slope * ((sum_of(others)) / n - f->threshold);
    double at0 = std::min(std::max(base, f->floor_prob), 1.0);
    double at1 = std::min(std::max(base + f->slope / n, f->floor_prob), 1.0);
    return at1 - at0;
  }
  if (std::holds_alternative<ConstantProb>(rule.form)) return 0.0;
  if (const auto* f = std::get_if<AffineSingle>(&rule.form)) return std::abs(f->slope);
  if (const auto* f = std::get_if<MeanThresholdStep>(&rule.form)) {
    double v = n * f->threshold - sum_of(others);  // act iff r_index >= v
    return (v > 0.0 && v <= 1.0) ? 1.0 : 0.0;
  }
  const auto& t = std::get<PiecewiseTable>(rule.form);
  auto [mn, mx] = std::minmax_element(t.knot_probs.begin(), t.knot_probs.end());
  return *mx - *mn;
}

double uniform_sensitivity(const DecisionRule& rule, int index, std::span<const double> others,
                           double lo, double hi, SensMode mode) {
  check_coord_args(rule, index, others);
  require_prob(lo, "interval lo");
  require_prob(hi, "interval hi");
  if (!(hi > lo)) throw std::invalid_argument("uniform_sensitivity: interval must have width > 0");
  double n = static_cast<double>(rule.arity);

  if (std::holds_alternative<ConstantProb>(rule.form)) return 0.0;
  if (const auto* f = std::get_if<AffineSingle>(&rule.form)) return std::abs(f->slope);

  if (const auto* f = std::get_if<ClippedLinear>(&rule.form)) {
    double a = f->slope / n;
    if (a == 0.0 || f->floor_prob == 1.0) return 0.0;
    double b = f->slope * (sum_of(others) / n - f->threshold);
    double enter = (f->floor_prob - b) / a;  // leaves the floor here
    double cap = (1.0 - b) / a;              // hits the cap here
    double lin_lo = std::max(lo, enter);
    double lin_hi = std::min(hi, cap);
    bool linear_part = lin_hi > lin_lo;
    if (mode == SensMode::Max) return linear_part ? a : 0.0;
    bool flat_part = lo < std::min(enter, hi) || hi > std::max(cap, lo);
    return flat_part ? 0.0 : a;
  }

  if (const auto* f = std::get_if<MeanThresholdStep>(&rule.form)) {
    double v = n * f->threshold - sum_of(others);
    bool jump_inside = v > lo && v <= hi;
    if (mode == SensMode::Max) return jump_inside ? kInf : 0.0;
    return 0.0;
  }

  const auto& t = std::get<PiecewiseTable>(rule.form);
  double best_max = 0.0;
  double best_min = kInf;
  bool has_pos = false, has_neg = false;
  for (size_t k = 0; k + 1 < t.knot_reports.size(); ++k) {
    double seg_lo = std::max(t.knot_reports[k], lo);
    double seg_hi = std::min(t.knot_reports[k + 1], hi);
    if (!(seg_hi > seg_lo)) continue;
    double s = (t.knot_probs[k + 1] - t.knot_probs[k]) / (t.knot_reports[k + 1] - t.knot_reports[k]);
    best_max = std::max(best_max, std::abs(s));
    best_min = std::min(best_min, std::abs(s));
    if (s > 0) has_pos = true;
    if (s < 0) has_neg = true;
  }
  if (mode == SensMode::Max) return best_max;
  if (has_pos && has_neg) return 0.0;  // a level is crossed twice, so some pair ties
  return best_min == kInf ? 0.0 : best_min;
}

namespace {

const char* form_name(const DecisionRule& rule) {
  if (std::holds_alternative<ClippedLinear>(rule.form)) return "clipped_linear";
  if (std::holds_alternative<ConstantProb>(rule.form)) return "constant";
  if (std::holds_alternative<AffineSingle>(rule.form)) return "affine_single";
  if (std::holds_alternative<MeanThresholdStep>(rule.form)) return "mean_threshold_step";
  return "piecewise_linear_table";
}

}  // namespace

Record decision_to_record(const DecisionRule& rule) {
  Record rec;
  rec.set("form", form_name(rule));
  rec.set_long("arity", rule.arity);
  if (const auto* f = std::get_if<ClippedLinear>(&rule.form)) {
    rec.set_double("slope", f->slope);
    rec.set_double("threshold", f->threshold);
    rec.set_double("floor_prob", f->floor_prob);
  } else if (const auto* f = std::get_if<ConstantProb>(&rule.form)) {
    rec.set_double("prob", f->prob);
  } else if (const auto* f = std::get_if<AffineSingle>(&rule.form)) {
    rec.set_double("offset", f->offset);
    rec.set_double("slope", f->slope);
  } else if (const auto* f = std::get_if<MeanThresholdStep>(&rule.form)) {
    rec.set_double("threshold", f->threshold);
  } else {
    const auto& t = std::get<PiecewiseTable>(rule.form);
    rec.set_doubles("knot_reports", t.knot_reports);
    rec.set_doubles("knot_probs", t.knot_probs);
  }
  return rec;
}

DecisionRule decision_from_record(const Record& rec) {
  const std::string& form = rec.get("form");
  int arity = static_cast<int>(rec.get_long_or("arity", 1));
  if (form == "clipped_linear")
    return make_clipped_linear(rec.get_double("slope"), rec.get_double("threshold"),
                               rec.get_double_or("floor_prob", 0.0), arity);
  if (form == "constant") return make_constant(rec.get_double("prob"), arity);
  if (form == "affine_single") return make_affine_single(rec.get_double("offset"), rec.get_double("slope"));
  if (form == "mean_threshold_step") return make_mean_threshold_step(rec.get_double("threshold"), arity);
  if (form == "piecewise_linear_table")
    return make_piecewise_table(rec.get_doubles("knot_reports"), rec.get_doubles("knot_probs"));
  throw ConfigError("unknown decision rule form: '" + form + "'");
}

}  // namespace beldec
