#include "beldec/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "beldec/optimize.hpp"
#include "beldec/rng.hpp"

namespace beldec {

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

ScoringRule make_quadratic(double beta) {
  if (!(beta > 0)) throw std::invalid_argument("make_quadratic: beta must be > 0");
  ScoringRule rule;
  rule.kind = RuleKind::Quadratic;
  rule.beta = beta;
  rule.pay_on_one = [beta](double r) { return beta * r * (2.0 - r); };
  rule.pay_on_zero = [beta](double r) { return beta * (1.0 - r * r); };
  rule.strict_hint = true;
  return rule;
}

double expected_payment(const ScoringRule& rule, double report, double belief) {
  require_unit(report, "report");
  require_unit(belief, "belief");
  return rule.pay_on_one(report) * belief + rule.pay_on_zero(report) * (1.0 - belief);
}

namespace {

// Candidate q values around which piecewise payment curves can kink or jump:
// every breakpoint t matters both as q = t and as q = t - eps (where the
// shifted report crosses it), and one ulp-ish to each side picks up the
// one-sided limits of discontinuous step curves.
std::vector<double> lying_candidates(const ScoringRule& rule, double eps, double lo, double hi) {
  std::vector<double> out;
  auto push = [&](double q) {
    for (double d : {-1e-12, 0.0, 1e-12}) {
      double v = q + d;
      if (v >= lo && v <= hi) out.push_back(v);
    }
  };
  for (double t : rule.breakpoints) {
    push(t);
    push(t - eps);
  }
  return out;
}

}  // namespace

double cost_of_lying(const ScoringRule& rule, double eps, double grid) {
  if (!(std::abs(eps) < 1.0))
    throw std::invalid_argument("cost_of_lying: |eps| >= 1 leaves no feasible beliefs");
  if (!(grid > 0)) throw std::invalid_argument("cost_of_lying: grid must be > 0");
  double lo = std::max(0.0, -eps);
  double hi = std::min(1.0, 1.0 - eps);
  std::vector<double> extras = lying_candidates(rule, eps, lo, hi);
  auto regret = [&rule, eps](double q) {
    return expected_payment(rule, q, q) - expected_payment(rule, q + eps, q);
  };
  return minimize_scalar(regret, lo, hi, grid, extras).value;
}

CostBoundCheck check_cost_upper_bound(const ScoringRule& rule, double eps, double tol, double grid) {
  CostBoundCheck out;
  out.cost = cost_of_lying(rule, eps, grid);
  out.bound = eps * eps * rule.beta / (1.0 - std::abs(eps));
  out.holds = out.cost <= out.bound + tol;
  return out;
}

TelescopingCheck telescoping_gap_sum(const ScoringRule& rule, std::span<const double> xs, double tol) {
  if (xs.empty()) throw std::invalid_argument("telescoping_gap_sum: empty sequence");
  for (double x : xs) require_unit(x, "sequence value");
  bool up = true, down = true;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    if (xs[k + 1] < xs[k]) up = false;
    if (xs[k + 1] > xs[k]) down = false;
  }
  if (!up && !down) throw std::invalid_argument("telescoping_gap_sum: sequence must be monotone");

  TelescopingCheck out;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    double x = xs[k], y = xs[k + 1];
    out.sum += expected_payment(rule, x, x) - expected_payment(rule, y, x) +
               expected_payment(rule, y, y) - expected_payment(rule, x, y);
    out.max_gap = std::max(out.max_gap, std::abs(y - x));
  }
  // The bracket telescopes along the increasing orientation of the sequence.
  double first = down ? xs.back() : xs.front();
  double last = down ? xs.front() : xs.back();
  out.bound_bracket =
      out.max_gap * (expected_payment(rule, first, 0.0) - expected_payment(rule, last, 0.0) -
                     expected_payment(rule, first, 1.0) + expected_payment(rule, last, 1.0));
  out.bound_budget = 2.0 * out.max_gap * rule.beta;
  out.holds = out.sum <= out.bound_bracket + tol && out.sum <= out.bound_budget + tol;
  return out;
}

double scoring_identity_residual(const ScoringRule& rule, double x, double y) {
  if (x == y)
    throw std::invalid_argument("scoring_identity_residual: needs two distinct reports");
  double lhs = expected_payment(rule, x, x) - expected_payment(rule, y, x) +
               expected_payment(rule, y, y) - expected_payment(rule, x, y);
  double rhs = (y - x) * (expected_payment(rule, x, 0.0) - expected_payment(rule, y, 0.0) -
                          expected_payment(rule, x, 1.0) + expected_payment(rule, y, 1.0));
  return std::abs(lhs - rhs);
}

PropernessCheck is_proper(const ScoringRule& rule, double grid, double margin) {
  if (!(grid > 0)) throw std::invalid_argument("is_proper: grid must be > 0");
  long n = std::lround(std::ceil(1.0 / grid));
  std::vector<double> pts(static_cast<size_t>(n) + 1);
  std::vector<double> g(pts.size()), h(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i] = std::min(1.0, static_cast<double>(i) * grid);
    g[i] = rule.pay_on_one(pts[i]);
    h[i] = rule.pay_on_zero(pts[i]);
  }
  PropernessCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i) {
    double q = pts[i];
    double truthful = g[i] * q + h[i] * (1.0 - q);
    for (size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      double r = pts[j];
      double dev = g[j] * q + h[j] * (1.0 - q);
      double m = (truthful - dev) / ((r - q) * (r - q));
      if (m < out.worst_margin) {
        out.worst_margin = m;
        out.q = q;
        out.r = r;
      }
    }
  }
  out.proper = out.worst_margin > margin;
  return out;
}

namespace {

// Payment curves of a convex-generated rule: a piecewise-constant part from
// the supporting lines of a convex piecewise-linear potential, plus an
// optional quadratic term, affinely rescaled so payments span [0, beta].
struct ConvexCurves {
  std::vector<double> knots;  // 0 = knots[0] < ... < knots.back() = 1
  std::vector<double> g_seg, h_seg;
  double lam = 0;    // weight of the quadratic term
  double lo = 0;     // raw payment minimum before rescaling
  double scale = 1;  // beta / (raw payment range)

  size_t segment(double x) const {
    size_t j = static_cast<size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
    if (j > 0) --j;
    return std::min(j, g_seg.size() - 1);
  }
  double g(double x) const {
    size_t j = segment(x);
    return (g_seg[j] + lam * x * (2.0 - x) - lo) * scale;
  }
  double h(double x) const {
    size_t j = segment(x);
    return (h_seg[j] + lam * (1.0 - x * x) - lo) * scale;
  }
};

}  // namespace

ScoringRule make_random_convex_rule(double beta, uint64_t seed, bool strict_mix) {
  if (!(beta > 0)) throw std::invalid_argument("make_random_convex_rule: beta must be > 0");
  CounterRng rng(seed, /*stream=*/0x5C0Aull);

  auto data = std::make_shared<ConvexCurves>();
  size_t interior = 3 + static_cast<size_t>(rng.next_u64() % 4);  // 3..6 kinks
  size_t segs = interior + 1;

  // Knot positions from normalized positive gaps, so spacing stays bounded.
  std::vector<double> gaps(segs);
  double total = 0;
  for (double& gp : gaps) {
    gp = rng.next_range(0.5, 1.5);
    total += gp;
  }
  data->knots.resize(segs + 1);
  data->knots[0] = 0.0;
  for (size_t j = 0; j < segs; ++j) data->knots[j + 1] = data->knots[j] + gaps[j] / total;
  data->knots.back() = 1.0;

  // Strictly increasing segment slopes of the convex potential.
  std::vector<double> slopes(segs);
  slopes[0] = rng.next_range(-1.5, -0.3);
  for (size_t j = 1; j < segs; ++j) slopes[j] = slopes[j - 1] + rng.next_range(0.1, 1.0);

  data->g_seg.resize(segs);
  data->h_seg.resize(segs);
  double potential = 0.0;  // potential value at knots[j]
  for (size_t j = 0; j < segs; ++j) {
    data->h_seg[j] = potential - slopes[j] * data->knots[j];
    data->g_seg[j] = data->h_seg[j] + slopes[j];
    potential += slopes[j] * (data->knots[j + 1] - data->knots[j]);
  }
  data->lam = strict_mix ? rng.next_range(0.3, 1.0) : 0.0;

  // Raw payments are monotone inside each segment, so the extremes sit at
  // segment endpoints.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (size_t j = 0; j < segs; ++j) {
    for (double x : {data->knots[j], data->knots[j + 1]}) {
      double gq = data->g_seg[j] + data->lam * x * (2.0 - x);
      double hq = data->h_seg[j] + data->lam * (1.0 - x * x);
      lo = std::min(lo, std::min(gq, hq));
      hi = std::max(hi, std::max(gq, hq));
    }
  }
  data->lo = lo;
  data->scale = beta / (hi - lo);

  ScoringRule rule;
  rule.kind = RuleKind::ConvexGenerated;
  rule.beta = beta;
  rule.pay_on_one = [data](double r) { return data->g(r); };
  rule.pay_on_zero = [data](double r) { return data->h(r); };
  rule.breakpoints.assign(data->knots.begin() + 1, data->knots.end() - 1);
  rule.strict_hint = strict_mix;
  return rule;
}

namespace {

const char* kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Quadratic: return "quadratic";
    case RuleKind::Table: return "table";
    case RuleKind::ConvexGenerated: return "convex-generated";
  }
  return "table";
}

RuleKind kind_from_name(std::string_view name) {
  if (name == "quadratic") return RuleKind::Quadratic;
  if (name == "table") return RuleKind::Table;
  if (name == "convex-generated") return RuleKind::ConvexGenerated;
  throw ConfigError("unknown scoring rule kind: '" + std::string(name) + "'");
}

// Piecewise-linear interpolation through equally spaced samples on [0,1].
struct SampledCurve {
  std::vector<double> values;
  double operator()(double x) const {
    double pos = x * static_cast<double>(values.size() - 1);
    size_t j = std::min(static_cast<size_t>(pos), values.size() - 2);
    double t = pos - static_cast<double>(j);
    return values[j] + t * (values[j + 1] - values[j]);
  }
};

}  // namespace

Record scoring_to_record(const ScoringRule& rule, double sample_step) {
  if (!(sample_step > 0 && sample_step <= 0.5))
    throw std::invalid_argument("scoring_to_record: bad sample step");
  Record rec;
  rec.set("kind", kind_name(rule.kind));
  rec.set_double("beta", rule.beta);
  long n = std::lround(std::ceil(1.0 / sample_step));
  std::vector<double> grid, g, h;
  for (long i = 0; i <= n; ++i) {
    double x = std::min(1.0, static_cast<double>(i) * sample_step);
    grid.push_back(x);
    g.push_back(rule.pay_on_one(x));
    h.push_back(rule.pay_on_zero(x));
  }
  rec.set_doubles("grid", grid);
  rec.set_doubles("pay_on_one", g);
  rec.set_doubles("pay_on_zero", h);
  return rec;
}

ScoringRule scoring_from_record(const Record& rec) {
  RuleKind kind = kind_from_name(rec.get("kind"));
  double beta = rec.get_double("beta");
  if (kind == RuleKind::Quadratic) return make_quadratic(beta);

  auto grid = rec.get_doubles("grid");
  auto g = std::make_shared<SampledCurve>(SampledCurve{rec.get_doubles("pay_on_one")});
  auto h = std::make_shared<SampledCurve>(SampledCurve{rec.get_doubles("pay_on_zero")});
  if (grid.size() < 2 || g->values.size() != grid.size() || h->values.size() != grid.size())
    throw ConfigError("scoring record: grid and curve samples must align (>= 2 points)");
  if (grid.front() != 0.0 || grid.back() != 1.0)
    throw ConfigError("scoring record: grid must span [0,1]");
  if (!(beta > 0)) throw ConfigError("scoring record: beta must be > 0");

  ScoringRule rule;
  rule.kind = kind;
  rule.beta = beta;
  rule.pay_on_one = [g](double r) { return (*g)(r); };
  rule.pay_on_zero = [h](double r) { return (*h)(r); };
  rule.breakpoints.assign(grid.begin() + 1, grid.end() - 1);
  return rule;
}

}  // namespace beldec
