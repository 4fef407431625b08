#include "beldec/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace beldec {

namespace {

std::vector<double> grid_levels(double step) {
  if (!(step > 0 && step <= 1)) throw std::invalid_argument("grid step must lie in (0,1]");
  std::vector<double> out;
  long cells = std::lround(std::ceil(1.0 / step));
  for (long k = 0; k <= cells; ++k) out.push_back(std::min(1.0, static_cast<double>(k) * step));
  return out;
}

// Odometer over a product grid; returns false when the sweep is done.
bool advance(std::vector<size_t>& idx, size_t levels) {
  for (size_t j = 0; j < idx.size(); ++j) {
    if (++idx[j] < levels) return true;
    idx[j] = 0;
  }
  return false;
}

void check_mech(const RandomizedMechanism& mech) {
  if (mech.arity < 1) throw std::invalid_argument("mechanism arity must be >= 1");
  if (mech.state_probs.empty()) throw std::invalid_argument("mechanism needs internal states");
  if (mech.pay.size() != static_cast<size_t>(mech.arity))
    throw std::invalid_argument("mechanism needs one payment function per recommender");
}

}  // namespace

double mech_pact(const RandomizedMechanism& mech, std::span<const double> reports) {
  check_mech(mech);
  if (static_cast<int>(reports.size()) != mech.arity)
    throw std::invalid_argument("report count does not match mechanism arity");
  double acc = 0;
  for (size_t x = 0; x < mech.state_probs.size(); ++x)
    acc += mech.state_probs[x] * static_cast<double>(mech.act(reports, static_cast<int>(x)));
  return acc;
}

double mech_epay(const RandomizedMechanism& mech, int recommender, std::span<const double> reports,
                 int outcome) {
  check_mech(mech);
  if (recommender < 0 || recommender >= mech.arity)
    throw std::invalid_argument("recommender index out of range");
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
  if (static_cast<int>(reports.size()) != mech.arity)
    throw std::invalid_argument("report count does not match mechanism arity");
  double acc = 0;
  const auto& pay = mech.pay[static_cast<size_t>(recommender)];
  for (size_t x = 0; x < mech.state_probs.size(); ++x)
    acc += mech.state_probs[x] * pay(reports, outcome, static_cast<int>(x));
  return acc;
}

RandomizedMechanism make_unconditional(std::vector<ScoringRule> scorings, DecisionRule decision,
                                       int act_states) {
  if (scorings.empty()) throw std::invalid_argument("make_unconditional: need scoring rules");
  if (static_cast<int>(scorings.size()) != decision.arity)
    throw std::invalid_argument("make_unconditional: decision arity must match scoring count");
  if (act_states < 1) throw std::invalid_argument("make_unconditional: need at least one state");

  auto rules = std::make_shared<std::vector<ScoringRule>>(std::move(scorings));
  auto dec = std::make_shared<DecisionRule>(std::move(decision));
  int n = dec->arity;
  double m = static_cast<double>(act_states);

  RandomizedMechanism mech;
  mech.arity = n;
  mech.state_probs.assign(static_cast<size_t>(act_states), 1.0 / m);
  mech.act = [dec, m](std::span<const double> reports, int state) {
    return (static_cast<double>(state) + 0.5) / m < pact_eval(*dec, reports) ? 1 : 0;
  };
  mech.budget = 0;
  for (size_t i = 0; i < rules->size(); ++i) {
    mech.budget += (*rules)[i].beta;
    mech.pay.push_back([rules, i](std::span<const double> reports, int outcome, int) {
      const ScoringRule& rule = (*rules)[i];
      return outcome ? rule.pay_on_one(reports[i]) : rule.pay_on_zero(reports[i]);
    });
  }

  auto& head = mech.description.add("mechanism");
  head.set("kind", "unconditional");
  head.set_long("arity", n);
  head.set_long("act_states", act_states);
  head.set_double("budget", mech.budget);
  mech.description.add("randomness").set_doubles("state_probs", mech.state_probs);
  for (size_t i = 0; i < rules->size(); ++i)
    mech.description.sections.emplace_back("scoring_" + std::to_string(i + 1),
                                           scoring_to_record((*rules)[i]));
  mech.description.sections.emplace_back("decision", decision_to_record(*dec));
  return mech;
}

CriticalValue cpm_critical_value(const DecisionRule& act, std::span<const double> others) {
  if (!is_deterministic(act))
    throw std::invalid_argument("cpm_critical_value: act must be deterministic");
  if (static_cast<int>(others.size()) != act.arity - 1)
    throw std::invalid_argument("cpm_critical_value: others must have arity-1 entries");

  // Mean-threshold rules admit an exact flip point; bisection would leave a
  // one-sided slack that shows up as a spurious negative truthfulness margin.
  if (const auto* f = std::get_if<MeanThresholdStep>(&act.form)) {
    double sum = 0;
    for (double r : others) sum += r;
    double v = static_cast<double>(act.arity) * f->threshold - sum;
    if (v <= 0.0) return {0.0, true};
    if (v > 1.0) return {1.0, false};
    return {v, true};
  }

  std::vector<double> profile(static_cast<size_t>(act.arity));
  std::copy(others.begin(), others.end(), profile.begin() + 1);
  auto fires = [&](double r) {
    profile[0] = r;
    return pact_eval(act, profile) >= 0.5;
  };
  if (fires(0.0)) return {0.0, true};
  if (!fires(1.0)) return {1.0, false};
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-9) {
    double mid = 0.5 * (lo + hi);
    (fires(mid) ? hi : lo) = mid;
  }
  return {hi, true};
}

RandomizedMechanism make_cpm(double threshold, int arity) {
  DecisionRule step = make_mean_threshold_step(threshold, arity);
  auto dec = std::make_shared<DecisionRule>(step);
  int n = arity;

  RandomizedMechanism mech;
  mech.arity = n;
  mech.state_probs = {1.0};
  mech.act = [dec](std::span<const double> reports, int) {
    return pact_eval(*dec, reports) >= 0.5 ? 1 : 0;
  };
  for (int i = 0; i < n; ++i) {
    mech.pay.push_back([dec, i, n](std::span<const double> reports, int outcome, int) {
      int a = pact_eval(*dec, reports) >= 0.5 ? 1 : 0;
      if (a) return static_cast<double>(outcome);
      std::vector<double> rest;
      rest.reserve(static_cast<size_t>(n) - 1);
      for (int j = 0; j < n; ++j)
        if (j != i) rest.push_back(reports[static_cast<size_t>(j)]);
      return cpm_critical_value(*dec, rest).value;
    });
  }
  mech.budget = static_cast<double>(n);

  auto& head = mech.description.add("mechanism");
  head.set("kind", "cpm");
  head.set_long("arity", n);
  head.set_double("threshold", threshold);
  head.set_double("budget", mech.budget);
  mech.description.add("randomness").set_doubles("state_probs", mech.state_probs);
  return mech;
}

RandomizedMechanism alpha_decouple(const RandomizedMechanism& inner, double alpha) {
  check_mech(inner);
  if (!(alpha > 0 && alpha <= 1))
    throw std::invalid_argument("alpha_decouple: alpha must lie in (0,1]");

  auto base = std::make_shared<RandomizedMechanism>(inner);
  size_t m = base->state_probs.size();

  RandomizedMechanism mech;
  mech.arity = base->arity;
  mech.state_probs.resize(2 * m);
  for (size_t k = 0; k < m; ++k) {
    mech.state_probs[k] = alpha * base->state_probs[k];          // forced-act branch
    mech.state_probs[m + k] = (1.0 - alpha) * base->state_probs[k];  // inner branch
  }
  mech.act = [base, m](std::span<const double> reports, int state) {
    size_t k = static_cast<size_t>(state);
    return k < m ? 1 : base->act(reports, static_cast<int>(k - m));
  };
  for (size_t i = 0; i < base->pay.size(); ++i) {
    mech.pay.push_back([base, m, alpha, i](std::span<const double> reports, int outcome, int state) {
      size_t k = static_cast<size_t>(state);
      return k < m ? base->pay[i](reports, outcome, static_cast<int>(k)) / alpha : 0.0;
    });
  }
  mech.budget = base->budget;

  auto& head = mech.description.add("mechanism");
  head.set("kind", "decoupled");
  head.set_long("arity", mech.arity);
  head.set_double("alpha", alpha);
  head.set_double("budget", mech.budget);
  mech.description.add("randomness").set_doubles("state_probs", mech.state_probs);
  for (const auto& [name, rec] : base->description.sections)
    mech.description.sections.emplace_back("inner_" + name, rec);
  return mech;
}

CpfCheck is_cpf(const RandomizedMechanism& mech, double grid, double tol) {
  check_mech(mech);
  std::vector<double> levels = grid_levels(grid);
  std::vector<size_t> idx(static_cast<size_t>(mech.arity), 0);
  std::vector<double> reports(static_cast<size_t>(mech.arity));

  CpfCheck out;
  out.conditional = true;
  do {
    for (size_t j = 0; j < idx.size(); ++j) reports[j] = levels[idx[j]];
    for (size_t x = 0; x < mech.state_probs.size(); ++x) {
      if (mech.act(reports, static_cast<int>(x)) != 0) continue;
      for (size_t i = 0; i < mech.pay.size(); ++i) {
        double diff = std::abs(mech.pay[i](reports, 0, static_cast<int>(x)) -
                               mech.pay[i](reports, 1, static_cast<int>(x)));
        if (diff > out.worst_diff) {
          out.worst_diff = diff;
          out.worst_reports = reports;
          out.worst_state = static_cast<int>(x);
          out.worst_recommender = static_cast<int>(i);
        }
      }
    }
  } while (advance(idx, levels.size()));
  out.conditional = out.worst_diff <= tol;
  return out;
}

double cpm_expected_pay_dependent(const DecisionRule& act, double report,
                                  const ConditionalBeliefPair& pair, double belief) {
  if (!(belief >= 0 && belief <= 1)) throw std::invalid_argument("belief must lie in [0,1]");
  if (!(report >= 0 && report <= 1)) throw std::invalid_argument("report must lie in [0,1]");
  double x = cpm_critical_value(act, pair.if_one).value;
  double y = cpm_critical_value(act, pair.if_zero).value;

  auto with_profile = [&](const std::vector<double>& others) {
    std::vector<double> profile;
    profile.reserve(others.size() + 1);
    profile.push_back(report);
    profile.insert(profile.end(), others.begin(), others.end());
    return pact_eval(act, profile) >= 0.5 ? 1.0 : 0.0;
  };
  double a1 = with_profile(pair.if_one);
  double a0 = with_profile(pair.if_zero);
  return a1 * belief + (1.0 - a1) * x * belief + (1.0 - a0) * y * (1.0 - belief);
}

CpmReport cpm_optimal_report(const DecisionRule& act, const ConditionalBeliefPair& pair,
                             double belief, double grid) {
  if (!(belief >= 0 && belief <= 1)) throw std::invalid_argument("belief must lie in [0,1]");
  double x = cpm_critical_value(act, pair.if_one).value;
  double y = cpm_critical_value(act, pair.if_zero).value;
  // Perturbed belief used only to split exact plateau ties at boundary
  // beliefs, keeping the selected report stable across q.
  double nudged = belief * (1.0 - 1e-6) + 5e-7;

  std::vector<double> candidates = grid_levels(grid);
  for (double extra : {x, y})
    if (extra >= 0 && extra <= 1) candidates.push_back(extra);
  std::sort(candidates.begin(), candidates.end());

  auto value_at = [&](double r, double q) { return cpm_expected_pay_dependent(act, r, pair, q); };

  CpmReport best;
  best.report = candidates.front();
  best.expected_pay = value_at(best.report, belief);
  double best_nudged = value_at(best.report, nudged);
  for (size_t k = 1; k < candidates.size(); ++k) {
    double r = candidates[k];
    double v = value_at(r, belief);
    if (v > best.expected_pay + 1e-12) {
      best.report = r;
      best.expected_pay = v;
      best_nudged = value_at(r, nudged);
    } else if (v > best.expected_pay - 1e-12) {
      double vn = value_at(r, nudged);
      if (vn > best_nudged + 1e-15) {
        best.report = r;
        best.expected_pay = v;
        best_nudged = vn;
      }
    }
  }

  auto acts_match = [&](const std::vector<double>& others) {
    std::vector<double> profile;
    profile.reserve(others.size() + 1);
    profile.push_back(best.report);
    profile.insert(profile.end(), others.begin(), others.end());
    double at_report = pact_eval(act, profile);
    profile[0] = belief;
    return at_report == pact_eval(act, profile);
  };
  best.truthful_decision = acts_match(pair.if_one) && acts_match(pair.if_zero);
  return best;
}

DecouplingCheck check_decoupling(const RandomizedMechanism& inner, const RandomizedMechanism& outer,
                                 double alpha, double grid, double tol) {
  check_mech(inner);
  check_mech(outer);
  if (inner.arity != outer.arity) throw std::invalid_argument("check_decoupling: arity mismatch");
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("check_decoupling: alpha in (0,1]");

  std::vector<double> levels = grid_levels(grid);
  std::vector<size_t> idx(static_cast<size_t>(inner.arity), 0);
  std::vector<double> reports(static_cast<size_t>(inner.arity));

  DecouplingCheck out;
  do {
    for (size_t j = 0; j < idx.size(); ++j) reports[j] = levels[idx[j]];
    for (int i = 0; i < inner.arity; ++i)
      for (int o : {0, 1})
        out.max_epay_diff = std::max(
            out.max_epay_diff, std::abs(mech_epay(inner, i, reports, o) - mech_epay(outer, i, reports, o)));
    double expected = alpha + (1.0 - alpha) * mech_pact(inner, reports);
    out.max_pact_diff = std::max(out.max_pact_diff, std::abs(mech_pact(outer, reports) - expected));
  } while (advance(idx, levels.size()));

  out.conditional = is_cpf(outer, grid, tol).conditional;
  out.holds = out.max_epay_diff <= tol && out.max_pact_diff <= tol && out.conditional;
  return out;
}

TruthfulnessCheck strict_truthfulness_check(const RandomizedMechanism& mech, BeliefDomain domain,
                                            Strictness strictness, double q_grid, double r_grid,
                                            double margin) {
  check_mech(mech);
  std::vector<double> qs = grid_levels(q_grid);
  std::vector<double> rs = grid_levels(r_grid);

  // Size the lattice before materializing anything so an oversized request
  // fails fast instead of exhausting memory.
  double profile_count = std::pow(static_cast<double>(rs.size()), mech.arity - 1);
  double pair_count = domain == BeliefDomain::All ? profile_count * profile_count : profile_count;
  if (static_cast<double>(mech.arity) * static_cast<double>(qs.size()) *
          static_cast<double>(rs.size()) * pair_count >
      1e8)
    throw std::invalid_argument("strict_truthfulness_check: lattice too large, coarsen the grids");

  // Point-mass profiles of the other recommenders on the report grid.
  std::vector<std::vector<double>> profiles;
  {
    std::vector<size_t> idx(static_cast<size_t>(mech.arity) - 1, 0);
    std::vector<double> prof(static_cast<size_t>(mech.arity) - 1);
    do {
      for (size_t j = 0; j < idx.size(); ++j) prof[j] = rs[idx[j]];
      profiles.push_back(prof);
    } while (!idx.empty() && advance(idx, rs.size()));
  }

  TruthfulnessCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> reports(static_cast<size_t>(mech.arity));

  auto expected_under = [&](int i, double own, const std::vector<double>& zero_prof,
                            const std::vector<double>& one_prof, double q) {
    auto fill = [&](const std::vector<double>& prof) {
      for (int j = 0, k = 0; j < mech.arity; ++j)
        reports[static_cast<size_t>(j)] = (j == i) ? own : prof[static_cast<size_t>(k++)];
    };
    fill(one_prof);
    double on_one = mech_epay(mech, i, reports, 1);
    fill(zero_prof);
    double on_zero = mech_epay(mech, i, reports, 0);
    return q * on_one + (1.0 - q) * on_zero;
  };

  for (int i = 0; i < mech.arity; ++i) {
    for (size_t zi = 0; zi < profiles.size(); ++zi) {
      size_t one_begin = domain == BeliefDomain::All ? 0 : zi;
      size_t one_end = domain == BeliefDomain::All ? profiles.size() : zi + 1;
      for (size_t oi = one_begin; oi < one_end; ++oi) {
        for (double q : qs) {
          double truthful = expected_under(i, q, profiles[zi], profiles[oi], q);
          for (double r : rs) {
            if (r == q) continue;
            double dev = truthful - expected_under(i, r, profiles[zi], profiles[oi], q);
            if (dev < out.worst_margin) {
              out.worst_margin = dev;
              out.recommender = i;
              out.belief = q;
              out.report = r;
              out.others_if_zero = profiles[zi];
              out.others_if_one = profiles[oi];
            }
          }
        }
      }
    }
  }
  out.holds = strictness == Strictness::Strict ? out.worst_margin > margin
                                               : out.worst_margin >= -1e-12;
  return out;
}

Document mechanism_to_document(const RandomizedMechanism& mech) {
  if (mech.description.sections.empty())
    throw std::invalid_argument("mechanism has no declarative description");
  return mech.description;
}

RandomizedMechanism mechanism_from_document(const Document& doc) {
  const Record& head = doc.require("mechanism");
  const std::string& kind = head.get("kind");
  if (kind == "cpm")
    return make_cpm(head.get_double("threshold"), static_cast<int>(head.get_long("arity")));
  if (kind == "unconditional") {
    int arity = static_cast<int>(head.get_long("arity"));
    std::vector<ScoringRule> scorings;
    for (int i = 1; i <= arity; ++i)
      scorings.push_back(scoring_from_record(doc.require("scoring_" + std::to_string(i))));
    return make_unconditional(std::move(scorings), decision_from_record(doc.require("decision")),
                              static_cast<int>(head.get_long_or("act_states", 64)));
  }
  if (kind == "decoupled") {
    Document inner_doc;
    for (const auto& [name, rec] : doc.sections)
      if (name.rfind("inner_", 0) == 0) inner_doc.sections.emplace_back(name.substr(6), rec);
    return alpha_decouple(mechanism_from_document(inner_doc), head.get_double("alpha"));
  }
  throw ConfigError("unknown mechanism kind: '" + kind + "'");
}

}  // namespace beldec
