#include "beldec/bribery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beldec {

namespace {

void check_multi(const MultiMechanism& mech) {
  if (mech.scorings.empty()) throw std::invalid_argument("mechanism needs at least one recommender");
  if (static_cast<int>(mech.scorings.size()) != mech.decision.arity)
    throw std::invalid_argument("decision arity must match the number of scoring rules");
}

void check_briber(const BriberType& briber, size_t n) {
  if (!(briber.action_value >= 0)) throw std::invalid_argument("action value must be >= 0");
  if (briber.belief_profiles.empty()) throw std::invalid_argument("briber needs a belief profile");
  for (const auto& p : briber.belief_profiles) {
    if (p.beliefs.size() != n) throw std::invalid_argument("belief profile size must match recommenders");
    if (!(p.weight > 0)) throw std::invalid_argument("profile weights must be > 0");
    for (double q : p.beliefs)
      if (!(q >= 0 && q <= 1)) throw std::invalid_argument("beliefs must lie in [0,1]");
  }
}

std::vector<double> others_of(const std::vector<double>& profile, size_t index) {
  std::vector<double> out;
  out.reserve(profile.size() - 1);
  for (size_t j = 0; j < profile.size(); ++j)
    if (j != index) out.push_back(profile[j]);
  return out;
}

// Best responses of every recommender in a fixed belief profile under the
// given bribe vector; others pinned at the profile's beliefs.
std::vector<double> profile_responses(const MultiMechanism& mech, const std::vector<double>& beliefs,
                                      std::span<const double> bribes, double report_grid) {
  size_t n = beliefs.size();
  std::vector<double> reports(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> rest = others_of(beliefs, i);
    reports[i] = optimal_report_coord(mech.scorings[i], mech.decision, static_cast<int>(i), rest,
                                      beliefs[i], bribes[i], report_grid);
  }
  return reports;
}

double payoff_at(const MultiMechanism& mech, const std::vector<double>& reports,
                 std::span<const double> bribes, double action_value) {
  double total = 0;
  for (double c : bribes) total += c;
  return (action_value - total) * pact_eval(mech.decision, reports);
}

// Bribe vectors searched: exhaustive product grid for n <= 2, single-target
// plus uniform families beyond that. Always includes the zero vector first.
std::vector<std::vector<double>> bribe_candidates(size_t n, double c_step, double cap) {
  std::vector<double> levels{0.0};
  long cells = std::lround(std::ceil(cap / c_step));
  for (long k = 1; k <= cells; ++k) levels.push_back(std::min(static_cast<double>(k) * c_step, cap));

  std::vector<std::vector<double>> out;
  if (n == 1) {
    for (double c : levels) out.push_back({c});
    return out;
  }
  if (n == 2) {
    for (double c1 : levels)
      for (double c2 : levels) out.push_back({c1, c2});
    return out;
  }
  out.emplace_back(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (double c : levels) {
      if (c == 0.0) continue;
      std::vector<double> v(n, 0.0);
      v[i] = c;
      out.push_back(std::move(v));
    }
  for (double c : levels) {
    if (c == 0.0) continue;
    out.emplace_back(n, c);
  }
  return out;
}

double total_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

bool bribe_preferred(double value, const std::vector<double>& bribes, double best_value,
                     const std::vector<double>& best_bribes) {
  if (value != best_value) return value > best_value;
  double t = total_of(bribes), bt = total_of(best_bribes);
  if (t != bt) return t < bt;
  return bribes < best_bribes;
}

}  // namespace

double briber_util(const MultiMechanism& mech, std::span<const double> bribes,
                   const BriberType& briber, double report_grid) {
  check_multi(mech);
  size_t n = mech.scorings.size();
  check_briber(briber, n);
  if (bribes.size() != n) throw std::invalid_argument("bribe vector size must match recommenders");
  for (double c : bribes)
    if (!(c >= 0)) throw std::invalid_argument("bribes must be >= 0");

  double acc = 0, wsum = 0;
  for (const auto& p : briber.belief_profiles) {
    std::vector<double> reports = profile_responses(mech, p.beliefs, bribes, report_grid);
    acc += p.weight * payoff_at(mech, reports, bribes, briber.action_value);
    wsum += p.weight;
  }
  return acc / wsum;
}

BribeSearch optimal_bribe(const MultiMechanism& mech, const BriberType& briber, double c_step,
                          double cap, double report_grid) {
  check_multi(mech);
  size_t n = mech.scorings.size();
  check_briber(briber, n);
  double d = briber.action_value;
  if (cap < 0) throw std::invalid_argument("optimal_bribe: cap must be >= 0 (0 uses the action value)");
  if (c_step < 0)
    throw std::invalid_argument("optimal_bribe: bribe step must be >= 0 (0 uses a default)");
  if (d == 0.0) return {std::vector<double>(n, 0.0), 0.0};
  if (cap == 0) cap = d;
  if (c_step == 0) c_step = d / 200.0;

  // Coordinate best responses depend only on (profile, recommender, own
  // bribe); cache them so the bribe lattice costs one scan per level.
  std::vector<double> levels{0.0};
  long cells = std::lround(std::ceil(cap / c_step));
  for (long k = 1; k <= cells; ++k) levels.push_back(std::min(static_cast<double>(k) * c_step, cap));
  std::vector<std::vector<std::vector<double>>> response(briber.belief_profiles.size());
  for (size_t p = 0; p < briber.belief_profiles.size(); ++p) {
    const auto& beliefs = briber.belief_profiles[p].beliefs;
    response[p].assign(n, std::vector<double>(levels.size()));
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> rest = others_of(beliefs, i);
      for (size_t li = 0; li < levels.size(); ++li)
        response[p][i][li] = optimal_report_coord(mech.scorings[i], mech.decision, static_cast<int>(i),
                                                  rest, beliefs[i], levels[li], report_grid);
    }
  }
  auto level_index = [&](double c) {
    auto it = std::lower_bound(levels.begin(), levels.end(), c);
    return static_cast<size_t>(it - levels.begin());
  };

  BribeSearch best{std::vector<double>(n, 0.0), -std::numeric_limits<double>::infinity()};
  std::vector<double> reports(n);
  for (const auto& bribes : bribe_candidates(n, c_step, cap)) {
    double acc = 0, wsum = 0;
    for (size_t p = 0; p < briber.belief_profiles.size(); ++p) {
      for (size_t i = 0; i < n; ++i) reports[i] = response[p][i][level_index(bribes[i])];
      acc += briber.belief_profiles[p].weight * payoff_at(mech, reports, bribes, d);
      wsum += briber.belief_profiles[p].weight;
    }
    double value = acc / wsum;
    if (bribe_preferred(value, bribes, best.value, best.bribes)) {
      best.value = value;
      best.bribes = bribes;
    }
  }
  return best;
}

BribeFreeCheck is_bribe_free(const MultiMechanism& mech, double action_value, double q_step,
                             double c_step, double margin, double report_grid) {
  check_multi(mech);
  if (!(action_value > 0)) throw std::invalid_argument("is_bribe_free: action value must be > 0");
  if (!(q_step > 0)) throw std::invalid_argument("is_bribe_free: q grid must be > 0");
  if (c_step < 0)
    throw std::invalid_argument("is_bribe_free: bribe step must be >= 0 (0 uses a default)");
  size_t n = mech.scorings.size();
  if (c_step == 0) c_step = action_value / 200.0;

  BribeFreeCheck out;
  out.worst_gain = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> candidates = bribe_candidates(n, c_step, action_value);

  long qcells = std::lround(std::ceil(1.0 / q_step));
  for (long qi = 0; qi <= qcells; ++qi) {
    double q = std::min(1.0, static_cast<double>(qi) * q_step);
    BriberType briber{action_value, {RecommenderProfile{std::vector<double>(n, q), 1.0}}};

    std::vector<double> levels{0.0};
    long cells = std::lround(std::ceil(action_value / c_step));
    for (long k = 1; k <= cells; ++k)
      levels.push_back(std::min(static_cast<double>(k) * c_step, action_value));
    std::vector<std::vector<double>> response(n, std::vector<double>(levels.size()));
    const auto& beliefs = briber.belief_profiles[0].beliefs;
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> rest = others_of(beliefs, i);
      for (size_t li = 0; li < levels.size(); ++li)
        response[i][li] = optimal_report_coord(mech.scorings[i], mech.decision, static_cast<int>(i),
                                               rest, beliefs[i], levels[li], report_grid);
    }
    auto level_index = [&](double c) {
      auto it = std::lower_bound(levels.begin(), levels.end(), c);
      return static_cast<size_t>(it - levels.begin());
    };

    std::vector<double> reports(n);
    for (size_t i = 0; i < n; ++i) reports[i] = response[i][0];
    double base = payoff_at(mech, reports, std::vector<double>(n, 0.0), action_value);

    for (const auto& bribes : candidates) {
      if (total_of(bribes) == 0.0) continue;  // strictness quantifies over c > 0
      for (size_t i = 0; i < n; ++i) reports[i] = response[i][level_index(bribes[i])];
      double gain = payoff_at(mech, reports, bribes, action_value) - base;
      if (gain > out.worst_gain) {
        out.worst_gain = gain;
        out.worst_belief = q;
        out.worst_bribes = bribes;
      }
    }
  }
  out.bribe_free = out.worst_gain <= -margin;
  return out;
}

NecessaryCheck necessary_condition_single(double delta, double beta, double action_value,
                                          double max_pact) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  if (!(action_value > 0)) throw std::invalid_argument("action value must be > 0");
  if (!(delta >= 0)) throw std::invalid_argument("delta must be >= 0");
  if (!(max_pact >= 0 && max_pact <= 1)) throw std::invalid_argument("max_pact must lie in [0,1]");

  NecessaryCheck out;
  out.holds = action_value * delta * delta <= 8.0 * beta * max_pact;
  double num = action_value * delta * delta - 8.0 * beta * max_pact;
  double den = delta * delta + 2.0 * delta * max_pact;
  out.critical_bribe = (num > 0 && den > 0) ? num / den : 0.0;
  return out;
}

ConditionCheck sufficient_condition_single(double slope, double beta, double action_value,
                                           double min_pact) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  if (!(action_value > 0)) throw std::invalid_argument("action value must be > 0");
  if (!(slope >= 0) || !std::isfinite(slope)) throw std::invalid_argument("slope must be finite and >= 0");
  if (!(min_pact >= 0 && min_pact <= 1)) throw std::invalid_argument("min_pact must lie in [0,1]");
  ConditionCheck out;
  out.lhs = slope * slope;
  out.rhs = beta / action_value * min_pact;
  out.holds = out.lhs <= out.rhs;
  return out;
}

SufficientMulti sufficient_condition_multi(std::span<const double> slopes, double beta,
                                           double action_value, double min_pact) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  if (!(action_value > 0)) throw std::invalid_argument("action value must be > 0");
  if (!(min_pact >= 0 && min_pact <= 1)) throw std::invalid_argument("min_pact must lie in [0,1]");
  if (slopes.empty()) throw std::invalid_argument("need at least one slope");

  SufficientMulti out;
  for (double L : slopes) {
    if (!(L >= 0) || !std::isfinite(L)) throw std::invalid_argument("slopes must be finite and >= 0");
    out.lhs += L * L;
  }
  if (out.lhs == 0.0) throw std::invalid_argument("all-zero slopes leave no budget split");
  out.rhs = beta / action_value * min_pact;
  out.holds = out.lhs <= out.rhs;
  out.budgets.reserve(slopes.size());
  for (double L : slopes) out.budgets.push_back(beta * L * L / out.lhs);
  return out;
}

}  // namespace beldec
