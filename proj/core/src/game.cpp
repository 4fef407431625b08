#include "beldec/game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "beldec/optimize.hpp"
#include "beldec/rng.hpp"

namespace beldec {

namespace {

// Per-game randomness streams, disjoint by construction.
constexpr unsigned long long kStateStream = 0;
constexpr unsigned long long kOutcomeStream = 1;
constexpr unsigned long long kStreamsPerGame = 2;
constexpr unsigned long long kManipStream = 0x4D43;  // separate from game streams

int draw_state(const std::vector<double>& probs, double u) {
  double acc = 0;
  for (size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

void check_observation(GameKind kind, ObservationMode observation) {
  if (observation == ObservationMode::Conditional && kind == GameKind::Plain)
    throw std::invalid_argument(
        "conditional observation needs outcome-free payments when idle; use a "
        "decoupled or critical-payment assembly");
}

}  // namespace

GameMechanism make_plain_game(std::vector<ScoringRule> scorings, DecisionRule decision,
                              ObservationMode observation, int act_states) {
  check_observation(GameKind::Plain, observation);
  GameMechanism game;
  game.kind = GameKind::Plain;
  game.observation = observation;
  game.randomized = make_unconditional(std::move(scorings), std::move(decision), act_states);
  return game;
}

GameMechanism make_decoupled_game(std::vector<ScoringRule> scorings, DecisionRule decision,
                                  double alpha, ObservationMode observation, int act_states) {
  GameMechanism game;
  game.kind = GameKind::Decoupled;
  game.observation = observation;
  game.alpha = alpha;
  game.randomized =
      alpha_decouple(make_unconditional(std::move(scorings), std::move(decision), act_states), alpha);
  return game;
}

GameMechanism make_cpm_game(double threshold, int arity, ObservationMode observation) {
  GameMechanism game;
  game.kind = GameKind::Cpm;
  game.observation = observation;
  game.threshold = threshold;
  game.randomized = make_cpm(threshold, arity);
  return game;
}

double best_response_report(const GameMechanism& game, int index, std::span<const double> beliefs,
                            double incentive, double report_grid) {
  const RandomizedMechanism& mech = game.randomized;
  if (static_cast<int>(beliefs.size()) != mech.arity)
    throw std::invalid_argument("best_response_report: one belief per recommender");
  if (index < 0 || index >= mech.arity)
    throw std::invalid_argument("best_response_report: index out of range");

  std::vector<double> extras;
  if (game.kind == GameKind::Cpm) {
    std::vector<double> rest;
    for (int j = 0; j < mech.arity; ++j)
      if (j != index) rest.push_back(beliefs[static_cast<size_t>(j)]);
    DecisionRule step = make_mean_threshold_step(game.threshold, mech.arity);
    extras.push_back(cpm_critical_value(step, rest).value);
  }

  std::vector<double> profile(beliefs.begin(), beliefs.end());
  double q = beliefs[static_cast<size_t>(index)];
  auto util = [&](double r) {
    profile[static_cast<size_t>(index)] = r;
    return q * mech_epay(mech, index, profile, 1) + (1 - q) * mech_epay(mech, index, profile, 0) +
           incentive * mech_pact(mech, profile);
  };
  return maximize_scalar(util, 0, 1, report_grid, extras).arg;
}

GameBatch run_games(const GameMechanism& game, std::span<const double> beliefs, double true_p,
                    std::span<const double> incentives, double action_value, long count,
                    unsigned long long seed, double report_grid) {
  const RandomizedMechanism& mech = game.randomized;
  int n = mech.arity;
  if (static_cast<int>(beliefs.size()) != n)
    throw std::invalid_argument("run_games: one belief per recommender");
  if (!incentives.empty() && static_cast<int>(incentives.size()) != n)
    throw std::invalid_argument("run_games: one incentive per recommender (or none)");
  if (!(true_p >= 0 && true_p <= 1)) throw std::invalid_argument("run_games: true_p in [0,1]");
  if (count < 0) throw std::invalid_argument("run_games: count must be >= 0");
  if (action_value < 0) throw std::invalid_argument("run_games: action value must be >= 0");

  GameBatch batch;
  batch.seed = seed;
  batch.true_p = true_p;
  batch.beliefs.assign(beliefs.begin(), beliefs.end());
  batch.bribes = incentives.empty() ? std::vector<double>(static_cast<size_t>(n), 0.0)
                                    : std::vector<double>(incentives.begin(), incentives.end());
  batch.action_value = action_value;
  batch.observation = game.observation;

  batch.reports.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    batch.reports[static_cast<size_t>(i)] =
        best_response_report(game, i, beliefs, batch.bribes[static_cast<size_t>(i)], report_grid);

  double bribe_total = 0;
  for (double c : batch.bribes) bribe_total += c;

  batch.games.reserve(static_cast<size_t>(count));
  for (long g = 0; g < count; ++g) {
    unsigned long long base = kStreamsPerGame * static_cast<unsigned long long>(g);
    CounterRng state_rng(seed, base + kStateStream);
    CounterRng outcome_rng(seed, base + kOutcomeStream);

    GameRecord rec;
    rec.game_index = g;
    rec.state = draw_state(mech.state_probs, state_rng.next_double());
    rec.act = mech.act(batch.reports, rec.state);
    rec.outcome = outcome_rng.next_bernoulli(true_p) ? 1 : 0;
    rec.observed = !(game.observation == ObservationMode::Conditional && rec.act == 0);
    rec.pays.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      rec.pays[static_cast<size_t>(i)] =
          mech.pay[static_cast<size_t>(i)](batch.reports, rec.outcome, rec.state);
    rec.briber_value = rec.act ? action_value - bribe_total : 0.0;
    batch.games.push_back(std::move(rec));
  }
  return batch;
}

std::string trace_to_csv(const GameBatch& batch) {
  std::ostringstream out;
  out << "# schema=beldec.trace.v1\n";
  size_t n = batch.beliefs.size();
  std::vector<std::string> row = {"seed", "game", "n", "true_p", "state", "act", "outcome"};
  for (size_t i = 1; i <= n; ++i) row.push_back("bribe_" + std::to_string(i));
  for (size_t i = 1; i <= n; ++i) row.push_back("report_" + std::to_string(i));
  for (size_t i = 1; i <= n; ++i) row.push_back("pay_" + std::to_string(i));
  row.push_back("briber_value");
  write_csv_row(out, row);

  for (const GameRecord& rec : batch.games) {
    row.clear();
    row.push_back(std::to_string(batch.seed));
    row.push_back(std::to_string(rec.game_index));
    row.push_back(std::to_string(n));
    row.push_back(format_double(batch.true_p));
    row.push_back(std::to_string(rec.state));
    row.push_back(std::to_string(rec.act));
    row.push_back(rec.observed ? std::to_string(rec.outcome) : std::string("NA"));
    for (double c : batch.bribes) row.push_back(format_double(c));
    for (double r : batch.reports) row.push_back(format_double(r));
    for (double p : rec.pays) row.push_back(format_double(p));
    row.push_back(format_double(rec.briber_value));
    write_csv_row(out, row);
  }
  return out.str();
}

void write_trace_csv(const GameBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << trace_to_csv(batch);
}

BudgetCheck budget_check(const RandomizedMechanism& mech, double grid, double tol) {
  if (!(grid > 0 && grid <= 1)) throw std::invalid_argument("budget_check: grid step in (0,1]");
  std::vector<double> levels;
  long cells = std::lround(std::ceil(1.0 / grid));
  for (long k = 0; k <= cells; ++k) levels.push_back(std::min(1.0, static_cast<double>(k) * grid));

  BudgetCheck out;
  out.declared = mech.budget;
  std::vector<size_t> idx(static_cast<size_t>(mech.arity), 0);
  std::vector<double> reports(static_cast<size_t>(mech.arity));
  bool more = true;
  while (more) {
    for (size_t j = 0; j < idx.size(); ++j) reports[j] = levels[idx[j]];
    for (int o : {0, 1}) {
      double total = 0;
      for (int i = 0; i < mech.arity; ++i) total += mech_epay(mech, i, reports, o);
      if (total > out.worst_total) {
        out.worst_total = total;
        out.worst_reports = reports;
        out.worst_outcome = o;
      }
    }
    more = false;
    for (size_t j = 0; j < idx.size(); ++j) {
      if (++idx[j] < levels.size()) {
        more = true;
        break;
      }
      idx[j] = 0;
    }
  }
  out.holds = out.worst_total <= out.declared + tol;
  return out;
}

MonteCarloManip monte_carlo_manip(const SingleMechanism& mech, double incentive, long trials,
                                  unsigned long long seed, double report_grid) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_manip: need at least one trial");
  CounterRng rng(seed, kManipStream);
  MonteCarloManip out;
  for (long t = 0; t < trials; ++t) {
    double q = rng.next_double();
    RecommenderType type{q, incentive, {}};
    double r = optimal_report(mech, type, report_grid);
    double gap = std::abs(pact_eval(mech.decision, std::span<const double>(&r, 1)) -
                          pact_eval(mech.decision, std::span<const double>(&q, 1)));
    if (gap > out.max_gap) {
      out.max_gap = gap;
      out.worst_belief = q;
      out.worst_report = r;
    }
  }
  return out;
}

}  // namespace beldec
