#pragma once

#include <span>
#include <string>
#include <vector>

#include "beldec/agents.hpp"
#include "beldec/conditional.hpp"

namespace beldec {

enum class GameKind { Plain, Decoupled, Cpm };
enum class ObservationMode { Unconditional, Conditional };

// A playable mechanism: the randomized form drives both simulation and the
// static checks. Conditional observation (the outcome stays hidden unless the
// mechanism acts) requires payments that ignore hidden outcomes, so it is only
// allowed for the decoupled and critical-payment assemblies.
struct GameMechanism {
  GameKind kind = GameKind::Plain;
  ObservationMode observation = ObservationMode::Unconditional;
  RandomizedMechanism randomized;
  double alpha = 1.0;      // Decoupled only
  double threshold = 0.5;  // Cpm only

  int arity() const { return randomized.arity; }
};

GameMechanism make_plain_game(std::vector<ScoringRule> scorings, DecisionRule decision,
                              ObservationMode observation = ObservationMode::Unconditional,
                              int act_states = 64);
GameMechanism make_decoupled_game(std::vector<ScoringRule> scorings, DecisionRule decision,
                                  double alpha,
                                  ObservationMode observation = ObservationMode::Conditional,
                                  int act_states = 64);
GameMechanism make_cpm_game(double threshold, int arity,
                            ObservationMode observation = ObservationMode::Conditional);

// Best response of one recommender: maximizes belief-weighted expected payment
// plus incentive times acting probability, the others pinned at their beliefs.
double best_response_report(const GameMechanism& game, int index, std::span<const double> beliefs,
                            double incentive, double report_grid = 1e-4);

struct GameRecord {
  long game_index = 0;
  int state = 0;    // internal randomness draw
  int act = 0;
  int outcome = 0;  // realized outcome; hidden from the trace when not observed
  bool observed = true;
  std::vector<double> pays;
  double briber_value = 0;  // action value minus bribes paid, zero unless acting
};

struct GameBatch {
  unsigned long long seed = 0;
  double true_p = 0.5;
  std::vector<double> beliefs;
  std::vector<double> bribes;   // incentives in force, one per recommender
  std::vector<double> reports;  // deterministic best responses, shared by all games
  double action_value = 0;      // briber's value for the act (0: no briber)
  ObservationMode observation = ObservationMode::Unconditional;
  std::vector<GameRecord> games;
};

// Plays `count` independent games. Reports are deterministic best responses
// computed once; per-game randomness (internal state, outcome) comes from
// counter streams indexed by game, so traces are reproducible from the seed
// alone and independent of batch splitting.
GameBatch run_games(const GameMechanism& game, std::span<const double> beliefs, double true_p,
                    std::span<const double> incentives, double action_value, long count,
                    unsigned long long seed, double report_grid = 1e-4);

// CSV trace: a schema comment line, a header, one row per game. Hidden
// outcomes are written as NA.
std::string trace_to_csv(const GameBatch& batch);
void write_trace_csv(const GameBatch& batch, const std::string& path);

struct BudgetCheck {
  bool holds = false;
  double declared = 0;
  double worst_total = 0;  // max over the report grid and both outcomes
  std::vector<double> worst_reports;
  int worst_outcome = 0;
};
BudgetCheck budget_check(const RandomizedMechanism& mech, double grid = 0.25, double tol = 1e-9);

struct MonteCarloManip {
  double max_gap = 0;  // largest |pact(best response) - pact(belief)| sampled
  double worst_belief = 0;
  double worst_report = 0;
};
// Samples beliefs uniformly and measures the acting-probability gap induced by
// the incentive; a randomized lower estimate of the worst case.
MonteCarloManip monte_carlo_manip(const SingleMechanism& mech, double incentive, long trials,
                                  unsigned long long seed, double report_grid = 1e-3);

}  // namespace beldec
