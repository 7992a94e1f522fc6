#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "mbc/graph.hpp"

namespace mbc {

/// Remaining units per level: vaccination, attack, protection.
struct Budgets {
  int omega = 0;
  int phi = 0;
  int lambda = 0;

  int total() const { return omega + phi + lambda; }
  auto operator<=>(const Budgets&) const = default;
};

enum class Player { Defender, Attacker, Terminal };

/// Game phases, listed bottom-up (the order experts are trained in).
enum class Phase { Protection = 0, Attack = 1, Vaccination = 2 };

const char* phase_name(Phase p);

/// A (phase, units left in that phase) pair; one curriculum expert each.
struct StageKey {
  Phase phase = Phase::Protection;
  int remaining = 1;

  auto operator<=>(const StageKey&) const = default;
  std::string label() const;  // "P1", "A2", "V1", ...
  static StageKey parse(const std::string& label);
};

/// Position in the bottom-up stage order; larger = earlier in the game.
int stage_rank(const StageKey& k, const Budgets& max_budgets);

struct GameState {
  Graph graph;
  Budgets budgets;
  NodeSet attacked;  // sorted; subset of graph nodes

  bool operator==(const GameState&) const = default;
};

GameState make_state(Graph g, Budgets b, NodeSet attacked = {});

/// A unit decision; `skip()` forfeits the current phase when nothing is legal.
struct Action {
  static constexpr NodeId kSkip = -1;
  NodeId node = kSkip;

  static Action skip() { return Action{kSkip}; }
  bool is_skip() const { return node == kSkip; }
  bool operator==(const Action&) const = default;
};

struct Transition {
  GameState state;
  Weight reward = 0;
};

struct MoveSets {
  NodeSet vaccinated;  // D
  NodeSet attacked;    // I
  NodeSet protected_;  // P
};

Player current_player(const GameState& s);
std::optional<Phase> current_phase(const GameState& s);
std::optional<StageKey> stage_of(const GameState& s);
bool is_terminal(const GameState& s);

NodeSet legal_actions(const GameState& s);
Transition next_state(const GameState& s, Action a);

/// Every afterstate of `s` in ascending node order; a single skip transition
/// when no action is legal; empty when `s` is terminal.
std::vector<std::pair<Action, Transition>> successors(const GameState& s);

/// Weight of the nodes not reached by the infection cascade.
Weight terminal_score(const GameState& s);

/// Set-form objective: w(D) + w(P) + weight saved in g - D - P under cascade from I.
Weight score_full_game(const Graph& g, const MoveSets& moves);

/// Records the moves of an episode so its set-form score can be recomputed.
void record_move(MoveSets& moves, const GameState& before, Action a);

}  // namespace mbc
