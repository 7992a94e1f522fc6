#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mbc/game.hpp"

namespace mbc {

struct OracleResult {
  Weight value = 0;
  /// Reward plus optimal value of the afterstate, per legal node.
  std::map<NodeId, Weight> action_values;
  std::vector<Action> principal_variation;
};

/// Exact alternating-play value by unit-step minimax. Ties resolve to the
/// lowest node id. `memoize` caches subgame values by exact labeled state.
OracleResult minimax_value(const GameState& s, bool memoize = true);

/// Value only; cheaper than minimax_value when no tables are needed.
Weight exact_value(const GameState& s);

/// max_{|D|<=Omega} min_{|I|<=Phi} max_{|P|<=Lambda} S(G, D, I, P), all
/// subset cardinalities enumerated.
Weight set_enumeration_value(const Graph& g, const Budgets& budgets);

/// Mean episode value under uniform-random play by both players.
double random_policy_value(const GameState& s, int episodes, std::uint64_t seed);

/// Every state reachable from `s0` by legal play whose stage equals `target`.
std::vector<GameState> exhaustive_random_support(const GameState& s0, const StageKey& target);

/// States visited when both players follow any of their optimal actions,
/// restricted to those whose stage equals `target`.
std::vector<GameState> optimal_play_states(const GameState& s0, const StageKey& target);

/// Replays `actions` from `s`; returns accumulated rewards plus final terminal score.
Weight replay_value(const GameState& s, const std::vector<Action>& actions);

}  // namespace mbc
