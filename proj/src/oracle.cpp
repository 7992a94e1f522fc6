#include "mbc/oracle.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "mbc/rng.hpp"

namespace mbc {

namespace {

std::string state_key(const GameState& s) {
  std::string key;
  key.reserve(16 + 4 * (s.graph.size() + 2 * s.graph.arcs().size() + s.attacked.size()));
  auto put = [&key](std::int32_t x) { key.append(reinterpret_cast<const char*>(&x), sizeof x); };
  put(s.budgets.omega);
  put(s.budgets.phi);
  put(s.budgets.lambda);
  put(static_cast<std::int32_t>(s.graph.size()));
  for (NodeId v : s.graph.nodes()) put(v);
  put(static_cast<std::int32_t>(s.graph.arcs().size()));
  for (auto [u, v] : s.graph.arcs()) {
    put(u);
    put(v);
  }
  for (NodeId v : s.attacked) put(v);
  return key;
}

class Minimax {
 public:
  explicit Minimax(bool memoize) : memoize_(memoize) {}

  Weight value(const GameState& s) {
    if (is_terminal(s)) return terminal_score(s);
    std::string key;
    if (memoize_) {
      key = state_key(s);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const bool maximize = current_player(s) == Player::Defender;
    Weight best = maximize ? std::numeric_limits<Weight>::min() : std::numeric_limits<Weight>::max();
    for (const auto& [a, t] : successors(s)) {
      const Weight q = t.reward + value(t.state);
      best = maximize ? std::max(best, q) : std::min(best, q);
    }
    if (memoize_) memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  bool memoize_;
  std::unordered_map<std::string, Weight> memo_;
};

/// Calls `fn` on every subset of `pool` with at most `k` elements.
void for_each_subset(const NodeSet& pool, int k, const std::function<void(const NodeSet&)>& fn) {
  NodeSet current;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    fn(current);
    if (static_cast<int>(current.size()) == k) return;
    for (std::size_t i = start; i < pool.size(); ++i) {
      current.push_back(pool[i]);
      rec(i + 1);
      current.pop_back();
    }
  };
  rec(0);
}

NodeSet minus(const NodeSet& a, const NodeSet& b) {
  NodeSet sb = b;
  std::sort(sb.begin(), sb.end());
  NodeSet out;
  std::set_difference(a.begin(), a.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

}  // namespace

OracleResult minimax_value(const GameState& s, bool memoize) {
  Minimax search(memoize);
  OracleResult result;
  result.value = search.value(s);

  GameState cur = s;
  bool root = true;
  while (!is_terminal(cur)) {
    const bool maximize = current_player(cur) == Player::Defender;
    std::optional<std::pair<Weight, Transition>> best;
    Action best_action;
    for (auto& [a, t] : successors(cur)) {
      const Weight q = t.reward + search.value(t.state);
      if (root && !a.is_skip()) result.action_values.emplace(a.node, q);
      if (!best || (maximize ? q > best->first : q < best->first)) {
        best.emplace(q, std::move(t));
        best_action = a;
      }
    }
    result.principal_variation.push_back(best_action);
    cur = std::move(best->second.state);
    root = false;
  }
  return result;
}

Weight exact_value(const GameState& s) { return Minimax(true).value(s); }

Weight set_enumeration_value(const Graph& g, const Budgets& budgets) {
  const NodeSet& all = g.nodes();
  Weight best_d = std::numeric_limits<Weight>::min();
  for_each_subset(all, budgets.omega, [&](const NodeSet& d) {
    const NodeSet after_d = minus(all, d);
    Weight best_i = std::numeric_limits<Weight>::max();
    for_each_subset(after_d, budgets.phi, [&](const NodeSet& i) {
      const NodeSet after_i = minus(after_d, i);
      Weight best_p = std::numeric_limits<Weight>::min();
      for_each_subset(after_i, budgets.lambda, [&](const NodeSet& p) {
        best_p = std::max(best_p, score_full_game(g, MoveSets{d, i, p}));
      });
      best_i = std::min(best_i, best_p);
    });
    best_d = std::max(best_d, best_i);
  });
  return best_d;
}

double random_policy_value(const GameState& s, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("random_policy_value: episodes must be >= 1");
  Rng rng(seed);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    GameState cur = s;
    Weight value = 0;
    while (!is_terminal(cur)) {
      const NodeSet legal = legal_actions(cur);
      const Action a = legal.empty()
                           ? Action::skip()
                           : Action{legal[uniform_int(rng, 0, static_cast<int>(legal.size()) - 1)]};
      Transition t = next_state(cur, a);
      value += t.reward;
      cur = std::move(t.state);
    }
    total += static_cast<double>(value + terminal_score(cur));
  }
  return total / episodes;
}

std::vector<GameState> exhaustive_random_support(const GameState& s0, const StageKey& target) {
  std::vector<GameState> out;
  std::set<std::string> seen;
  std::vector<GameState> stack{s0};
  while (!stack.empty()) {
    GameState s = std::move(stack.back());
    stack.pop_back();
    const auto stage = stage_of(s);
    if (!stage || *stage < target) continue;
    if (!seen.insert(state_key(s)).second) continue;
    if (*stage == target) {
      out.push_back(std::move(s));
      continue;
    }
    for (auto& [a, t] : successors(s)) stack.push_back(std::move(t.state));
  }
  return out;
}

std::vector<GameState> optimal_play_states(const GameState& s0, const StageKey& target) {
  std::vector<GameState> out;
  std::set<std::string> seen;
  Minimax search(true);
  std::vector<GameState> stack{s0};
  while (!stack.empty()) {
    GameState s = std::move(stack.back());
    stack.pop_back();
    const auto stage = stage_of(s);
    if (!stage || *stage < target) continue;
    if (!seen.insert(state_key(s)).second) continue;
    if (*stage == target) {
      out.push_back(std::move(s));
      continue;
    }
    const Weight v = search.value(s);
    for (auto& [a, t] : successors(s)) {
      if (t.reward + search.value(t.state) == v) stack.push_back(std::move(t.state));
    }
  }
  return out;
}

Weight replay_value(const GameState& s, const std::vector<Action>& actions) {
  GameState cur = s;
  Weight total = 0;
  for (Action a : actions) {
    Transition t = next_state(cur, a);
    total += t.reward;
    cur = std::move(t.state);
  }
  return total + terminal_score(cur);
}

}  // namespace mbc
