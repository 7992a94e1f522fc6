#include "mbc/game.hpp"

#include <algorithm>
#include <stdexcept>

namespace mbc {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Protection: return "protection";
    case Phase::Attack: return "attack";
    case Phase::Vaccination: return "vaccination";
  }
  return "?";
}

std::string StageKey::label() const {
  static constexpr char kLetters[] = {'P', 'A', 'V'};
  return kLetters[static_cast<int>(phase)] + std::to_string(remaining);
}

StageKey StageKey::parse(const std::string& label) {
  if (label.size() < 2) throw std::invalid_argument("bad stage label '" + label + "'");
  StageKey k;
  switch (label[0]) {
    case 'P': k.phase = Phase::Protection; break;
    case 'A': k.phase = Phase::Attack; break;
    case 'V': k.phase = Phase::Vaccination; break;
    default: throw std::invalid_argument("bad stage label '" + label + "'");
  }
  k.remaining = std::stoi(label.substr(1));
  if (k.remaining < 1) throw std::invalid_argument("bad stage label '" + label + "'");
  return k;
}

int stage_rank(const StageKey& k, const Budgets& max_budgets) {
  switch (k.phase) {
    case Phase::Protection: return k.remaining;
    case Phase::Attack: return max_budgets.lambda + k.remaining;
    case Phase::Vaccination: return max_budgets.lambda + max_budgets.phi + k.remaining;
  }
  return 0;
}

GameState make_state(Graph g, Budgets b, NodeSet attacked) {
  if (b.omega < 0 || b.phi < 0 || b.lambda < 0) {
    throw std::invalid_argument("make_state: negative budget");
  }
  std::sort(attacked.begin(), attacked.end());
  attacked.erase(std::unique(attacked.begin(), attacked.end()), attacked.end());
  for (NodeId v : attacked) {
    if (!g.contains(v)) throw std::invalid_argument("make_state: attacked node not in graph");
  }
  return GameState{std::move(g), b, std::move(attacked)};
}

std::optional<Phase> current_phase(const GameState& s) {
  if (s.budgets.omega > 0) return Phase::Vaccination;
  if (s.budgets.phi > 0) return Phase::Attack;
  if (s.budgets.lambda > 0) return Phase::Protection;
  return std::nullopt;
}

Player current_player(const GameState& s) {
  const auto phase = current_phase(s);
  if (!phase) return Player::Terminal;
  return *phase == Phase::Attack ? Player::Attacker : Player::Defender;
}

bool is_terminal(const GameState& s) { return s.budgets.total() == 0; }

std::optional<StageKey> stage_of(const GameState& s) {
  const auto phase = current_phase(s);
  if (!phase) return std::nullopt;
  switch (*phase) {
    case Phase::Vaccination: return StageKey{Phase::Vaccination, s.budgets.omega};
    case Phase::Attack: return StageKey{Phase::Attack, s.budgets.phi};
    case Phase::Protection: return StageKey{Phase::Protection, s.budgets.lambda};
  }
  return std::nullopt;
}

NodeSet legal_actions(const GameState& s) {
  const auto phase = current_phase(s);
  if (!phase) return {};
  if (*phase == Phase::Vaccination) return s.graph.nodes();
  NodeSet out;
  std::set_difference(s.graph.nodes().begin(), s.graph.nodes().end(), s.attacked.begin(),
                      s.attacked.end(), std::back_inserter(out));
  return out;
}

namespace {

bool is_attacked(const GameState& s, NodeId v) {
  return std::binary_search(s.attacked.begin(), s.attacked.end(), v);
}

}  // namespace

Transition next_state(const GameState& s, Action a) {
  const auto phase = current_phase(s);
  if (!phase) throw std::invalid_argument("next_state: terminal state");

  if (a.is_skip()) {
    if (!legal_actions(s).empty()) {
      throw std::invalid_argument("next_state: skip while actions are available");
    }
    GameState next = s;
    switch (*phase) {
      case Phase::Vaccination: next.budgets.omega = 0; break;
      case Phase::Attack: next.budgets.phi = 0; break;
      case Phase::Protection: next.budgets.lambda = 0; break;
    }
    return {std::move(next), 0};
  }

  if (!s.graph.contains(a.node) || (*phase != Phase::Vaccination && is_attacked(s, a.node))) {
    throw std::invalid_argument("next_state: illegal action " + std::to_string(a.node));
  }
  switch (*phase) {
    case Phase::Vaccination: {
      const Weight w = s.graph.weight(a.node);
      GameState next{remove_node(s.graph, a.node), s.budgets, s.attacked};
      // Attacked nodes only exist after vaccination, but keep the invariant local.
      next.attacked.erase(std::remove(next.attacked.begin(), next.attacked.end(), a.node),
                          next.attacked.end());
      --next.budgets.omega;
      return {std::move(next), w};
    }
    case Phase::Attack: {
      GameState next = s;
      next.attacked.insert(std::lower_bound(next.attacked.begin(), next.attacked.end(), a.node),
                           a.node);
      --next.budgets.phi;
      return {std::move(next), 0};
    }
    case Phase::Protection: {
      const Weight w = s.graph.weight(a.node);
      GameState next{remove_node(s.graph, a.node), s.budgets, s.attacked};
      --next.budgets.lambda;
      return {std::move(next), w};
    }
  }
  throw std::logic_error("next_state: unreachable");
}

std::vector<std::pair<Action, Transition>> successors(const GameState& s) {
  std::vector<std::pair<Action, Transition>> out;
  if (is_terminal(s)) return out;
  const NodeSet legal = legal_actions(s);
  if (legal.empty()) {
    out.emplace_back(Action::skip(), next_state(s, Action::skip()));
    return out;
  }
  out.reserve(legal.size());
  for (NodeId v : legal) out.emplace_back(Action{v}, next_state(s, Action{v}));
  return out;
}

Weight terminal_score(const GameState& s) {
  const NodeSet infected = reachable_from(s.graph, s.attacked);
  Weight saved = 0;
  for (int i = 0; i < s.graph.size(); ++i) {
    if (!std::binary_search(infected.begin(), infected.end(), s.graph.nodes()[i])) {
      saved += s.graph.weights()[i];
    }
  }
  return saved;
}

Weight score_full_game(const Graph& g, const MoveSets& moves) {
  auto sorted = [](NodeSet v) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
      throw std::invalid_argument("score_full_game: repeated node in a move set");
    }
    return v;
  };
  const NodeSet d = sorted(moves.vaccinated);
  const NodeSet i = sorted(moves.attacked);
  const NodeSet p = sorted(moves.protected_);
  auto disjoint = [](const NodeSet& a, const NodeSet& b) {
    NodeSet both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    return both.empty();
  };
  if (!disjoint(d, i) || !disjoint(d, p) || !disjoint(i, p)) {
    throw std::invalid_argument("score_full_game: move sets must be pairwise disjoint");
  }

  Weight removed_reward = 0;
  Graph rest = g;
  for (NodeId v : d) {
    removed_reward += g.weight(v);
    rest = remove_node(rest, v);
  }
  for (NodeId v : p) {
    removed_reward += g.weight(v);
    rest = remove_node(rest, v);
  }
  for (NodeId v : i) {
    if (!rest.contains(v)) throw std::invalid_argument("score_full_game: attacked node absent");
  }
  return removed_reward + terminal_score(GameState{std::move(rest), {}, i});
}

void record_move(MoveSets& moves, const GameState& before, Action a) {
  if (a.is_skip()) return;
  switch (*current_phase(before)) {
    case Phase::Vaccination: moves.vaccinated.push_back(a.node); break;
    case Phase::Attack: moves.attacked.push_back(a.node); break;
    case Phase::Protection: moves.protected_.push_back(a.node); break;
  }
}

}  // namespace mbc
