#include "mbc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mbc/oracle.hpp"
#include "mbc/parallel.hpp"
#include "mbc/rl.hpp"
#include "mbc/rng.hpp"

namespace mbc {

MetricsReport compute_metrics(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("compute_metrics: no pairs");
  MetricsReport r;
  r.n_instances = static_cast<int>(pairs.size());
  double eta_sum = 0.0;
  double zeta_sum = 0.0;
  int eta_n = 0;
  int zeta_n = 0;
  for (auto [exact, approx] : pairs) {
    if (exact != 0.0) {
      eta_sum += std::abs(exact - approx) / exact;
      ++eta_n;
    } else {
      ++r.n_excluded;
    }
    if (exact == 0.0 && approx == 0.0) {
      zeta_sum += 1.0;
      ++zeta_n;
    } else if (exact == 0.0 || approx == 0.0) {
      ++r.n_excluded_zeta;
    } else {
      zeta_sum += std::max(exact / approx, approx / exact);
      ++zeta_n;
    }
  }
  if (eta_n == 0) throw std::invalid_argument("compute_metrics: every pair has v* = 0");
  r.eta = eta_sum / eta_n;
  r.zeta = zeta_n > 0 ? zeta_sum / zeta_n : 1.0;
  return r;
}

double GreedyPolicy::play(const GameState& s, std::uint64_t) const {
  return greedy_rollout(s, *valuer_);
}

double RandomPolicy::play(const GameState& s, std::uint64_t seed) const {
  return random_policy_value(s, episodes_, seed);
}

double OraclePolicy::play(const GameState& s, std::uint64_t) const {
  return static_cast<double>(exact_value(s));
}

double QNetworkPolicy::play(const GameState& s, std::uint64_t) const {
  return q_policy_value(s, *net_).value;
}

MetricsReport evaluate_policy(std::span<const SolvedInstance> dataset, const Policy& policy,
                              std::uint64_t seed, int threads) {
  const int n = static_cast<int>(dataset.size());
  std::vector<std::pair<double, double>> pairs(n);
  std::vector<double> seconds(n);
  parallel_for(n, threads, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    double v = 0.0;
    try {
      v = policy.play(dataset[i].state, derive_seed(seed, "eval", i));
    } catch (const std::exception& e) {
      throw std::runtime_error("policy " + policy.name() + " failed on instance '" +
                               dataset[i].id + "': " + e.what());
    }
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    pairs[i] = {static_cast<double>(dataset[i].exact_value), v};
  });
  MetricsReport r = compute_metrics(pairs);
  double total = 0.0;
  for (double s : seconds) total += s;
  r.mean_time_s = total / n;
  return r;
}

std::vector<ActionValueRow> inspect_action_values(const GameState& s, const StateValuer& valuer,
                                                  double tolerance) {
  if (is_terminal(s)) throw std::invalid_argument("inspect_action_values: terminal state");
  std::vector<ActionValueRow> rows;
  for (const auto& [a, t] : successors(s)) {
    if (a.is_skip()) continue;
    const double future = is_terminal(t.state) ? static_cast<double>(terminal_score(t.state))
                                               : valuer.value(t.state);
    rows.push_back({a.node, static_cast<double>(t.reward) + future, false});
  }
  if (rows.empty()) return rows;
  const bool maximize = current_player(s) == Player::Defender;
  double best = rows.front().value;
  for (const auto& r : rows) best = maximize ? std::max(best, r.value) : std::min(best, r.value);
  for (auto& r : rows) r.optimal = std::abs(r.value - best) <= tolerance;
  return rows;
}

}  // namespace mbc
