#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mbc {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> gradient, AdamState& state,
               const AdamConfig& cfg);

}  // namespace mbc
