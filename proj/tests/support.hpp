#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "branchmc/rng.hpp"
#include "branchmc/runner.hpp"

namespace testing {

struct Sample {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;

  /// |mean − target| within k standard errors.
  bool within(double target, double k = 3.0) const { return std::abs(mean - target) <= k * stderr_; }
};

/// n draws of f(rng) from one stream.
template <class F>
Sample sample(std::size_t n, std::uint64_t seed, F&& f) {
  branchmc::RandomStream rng(seed, 0);
  branchmc::Accumulator acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(f(rng));
  return {acc.mean, std::sqrt(acc.variance() / static_cast<double>(acc.n)), acc.n};
}

inline bool agree(double a, double se_a, double b, double se_b, double k = 3.0) {
  return std::abs(a - b) <= k * std::sqrt(se_a * se_a + se_b * se_b);
}

}  // namespace testing
