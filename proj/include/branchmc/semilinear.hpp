#pragma once

#include <optional>

#include "branchmc/recursion.hpp"

namespace branchmc {

enum class SemiScheme { Original, Renorm, RenormAntithetic };

struct SemiSchemeConfig {
  SemiScheme scheme = SemiScheme::Original;
  int nested_order = 1;
  ArrivalLaw law_u = ArrivalLaw::exponential(0.4);
  ArrivalLaw law_grad = ArrivalLaw::gamma(0.5, 2.5);
  std::optional<double> clip_dt;
  std::size_t node_budget = 100000;

  /// Original: exponential(0.4) for u, gamma(0.5, 2.5) for Du.
  /// Renormalized variants: exponential(0.4) for both.
  static SemiSchemeConfig defaults(SemiScheme scheme);
};

GhostScheme ghost_scheme(SemiScheme scheme);
RecursionConfig recursion_config(const SemiSchemeConfig& config);

/// b · (σ0ᵀ)⁻¹ Ŵ / ΔT.
double gradient_weight(const Vec& b, const Mat& sigma_inv, const Vec& w, double dt);

/// Reusable per-thread estimator for one problem and configuration.
class SemilinearEstimator {
 public:
  SemilinearEstimator(const Problem& problem, const SemiSchemeConfig& config);

  double value(RandomStream& rng) { return recursion_.draw(rng, Quantity::Value); }
  /// One draw of d·Du(0, x0) with d the problem's gradient direction.
  double root_gradient(RandomStream& rng) { return recursion_.draw(rng, Quantity::Gradient); }
  BackwardRecursion& recursion() { return recursion_; }

 private:
  BackwardRecursion recursion_;
};

double estimate_original(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng);
/// Throws std::invalid_argument for nested order < 1.
double estimate_nested(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng);
double estimate_renorm(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng);
double estimate_renorm_antithetic(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng);
double estimate_root_gradient(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng);

}  // namespace branchmc
