#pragma once

#include "branchmc/recursion.hpp"

namespace branchmc {

enum class NonlinearScheme { V1, V2, V3 };

struct NonlinearSchemeConfig {
  NonlinearScheme scheme = NonlinearScheme::V3;
  ArrivalLaws laws;  // exponential(0.4) for every mark class
  int nested_order = 1;
  std::size_t node_budget = 100000;
};

GhostScheme ghost_scheme(NonlinearScheme scheme);
RecursionConfig recursion_config(const NonlinearSchemeConfig& config);

/// a : (σ0ᵀ)⁻¹ (ŴŴᵀ − ΔT I) σ0⁻¹ / ΔT².
double hessian_weight_v1(const Mat& a, const Mat& sigma_inv, const Vec& w, double dt);

/// a : 2 (σ0ᵀ)⁻¹ Ŵ¹(Ŵ²)ᵀ σ0⁻¹ / ΔT².
double hessian_weight_v23(const Mat& a, const Mat& sigma_inv, const Vec& w1, const Vec& w2, double dt);

/// √2 · b · (σ0ᵀ)⁻¹ Ŵ¹ / ΔT. The original particle only sees Ŵ¹/√2, hence
/// the √2.
double gradient_weight_v23(const Vec& b, const Mat& sigma_inv, const Vec& w1, double dt);

class NonlinearEstimator {
 public:
  NonlinearEstimator(const Problem& problem, const NonlinearSchemeConfig& config);

  double value(RandomStream& rng) { return recursion_.draw(rng, Quantity::Value); }
  double root_gradient(RandomStream& rng) { return recursion_.draw(rng, Quantity::Gradient); }
  BackwardRecursion& recursion() { return recursion_; }

 private:
  BackwardRecursion recursion_;
};

double estimate_v1(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng);
double estimate_v2(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng);
double estimate_v3(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng);

}  // namespace branchmc
