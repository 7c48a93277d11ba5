#pragma once

#include <span>

#include "branchmc/semilinear.hpp"

namespace branchmc {

enum class EulerScheme { OriginalEuler, RenormEuler, RenormAntitheticEuler };

struct EulerConfig {
  double dt = 0.0;  // δt
  EulerScheme scheme = EulerScheme::OriginalEuler;
};

/// Treatment of the first sub-increment of a segment.
enum class FirstIncrement { Keep, Suppress, Negate };

/// Euler transport over [t_start, t_start + span]: ⌊span/δt⌋ steps of δt and
/// a nonzero remainder step, sub-increment i read from
/// `sub_increments[i·d .. i·d + d)`. Drift is always applied; only the first
/// sub-step's Brownian part is affected by `first`.
Vec euler_segment(const Diffusion& diffusion, double t_start, double span, double euler_dt, const Vec& x_start,
                  std::span<const double> sub_increments, FirstIncrement first = FirstIncrement::Keep);

/// b · (σ0(t_start, x_start)ᵀ)⁻¹ Ŵ¹ / min(δt, ΔT).
double euler_gradient_weight(const Vec& b, const Mat& sigma_inv_at_start, const Vec& first_increment, double span,
                             double euler_dt);

GhostScheme ghost_scheme(EulerScheme scheme);
RecursionConfig recursion_config(const SemiSchemeConfig& base, const EulerConfig& euler);

class EulerEstimator {
 public:
  EulerEstimator(const Problem& problem, const SemiSchemeConfig& base, const EulerConfig& euler);

  double value(RandomStream& rng) { return recursion_.draw(rng, Quantity::Value); }
  double root_gradient(RandomStream& rng) { return recursion_.draw(rng, Quantity::Gradient); }
  BackwardRecursion& recursion() { return recursion_; }

 private:
  BackwardRecursion recursion_;
};

double estimate_semilinear_euler(const Problem& problem, const SemiSchemeConfig& base, const EulerConfig& euler,
                                 RandomStream& rng);

}  // namespace branchmc
