#include "branchmc/euler.hpp"

#include <algorithm>
#include <stdexcept>

namespace branchmc {

Vec euler_segment(const Diffusion& diffusion, double t_start, double span, double euler_dt, const Vec& x_start,
                  std::span<const double> sub_increments, FirstIncrement first) {
  const std::vector<double> steps = euler_steps(span, euler_dt);
  const int d = diffusion.dim();
  if (sub_increments.size() != steps.size() * static_cast<std::size_t>(d)) {
    throw std::invalid_argument("Euler segment needs one increment per sub-step");
  }
  Vec x = x_start;
  double t = t_start;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Vec w = Eigen::Map<const Eigen::VectorXd>(sub_increments.data() + i * d, d);
    if (i == 0 && first == FirstIncrement::Suppress) w.setZero();
    if (i == 0 && first == FirstIncrement::Negate) w = -w;
    x = advance(x, diffusion.drift(t, x), steps[i], diffusion.volatility(t, x), w);
    t += steps[i];
  }
  return x;
}

double euler_gradient_weight(const Vec& b, const Mat& sigma_inv_at_start, const Vec& first_increment, double span,
                             double euler_dt) {
  return gradient_weight(b, sigma_inv_at_start, first_increment, std::min(euler_dt, span));
}

GhostScheme ghost_scheme(EulerScheme scheme) {
  switch (scheme) {
    case EulerScheme::OriginalEuler:
      return GhostScheme::None;
    case EulerScheme::RenormEuler:
      return GhostScheme::Renorm;
    case EulerScheme::RenormAntitheticEuler:
      return GhostScheme::RenormAntithetic;
  }
  throw std::invalid_argument("unknown Euler scheme");
}

RecursionConfig recursion_config(const SemiSchemeConfig& base, const EulerConfig& euler) {
  if (!(euler.dt > 0.0)) throw std::invalid_argument("Euler time step must be > 0");
  RecursionConfig rc = recursion_config(base);
  rc.scheme = ghost_scheme(euler.scheme);
  rc.euler_dt = euler.dt;
  return rc;
}

EulerEstimator::EulerEstimator(const Problem& problem, const SemiSchemeConfig& base, const EulerConfig& euler)
    : recursion_(problem, recursion_config(base, euler)) {}

double estimate_semilinear_euler(const Problem& problem, const SemiSchemeConfig& base, const EulerConfig& euler,
                                 RandomStream& rng) {
  return EulerEstimator(problem, base, euler).value(rng);
}

}  // namespace branchmc
