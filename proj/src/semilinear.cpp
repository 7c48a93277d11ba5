#include "branchmc/semilinear.hpp"

#include <stdexcept>

namespace branchmc {

SemiSchemeConfig SemiSchemeConfig::defaults(SemiScheme scheme) {
  SemiSchemeConfig cfg;
  cfg.scheme = scheme;
  if (scheme != SemiScheme::Original) cfg.law_grad = ArrivalLaw::exponential(0.4);
  return cfg;
}

GhostScheme ghost_scheme(SemiScheme scheme) {
  switch (scheme) {
    case SemiScheme::Original:
      return GhostScheme::None;
    case SemiScheme::Renorm:
      return GhostScheme::Renorm;
    case SemiScheme::RenormAntithetic:
      return GhostScheme::RenormAntithetic;
  }
  throw std::invalid_argument("unknown semilinear scheme");
}

RecursionConfig recursion_config(const SemiSchemeConfig& config) {
  RecursionConfig rc;
  rc.scheme = ghost_scheme(config.scheme);
  rc.laws.value = config.law_u;
  rc.laws.gradient = config.law_grad;
  rc.laws.hessian = config.law_grad;
  rc.nested_order = config.nested_order;
  rc.clip_dt = config.clip_dt;
  rc.node_budget = config.node_budget;
  return rc;
}

double gradient_weight(const Vec& b, const Mat& sigma_inv, const Vec& w, double dt) {
  return b.dot(sigma_inv.transpose() * w) / dt;
}

SemilinearEstimator::SemilinearEstimator(const Problem& problem, const SemiSchemeConfig& config)
    : recursion_(problem, recursion_config(config)) {}

double estimate_original(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng) {
  SemiSchemeConfig cfg = config;
  cfg.scheme = SemiScheme::Original;
  cfg.nested_order = 1;
  return SemilinearEstimator(problem, cfg).value(rng);
}

double estimate_nested(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng) {
  if (config.nested_order < 1) throw std::invalid_argument("nested order must be >= 1");
  SemiSchemeConfig cfg = config;
  cfg.scheme = SemiScheme::Original;
  return SemilinearEstimator(problem, cfg).value(rng);
}

double estimate_renorm(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng) {
  SemiSchemeConfig cfg = config;
  cfg.scheme = SemiScheme::Renorm;
  return SemilinearEstimator(problem, cfg).value(rng);
}

double estimate_renorm_antithetic(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng) {
  SemiSchemeConfig cfg = config;
  cfg.scheme = SemiScheme::RenormAntithetic;
  return SemilinearEstimator(problem, cfg).value(rng);
}

double estimate_root_gradient(const Problem& problem, const SemiSchemeConfig& config, RandomStream& rng) {
  return SemilinearEstimator(problem, config).root_gradient(rng);
}

}  // namespace branchmc
