#include "branchmc/fullnonlinear.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "branchmc/semilinear.hpp"

namespace branchmc {

GhostScheme ghost_scheme(NonlinearScheme scheme) {
  switch (scheme) {
    case NonlinearScheme::V1:
      return GhostScheme::V1;
    case NonlinearScheme::V2:
      return GhostScheme::V2;
    case NonlinearScheme::V3:
      return GhostScheme::V3;
  }
  throw std::invalid_argument("unknown nonlinear scheme");
}

RecursionConfig recursion_config(const NonlinearSchemeConfig& config) {
  RecursionConfig rc;
  rc.scheme = ghost_scheme(config.scheme);
  rc.laws = config.laws;
  rc.nested_order = config.nested_order;
  rc.node_budget = config.node_budget;
  return rc;
}

double hessian_weight_v1(const Mat& a, const Mat& sigma_inv, const Vec& w, double dt) {
  const Vec y = sigma_inv.transpose() * w;
  const Mat m = (y * y.transpose() - dt * sigma_inv.transpose() * sigma_inv) / (dt * dt);
  return contract(a, m);
}

double hessian_weight_v23(const Mat& a, const Mat& sigma_inv, const Vec& w1, const Vec& w2, double dt) {
  const Vec y1 = sigma_inv.transpose() * w1;
  const Vec y2 = sigma_inv.transpose() * w2;
  return 2.0 * y1.dot(a * y2) / (dt * dt);
}

double gradient_weight_v23(const Vec& b, const Mat& sigma_inv, const Vec& w1, double dt) {
  return std::numbers::sqrt2 * gradient_weight(b, sigma_inv, w1, dt);
}

NonlinearEstimator::NonlinearEstimator(const Problem& problem, const NonlinearSchemeConfig& config)
    : recursion_(problem, recursion_config(config)) {}

namespace {

double estimate_with(NonlinearScheme scheme, const Problem& problem, const NonlinearSchemeConfig& config,
                     RandomStream& rng) {
  NonlinearSchemeConfig cfg = config;
  cfg.scheme = scheme;
  return NonlinearEstimator(problem, cfg).value(rng);
}

}  // namespace

double estimate_v1(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng) {
  return estimate_with(NonlinearScheme::V1, problem, config, rng);
}

double estimate_v2(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng) {
  return estimate_with(NonlinearScheme::V2, problem, config, rng);
}

double estimate_v3(const Problem& problem, const NonlinearSchemeConfig& config, RandomStream& rng) {
  return estimate_with(NonlinearScheme::V3, problem, config, rng);
}

}  // namespace branchmc
