#include "branchmc/recursion.hpp"

#include <array>
#include <cmath>

#include "branchmc/euler.hpp"
#include "branchmc/fullnonlinear.hpp"
#include "branchmc/semilinear.hpp"

namespace branchmc {

namespace {

bool second_order(GhostScheme s) { return s == GhostScheme::V1 || s == GhostScheme::V2 || s == GhostScheme::V3; }

bool split_increments(GhostScheme s) { return s == GhostScheme::V2 || s == GhostScheme::V3; }

FirstIncrement first_increment_rule(GhostScheme s, int order) {
  if (order == 0) return FirstIncrement::Keep;
  if (s == GhostScheme::Renorm) return FirstIncrement::Suppress;
  if (s == GhostScheme::RenormAntithetic) return FirstIncrement::Negate;
  throw std::invalid_argument("ghost order has no Euler transport rule for this scheme");
}

Vec map_increment(const double* data, int d) { return Eigen::Map<const Eigen::VectorXd>(data, d); }

}  // namespace

BackwardRecursion::BackwardRecursion(const Problem& problem, RecursionConfig config)
    : problem_(&problem),
      cfg_(std::move(config)),
      spec_(GhostSchemeSpec::of(cfg_.scheme)),
      m_(problem.generator.m()) {
  problem.generator.validate();
  if (cfg_.nested_order < 1) throw std::invalid_argument("nested order must be >= 1");
  if (cfg_.euler_dt < 0.0) throw std::invalid_argument("Euler time step must be > 0");
  if (!problem.generator.is_semilinear() && !second_order(cfg_.scheme)) {
    throw std::invalid_argument("problem '" + problem.name + "' has Hessian terms; use v1, v2 or v3");
  }
  if (cfg_.euler_dt > 0.0 && second_order(cfg_.scheme)) {
    throw std::invalid_argument("Euler transport is only available for the semilinear schemes");
  }
  if (!problem.diffusion.is_constant() && cfg_.euler_dt == 0.0) {
    throw std::invalid_argument("problem '" + problem.name + "' has variable coefficients; use an Euler scheme");
  }
  if (cfg_.clip_dt && !(*cfg_.clip_dt > 0.0)) throw std::invalid_argument("clip_dt must be > 0");
  if (problem.diffusion.is_constant()) {
    mu_ = problem.diffusion.drift(0.0, problem.x0);
    sigma_ = problem.diffusion.volatility(0.0, problem.x0);
    sigma_inv_ = problem.diffusion.sigma_inverse();
  }
}

void BackwardRecursion::sample(RandomStream& rng, Quantity quantity, Skeleton& out) const {
  SkeletonOptions opts;
  opts.laws = cfg_.laws;
  opts.increments_per_node = spec_.increments_per_node;
  opts.euler_dt = cfg_.euler_dt;
  opts.nested_order = cfg_.nested_order;
  opts.root_mark = quantity == Quantity::Gradient ? 1 : 0;
  opts.node_budget = cfg_.node_budget;
  sample_skeleton(*problem_, opts, rng, out);
}

double BackwardRecursion::draw(RandomStream& rng, Quantity quantity) {
  sample(rng, quantity, skeleton_);
  return evaluate(skeleton_, quantity);
}

double BackwardRecursion::evaluate(const Skeleton& sk, Quantity quantity) {
  const Problem& p = *problem_;
  const SkeletonNode& root = sk.root();
  if (quantity == Quantity::Gradient) {
    root_coeffs_.h = 0.0;
    root_coeffs_.c = 0.0;
    root_coeffs_.b.assign(1, p.gradient_direction(0.0, p.x0));
    return factor(sk, root, 0.0, p.x0, root_coeffs_, 0);
  }
  const double value = psi(sk, root, p.x0, transport(sk, root, p.x0, 0), 0);
  const int mirror = spec_.mirror_order();
  if (mirror < 0) return value;
  const double mirrored = psi(sk, root, p.x0, transport(sk, root, p.x0, mirror), 0);
  return 0.5 * (value + mirrored);
}

double BackwardRecursion::psi(const Skeleton& sk, const SkeletonNode& node, const Vec& start, const Vec& end,
                              std::size_t depth) {
  const Problem& p = *problem_;
  const ArrivalLaw& law = cfg_.laws.for_class(mark_class(node.mark, m_));
  if (node.terminal) {
    double v = p.terminal(end);
    // Terminal control variate of the original scheme; the ghost difference
    // plays this role in the renormalized schemes.
    if (cfg_.scheme == GhostScheme::None && node.mark != 0) v -= p.terminal(start);
    return v / survival(law, node.dt);
  }
  while (scratch_.size() <= depth) scratch_.emplace_back();
  GeneratorCoeffs& coeffs = scratch_[depth];
  evaluate_generator_coeffs(p, node.arrival, end, coeffs);

  const auto kids = sk.children(node);
  const std::size_t n = static_cast<std::size_t>(sk.nested_order);
  const std::size_t slots = kids.size() / n;
  double prod = 1.0;
  for (std::size_t slot = 0; slot < slots; ++slot) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += factor(sk, kids[slot * n + r], node.arrival, end, coeffs, depth + 1);
    prod *= acc / static_cast<double>(n);
  }
  return (coeffs.h + coeffs.c * prod) / density(law, node.dt);
}

double BackwardRecursion::factor(const Skeleton& sk, const SkeletonNode& child, double t_start, const Vec& x_start,
                                 const GeneratorCoeffs& coeffs, std::size_t depth) {
  const MarkClass cls = mark_class(child.mark, m_);
  std::array<double, 7> values{};
  for (int order : spec_.required_orders(cls)) {
    values[order] = psi(sk, child, x_start, transport(sk, child, x_start, order), depth);
  }
  const double combined = spec_.combine(cls, values);
  if (cls == MarkClass::Value) return combined;
  return combined * weight(sk, cls, child, t_start, x_start, coeffs);
}

double BackwardRecursion::weight(const Skeleton& sk, MarkClass cls, const SkeletonNode& child, double t_start,
                                 const Vec& x_start, const GeneratorCoeffs& coeffs) const {
  const int d = sk.dim;
  const Vec w1 = map_increment(sk.increment_data(child, 0), d);
  if (cls == MarkClass::Gradient) {
    const Vec& b = coeffs.b[child.mark - 1];
    if (cfg_.euler_dt > 0.0) {
      const Mat s_inv =
          problem_->diffusion.is_constant() ? sigma_inv_ : problem_->diffusion.sigma_inverse_at(t_start, x_start);
      return euler_gradient_weight(b, s_inv, w1, weight_dt(child.dt), cfg_.euler_dt);
    }
    if (split_increments(cfg_.scheme)) return gradient_weight_v23(b, sigma_inv_, w1, weight_dt(child.dt));
    return gradient_weight(b, sigma_inv_, w1, weight_dt(child.dt));
  }
  const Mat& a = coeffs.a[child.mark - 1 - m_];
  if (cfg_.scheme == GhostScheme::V1) return hessian_weight_v1(a, sigma_inv_, w1, weight_dt(child.dt));
  const Vec w2 = map_increment(sk.increment_data(child, 1), d);
  return hessian_weight_v23(a, sigma_inv_, w1, w2, weight_dt(child.dt));
}

Vec BackwardRecursion::transport(const Skeleton& sk, const SkeletonNode& node, const Vec& start, int order) const {
  const int d = sk.dim;
  if (cfg_.euler_dt > 0.0) {
    const std::span<const double> subs(sk.increment_data(node, 0), static_cast<std::size_t>(node.increment_count) * d);
    return euler_segment(problem_->diffusion, node.birth, node.dt, cfg_.euler_dt, start, subs,
                         first_increment_rule(cfg_.scheme, order));
  }
  const Vec w1 = map_increment(sk.increment_data(node, 0), d);
  if (split_increments(cfg_.scheme)) {
    const Vec w2 = map_increment(sk.increment_data(node, 1), d);
    return advance(start, mu_, node.dt, sigma_, spec_.contribution(order, w1, w2));
  }
  return advance(start, mu_, node.dt, sigma_, spec_.contribution(order, w1, w1));
}

// ---------------------------------------------------------------------------
// Single-branch derivative estimators

namespace {

struct OneStep {
  GhostSchemeSpec spec;
  Vec w1, w2;
  std::array<double, 7> values{};
};

OneStep one_step(GhostScheme scheme, MarkClass cls, const TerminalFunction& phi, const Vec& x,
                 const Diffusion& diffusion, double dt, RandomStream& rng) {
  if (!diffusion.is_constant()) throw std::invalid_argument("single-step estimators need constant coefficients");
  OneStep s{GhostSchemeSpec::of(scheme), Vec(x.size()), Vec(x.size()), {}};
  const double scale = std::sqrt(dt);
  for (Eigen::Index k = 0; k < x.size(); ++k) s.w1[k] = scale * rng.gaussian();
  if (s.spec.increments_per_node > 1) {
    for (Eigen::Index k = 0; k < x.size(); ++k) s.w2[k] = scale * rng.gaussian();
  } else {
    s.w2 = s.w1;
  }
  const Vec mu = diffusion.drift(0.0, x);
  const Mat sigma = diffusion.volatility(0.0, x);
  for (int order : s.spec.required_orders(cls)) {
    s.values[order] = phi(advance(x, mu, dt, sigma, s.spec.contribution(order, s.w1, s.w2)));
  }
  return s;
}

}  // namespace

double single_step_gradient(GhostScheme scheme, const TerminalFunction& phi, const Vec& x,
                            const Diffusion& diffusion, double dt, const Vec& direction, RandomStream& rng) {
  const OneStep s = one_step(scheme, MarkClass::Gradient, phi, x, diffusion, dt, rng);
  const double combined = s.spec.combine(MarkClass::Gradient, s.values);
  const Mat& s_inv = diffusion.sigma_inverse();
  if (split_increments(scheme)) return combined * gradient_weight_v23(direction, s_inv, s.w1, dt);
  return combined * gradient_weight(direction, s_inv, s.w1, dt);
}

double single_step_hessian(GhostScheme scheme, const TerminalFunction& phi, const Vec& x,
                           const Diffusion& diffusion, double dt, const Mat& a, RandomStream& rng) {
  const OneStep s = one_step(scheme, MarkClass::Hessian, phi, x, diffusion, dt, rng);
  const double combined = s.spec.combine(MarkClass::Hessian, s.values);
  const Mat& s_inv = diffusion.sigma_inverse();
  if (scheme == GhostScheme::V1) return combined * hessian_weight_v1(a, s_inv, s.w1, dt);
  return combined * hessian_weight_v23(a, s_inv, s.w1, s.w2, dt);
}

}  // namespace branchmc
