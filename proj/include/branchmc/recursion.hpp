#pragma once

#include <deque>
#include <optional>

#include "branchmc/problem.hpp"
#include "branchmc/skeleton.hpp"

namespace branchmc {

enum class Quantity { Value, Gradient };

struct RecursionConfig {
  GhostScheme scheme = GhostScheme::None;
  ArrivalLaws laws;
  int nested_order = 1;
  double euler_dt = 0.0;          // > 0 switches to Euler transport
  std::optional<double> clip_dt;  // floor on ΔT inside weights
  std::size_t node_budget = 100000;
};

/// Backward recursion ψ̂ over one sampled skeleton, shared by every scheme.
///
/// Ghost subtrees are never materialized: a child subtree is evaluated once
/// per ghost order the scheme needs, each time from a different end
/// position, so memory stays proportional to the tree depth.
///
/// Instances hold scratch storage and must not be shared between threads.
/// The problem must outlive the recursion.
class BackwardRecursion {
 public:
  /// Throws std::invalid_argument when the scheme cannot treat the problem.
  BackwardRecursion(const Problem& problem, RecursionConfig config);

  /// Samples a skeleton and evaluates it. Throws NodeBudgetExceeded.
  double draw(RandomStream& rng, Quantity quantity = Quantity::Value);

  void sample(RandomStream& rng, Quantity quantity, Skeleton& out) const;
  double evaluate(const Skeleton& skeleton, Quantity quantity);

  const Skeleton& last_skeleton() const { return skeleton_; }
  const RecursionConfig& config() const { return cfg_; }
  const GhostSchemeSpec& spec() const { return spec_; }

 private:
  double psi(const Skeleton& sk, const SkeletonNode& node, const Vec& start, const Vec& end, std::size_t depth);
  double factor(const Skeleton& sk, const SkeletonNode& child, double t_start, const Vec& x_start,
                const GeneratorCoeffs& coeffs, std::size_t depth);
  double weight(const Skeleton& sk, MarkClass cls, const SkeletonNode& child, double t_start, const Vec& x_start,
                const GeneratorCoeffs& coeffs) const;
  Vec transport(const Skeleton& sk, const SkeletonNode& node, const Vec& start, int order) const;
  double weight_dt(double dt) const { return cfg_.clip_dt ? std::max(dt, *cfg_.clip_dt) : dt; }

  const Problem* problem_;
  RecursionConfig cfg_;
  GhostSchemeSpec spec_;
  int m_;
  Skeleton skeleton_;
  std::deque<GeneratorCoeffs> scratch_;
  GeneratorCoeffs root_coeffs_;
  Vec mu_;
  Mat sigma_;
  Mat sigma_inv_;
};

/// One-branch estimator of direction·Dφ(x) built from the scheme's ghost
/// positions, offspring combination and weight, over a segment of length dt.
double single_step_gradient(GhostScheme scheme, const TerminalFunction& phi, const Vec& x,
                            const Diffusion& diffusion, double dt, const Vec& direction, RandomStream& rng);

/// One-branch estimator of a:D²φ(x) for the schemes V1, V2 and V3.
double single_step_hessian(GhostScheme scheme, const TerminalFunction& phi, const Vec& x,
                           const Diffusion& diffusion, double dt, const Mat& a, RandomStream& rng);

}  // namespace branchmc
