#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "branchmc/arrival.hpp"
#include "branchmc/linalg.hpp"
#include "branchmc/problem.hpp"
#include "branchmc/rng.hpp"

namespace branchmc {

/// Which factor of the generator a particle estimates.
enum class MarkClass { Value, Gradient, Hessian };

/// Mark 0 → u, 1..m → b·Du, m+1..2m → a:D²u. With m = 0 every nonzero mark
/// counts as a gradient mark (used for the root of gradient estimates).
MarkClass mark_class(int mark, int m);

/// ℓ0 zeros, then ℓ1 ones, ..., then ℓ2m copies of 2m.
/// Throws std::invalid_argument when every exponent is zero or one is negative.
std::vector<int> assign_marks(std::span<const int> exponents);

/// Arrival laws selected by the mark class of the particle that draws τ.
struct ArrivalLaws {
  ArrivalLaw value = ArrivalLaw::exponential(0.4);
  ArrivalLaw gradient = ArrivalLaw::exponential(0.4);
  ArrivalLaw hessian = ArrivalLaw::exponential(0.4);

  const ArrivalLaw& for_class(MarkClass cls) const;
};

/// Raised when a sampled tree exceeds the node budget.
class NodeBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Label of a (possibly ghost) particle: the sequence of (offspring index,
/// ghost order) steps from the root. Offspring indices are 1-based and the
/// root is step (1, κ).
struct ParticleLabel {
  struct Step {
    int offspring = 1;
    int ghost = 0;
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> path;

  /// o(k): the same path with every ghost order zeroed.
  ParticleLabel original() const;
  /// κ(k): ghost order of the last step.
  int ghost_order() const { return path.empty() ? 0 : path.back().ghost; }
  int generation() const { return static_cast<int>(path.size()); }
  bool operator==(const ParticleLabel&) const = default;
};

/// One particle of the sampled skeleton. Ghost variants of the particle are
/// not stored; they reuse this node's τ, ΔT, mark and increments.
struct SkeletonNode {
  int mark = 0;
  double birth = 0.0;    // T_{k−}
  double tau = 0.0;      // raw arrival draw
  double arrival = 0.0;  // T_k = min(T_{k−} + τ, T)
  double dt = 0.0;       // ΔT_k
  bool terminal = false;
  std::uint32_t increment_offset = 0;  // into Skeleton::increments
  std::uint32_t increment_count = 0;   // number of d-vectors
  std::uint32_t first_child = 0;
  std::uint32_t child_count = 0;  // L · nested order for interior nodes
};

struct Skeleton {
  int dim = 0;
  double maturity = 0.0;
  int nested_order = 1;
  int offspring = 0;       // L
  double euler_dt = 0.0;   // > 0 when increments are Euler sub-steps
  std::vector<SkeletonNode> nodes;  // nodes[0] is the root
  std::vector<double> increments;

  const SkeletonNode& root() const { return nodes.front(); }
  std::span<const SkeletonNode> children(const SkeletonNode& node) const {
    return {nodes.data() + node.first_child, node.child_count};
  }
  /// i-th increment vector of a node.
  Vec increment(const SkeletonNode& node, int i) const;
  const double* increment_data(const SkeletonNode& node, int i) const {
    return increments.data() + node.increment_offset + static_cast<std::size_t>(i) * dim;
  }
  /// Node of the original particle o(label). Throws std::out_of_range.
  const SkeletonNode& find(const ParticleLabel& label) const;
  /// Flips the sign of every stored increment.
  void negate_increments();
  void clear();
};

struct SkeletonOptions {
  ArrivalLaws laws;
  int increments_per_node = 1;
  double euler_dt = 0.0;  // > 0 stores Euler sub-increments instead
  int nested_order = 1;
  int root_mark = 0;
  double t0 = 0.0;
  std::size_t node_budget = 100000;
};

/// Samples a branching skeleton: each node draws τ from the law of its mark,
/// then its increments, then (when T_{k−} + τ < T) its L · n children.
/// Throws NodeBudgetExceeded past `node_budget` nodes.
void sample_skeleton(const Problem& problem, const SkeletonOptions& options, RandomStream& rng, Skeleton& out);
Skeleton sample_skeleton(const Problem& problem, const SkeletonOptions& options, RandomStream& rng);

/// Sub-step lengths of an Euler segment of length `span`: ⌊span/δt⌋ steps of
/// δt plus a nonzero remainder step.
std::vector<double> euler_steps(double span, double euler_dt);

// ---------------------------------------------------------------------------
// Ghost algebra

enum class GhostScheme { None, Renorm, RenormAntithetic, V1, V2, V3 };

/// Position rule and offspring combination of one ghost scheme.
///
/// | scheme    | q | increments | rule by ghost order                          |
/// |-----------|---|------------|----------------------------------------------|
/// | None      | 0 | 1          | 0: W                                         |
/// | Renorm    | 1 | 1          | 0: W, 1: 0                                   |
/// | Antithetic| 1 | 1          | 0: W, 1: −W                                  |
/// | V1        | 2 | 1          | 0: W, 1: −W, 2: 0                            |
/// | V2        | 3 | 2          | 0: (W¹+W²)/√2, 1: W¹/√2, 2: W²/√2, 3: 0      |
/// | V3        | 6 | 2          | V2 for 0..3, 4..6: negatives of 0..2         |
struct GhostSchemeSpec {
  GhostScheme scheme = GhostScheme::None;
  int q = 0;
  int increments_per_node = 1;

  static GhostSchemeSpec of(GhostScheme scheme);

  /// Brownian contribution of ghost `order`. Throws std::invalid_argument for
  /// orders above q.
  Vec contribution(int order, const Vec& w1, const Vec& w2) const;

  /// Ghost orders whose ψ̂ a child of the given class needs, original first.
  std::span<const int> required_orders(MarkClass cls) const;

  /// Combines ψ̂ values (indexed by ghost order) into the offspring factor
  /// before weighting. Hessian combinations are only defined for V1..V3.
  double combine(MarkClass cls, std::span<const double> psi) const;

  /// Ghost order that mirrors the original (antithetic schemes), or -1.
  int mirror_order() const;
};

/// End-of-segment position x + μΔT + σ0·(rule contribution) of a ghost of
/// `node` started at `base`, for a constant diffusion.
Vec ghost_position(const Vec& base, const Skeleton& skeleton, const SkeletonNode& node, int order,
                   const GhostSchemeSpec& spec, const Diffusion& diffusion);

/// x + μ·dt + σ·w, the single transport step shared by exact and Euler moves.
inline Vec advance(const Vec& x, const Vec& mu, double dt, const Mat& sigma, const Vec& w) {
  return x + mu * dt + sigma * w;
}

/// Position at T_k of a labelled (ghost) particle obtained by walking the
/// label from `x0` and applying the position rule at every step.
Vec labelled_position(const Skeleton& skeleton, const ParticleLabel& label, const GhostSchemeSpec& spec,
                      const Diffusion& diffusion, const Vec& x0);

}  // namespace branchmc
