#include "branchmc/skeleton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace branchmc {

MarkClass mark_class(int mark, int m) {
  if (mark == 0) return MarkClass::Value;
  if (mark <= std::max(m, 1)) return MarkClass::Gradient;
  return MarkClass::Hessian;
}

std::vector<int> assign_marks(std::span<const int> exponents) {
  std::vector<int> marks;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 0) throw std::invalid_argument("negative exponent");
    marks.insert(marks.end(), static_cast<std::size_t>(exponents[i]), static_cast<int>(i));
  }
  if (marks.empty()) throw std::invalid_argument("all exponents are zero");
  return marks;
}

const ArrivalLaw& ArrivalLaws::for_class(MarkClass cls) const {
  switch (cls) {
    case MarkClass::Value: return value;
    case MarkClass::Gradient: return gradient;
    case MarkClass::Hessian: return hessian;
  }
  return value;
}

ParticleLabel ParticleLabel::original() const {
  ParticleLabel out = *this;
  for (auto& step : out.path) step.ghost = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Skeleton

Vec Skeleton::increment(const SkeletonNode& node, int i) const {
  if (i < 0 || static_cast<std::uint32_t>(i) >= node.increment_count) {
    throw std::out_of_range("increment index out of range");
  }
  return Eigen::Map<const Eigen::VectorXd>(increment_data(node, i), dim);
}

const SkeletonNode& Skeleton::find(const ParticleLabel& label) const {
  if (label.path.empty() || label.path.front().offspring != 1 || nodes.empty()) {
    throw std::out_of_range("label must start at the root particle (1)");
  }
  const SkeletonNode* node = &nodes.front();
  for (std::size_t i = 1; i < label.path.size(); ++i) {
    const int k = label.path[i].offspring;
    if (k < 1 || static_cast<std::uint32_t>(k) > node->child_count) {
      throw std::out_of_range("label does not exist in this skeleton");
    }
    node = &nodes[node->first_child + k - 1];
  }
  return *node;
}

void Skeleton::negate_increments() {
  for (double& w : increments) w = -w;
}

void Skeleton::clear() {
  nodes.clear();
  increments.clear();
}

std::vector<double> euler_steps(double span, double euler_dt) {
  if (!(euler_dt > 0.0)) throw std::invalid_argument("Euler time step must be > 0");
  if (!(span > 0.0)) throw std::invalid_argument("Euler segment length must be > 0");
  auto full = static_cast<std::size_t>(std::floor(span / euler_dt));
  while (full > 0 && static_cast<double>(full) * euler_dt > span) --full;
  std::vector<double> steps(full, euler_dt);
  const double rest = span - static_cast<double>(full) * euler_dt;
  if (rest > 0.0) steps.push_back(rest);
  return steps;
}

namespace {

class SkeletonSampler {
 public:
  SkeletonSampler(const Problem& problem, const SkeletonOptions& options, RandomStream& rng, Skeleton& out)
      : opts_(options),
        rng_(rng),
        out_(out),
        marks_(assign_marks(problem.generator.exponents)),
        m_(problem.generator.m()) {}

  void run() {
    out_.nodes.push_back({});
    sample(0, opts_.t0, opts_.root_mark);
  }

 private:
  void sample(std::size_t index, double birth, int mark) {
    const double T = out_.maturity;
    const double tau = sample_arrival(opts_.laws.for_class(mark_class(mark, m_)), rng_);
    SkeletonNode node;
    node.mark = mark;
    node.birth = birth;
    node.tau = tau;
    node.terminal = birth + tau >= T;
    node.arrival = node.terminal ? T : birth + tau;
    node.dt = node.terminal ? T - birth : tau;
    node.increment_offset = static_cast<std::uint32_t>(out_.increments.size());

    const int d = out_.dim;
    if (opts_.euler_dt > 0.0) {
      for (double step : euler_steps(node.dt, opts_.euler_dt)) {
        draw_increment(d, step);
        ++node.increment_count;
      }
    } else {
      for (int i = 0; i < opts_.increments_per_node; ++i) draw_increment(d, node.dt);
      node.increment_count = static_cast<std::uint32_t>(opts_.increments_per_node);
    }

    if (!node.terminal) {
      const std::size_t n = static_cast<std::size_t>(opts_.nested_order);
      node.child_count = static_cast<std::uint32_t>(marks_.size() * n);
      node.first_child = static_cast<std::uint32_t>(out_.nodes.size());
      if (out_.nodes.size() + node.child_count > opts_.node_budget) {
        throw NodeBudgetExceeded("branching tree exceeded " + std::to_string(opts_.node_budget) + " nodes");
      }
      out_.nodes.resize(out_.nodes.size() + node.child_count);
      out_.nodes[index] = node;
      for (std::size_t slot = 0; slot < marks_.size(); ++slot) {
        for (std::size_t r = 0; r < n; ++r) {
          sample(node.first_child + slot * n + r, node.arrival, marks_[slot]);
        }
      }
    } else {
      out_.nodes[index] = node;
    }
  }

  void draw_increment(int d, double variance) {
    const double scale = std::sqrt(variance);
    for (int k = 0; k < d; ++k) out_.increments.push_back(scale * rng_.gaussian());
  }

  const SkeletonOptions& opts_;
  RandomStream& rng_;
  Skeleton& out_;
  std::vector<int> marks_;
  int m_;
};

}  // namespace

void sample_skeleton(const Problem& problem, const SkeletonOptions& options, RandomStream& rng, Skeleton& out) {
  if (!(options.t0 < problem.maturity)) throw std::invalid_argument("skeleton start time must precede maturity");
  if (options.nested_order < 1) throw std::invalid_argument("nested order must be >= 1");
  if (options.increments_per_node < 1 || options.increments_per_node > 2) {
    throw std::invalid_argument("increments per node must be 1 or 2");
  }
  out.clear();
  out.dim = problem.dim();
  out.maturity = problem.maturity;
  out.nested_order = options.nested_order;
  out.offspring = problem.generator.total_order();
  out.euler_dt = options.euler_dt;
  SkeletonSampler(problem, options, rng, out).run();
}

Skeleton sample_skeleton(const Problem& problem, const SkeletonOptions& options, RandomStream& rng) {
  Skeleton out;
  sample_skeleton(problem, options, rng, out);
  return out;
}

// ---------------------------------------------------------------------------
// Ghost algebra

GhostSchemeSpec GhostSchemeSpec::of(GhostScheme scheme) {
  switch (scheme) {
    case GhostScheme::None: return {scheme, 0, 1};
    case GhostScheme::Renorm: return {scheme, 1, 1};
    case GhostScheme::RenormAntithetic: return {scheme, 1, 1};
    case GhostScheme::V1: return {scheme, 2, 1};
    case GhostScheme::V2: return {scheme, 3, 2};
    case GhostScheme::V3: return {scheme, 6, 2};
  }
  throw std::invalid_argument("unknown ghost scheme");
}

Vec GhostSchemeSpec::contribution(int order, const Vec& w1, const Vec& w2) const {
  if (order < 0 || order > q) {
    throw std::invalid_argument("ghost order " + std::to_string(order) + " is not defined for this scheme");
  }
  constexpr double r2 = std::numbers::sqrt2;
  switch (scheme) {
    case GhostScheme::None:
      return w1;
    case GhostScheme::Renorm:
      return order == 0 ? w1 : Vec(Vec::Zero(w1.size()));
    case GhostScheme::RenormAntithetic:
      return order == 0 ? w1 : Vec(-w1);
    case GhostScheme::V1:
      if (order == 0) return w1;
      if (order == 1) return -w1;
      return Vec::Zero(w1.size());
    case GhostScheme::V2:
    case GhostScheme::V3:
      switch (order) {
        case 0: return (w1 + w2) / r2;
        case 1: return w1 / r2;
        case 2: return w2 / r2;
        case 3: return Vec::Zero(w1.size());
        case 4: return -((w1 + w2) / r2);
        case 5: return -(w1 / r2);
        default: return -(w2 / r2);
      }
  }
  return w1;
}

std::span<const int> GhostSchemeSpec::required_orders(MarkClass cls) const {
  static constexpr std::array<int, 1> kOrig{0};
  static constexpr std::array<int, 2> kFirst{0, 1};
  static constexpr std::array<int, 2> kSecond{0, 2};
  static constexpr std::array<int, 2> kThird{0, 3};
  static constexpr std::array<int, 2> kFourth{0, 4};
  static constexpr std::array<int, 3> kV1Hess{0, 1, 2};
  static constexpr std::array<int, 4> kV2Hess{0, 1, 2, 3};
  static constexpr std::array<int, 7> kV3Hess{0, 1, 2, 3, 4, 5, 6};
  switch (scheme) {
    case GhostScheme::None:
      if (cls == MarkClass::Hessian) break;
      return kOrig;
    case GhostScheme::Renorm:
      if (cls == MarkClass::Hessian) break;
      return cls == MarkClass::Value ? std::span<const int>(kOrig) : kFirst;
    case GhostScheme::RenormAntithetic:
      if (cls == MarkClass::Hessian) break;
      return kFirst;
    case GhostScheme::V1:
      if (cls == MarkClass::Value) return kOrig;
      return cls == MarkClass::Gradient ? std::span<const int>(kSecond) : kV1Hess;
    case GhostScheme::V2:
      if (cls == MarkClass::Value) return kOrig;
      return cls == MarkClass::Gradient ? std::span<const int>(kThird) : kV2Hess;
    case GhostScheme::V3:
      if (cls == MarkClass::Value) return kFourth;
      return cls == MarkClass::Gradient ? std::span<const int>(kFourth) : kV3Hess;
  }
  throw std::logic_error("Hessian marks need a second-order scheme (v1, v2, v3)");
}

double GhostSchemeSpec::combine(MarkClass cls, std::span<const double> psi) const {
  switch (scheme) {
    case GhostScheme::None:
      if (cls == MarkClass::Hessian) break;
      return psi[0];
    case GhostScheme::Renorm:
      if (cls == MarkClass::Hessian) break;
      return cls == MarkClass::Value ? psi[0] : psi[0] - psi[1];
    case GhostScheme::RenormAntithetic:
      if (cls == MarkClass::Hessian) break;
      return cls == MarkClass::Value ? 0.5 * (psi[0] + psi[1]) : 0.5 * (psi[0] - psi[1]);
    case GhostScheme::V1:
      if (cls == MarkClass::Value) return psi[0];
      if (cls == MarkClass::Gradient) return psi[0] - psi[2];
      return 0.5 * (psi[0] + psi[1] - 2.0 * psi[2]);
    case GhostScheme::V2:
      if (cls == MarkClass::Value) return psi[0];
      if (cls == MarkClass::Gradient) return psi[0] - psi[3];
      return psi[0] + psi[3] - psi[1] - psi[2];
    case GhostScheme::V3:
      if (cls == MarkClass::Value) return 0.5 * (psi[0] + psi[4]);
      if (cls == MarkClass::Gradient) return 0.5 * (psi[0] - psi[4]);
      // Mirror pairs are summed first so that swapping every order with its
      // mirror leaves the result bit-identical.
      return 0.5 * (((psi[0] + psi[4]) + 2.0 * psi[3]) - ((psi[1] + psi[5]) + (psi[2] + psi[6])));
  }
  throw std::logic_error("Hessian marks need a second-order scheme (v1, v2, v3)");
}

int GhostSchemeSpec::mirror_order() const {
  if (scheme == GhostScheme::RenormAntithetic) return 1;
  if (scheme == GhostScheme::V3) return 4;
  return -1;
}

Vec ghost_position(const Vec& base, const Skeleton& skeleton, const SkeletonNode& node, int order,
                   const GhostSchemeSpec& spec, const Diffusion& diffusion) {
  if (static_cast<int>(node.increment_count) < spec.increments_per_node) {
    throw std::invalid_argument("node carries fewer increments than the scheme needs");
  }
  const Vec w1 = skeleton.increment(node, 0);
  const Vec w2 = spec.increments_per_node > 1 ? skeleton.increment(node, 1) : w1;
  const Vec inc = spec.contribution(order, w1, w2);
  return advance(base, diffusion.drift(node.birth, base), node.dt, diffusion.volatility(node.birth, base), inc);
}

Vec labelled_position(const Skeleton& skeleton, const ParticleLabel& label, const GhostSchemeSpec& spec,
                      const Diffusion& diffusion, const Vec& x0) {
  if (label.path.empty() || label.path.front().offspring != 1) {
    throw std::out_of_range("label must start at the root particle (1)");
  }
  Vec pos = x0;
  const SkeletonNode* node = &skeleton.root();
  for (std::size_t i = 0; i < label.path.size(); ++i) {
    if (i > 0) {
      const int k = label.path[i].offspring;
      if (node->terminal || k < 1 || static_cast<std::uint32_t>(k) > node->child_count) {
        throw std::out_of_range("label does not exist in this skeleton");
      }
      node = &skeleton.nodes[node->first_child + k - 1];
    }
    pos = ghost_position(pos, skeleton, *node, label.path[i].ghost, spec, diffusion);
  }
  return pos;
}

}  // namespace branchmc
