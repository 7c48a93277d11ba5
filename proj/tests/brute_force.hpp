#pragma once

#include <cmath>
#include <vector>

#include "branchmc/arrival.hpp"
#include "branchmc/recursion.hpp"

namespace testing {

/// Value estimate of one skeleton computed label by label: every ghost
/// particle gets its own position from labelled_position, so nothing is
/// shared with the recursion's reuse of subtrees.
class BruteForce {
 public:
  BruteForce(const branchmc::Problem& p, const branchmc::RecursionConfig& cfg)
      : p_(p), cfg_(cfg), spec_(branchmc::GhostSchemeSpec::of(cfg.scheme)), m_(p.generator.m()) {}

  double value(const branchmc::Skeleton& sk) const {
    const double v = psi(sk, {{{1, 0}}}, p_.x0);
    const int mirror = spec_.mirror_order();
    if (mirror < 0) return v;
    return 0.5 * (v + psi(sk, {{{1, mirror}}}, p_.x0));
  }

 private:
  using Label = branchmc::ParticleLabel;

  double psi(const branchmc::Skeleton& sk, const Label& label, const branchmc::Vec& start) const {
    const auto& node = sk.find(label);
    const auto x = branchmc::labelled_position(sk, label, spec_, p_.diffusion, p_.x0);
    const auto cls = branchmc::mark_class(node.mark, m_);
    const auto& law = cfg_.laws.for_class(cls);
    if (node.terminal) {
      double g = p_.terminal(x);
      if (cfg_.scheme == branchmc::GhostScheme::None && node.mark != 0) g -= p_.terminal(start);
      return g / branchmc::survival(law, node.dt);
    }
    const auto coeffs = branchmc::evaluate_generator_coeffs(p_, node.arrival, x);
    const int n = sk.nested_order;
    const int slots = static_cast<int>(node.child_count) / n;
    double prod = 1.0;
    for (int j = 0; j < slots; ++j) {
      double sum = 0.0;
      for (int r = 0; r < n; ++r) sum += factor(sk, label, j * n + r + 1, x, coeffs);
      prod *= sum / n;
    }
    return (coeffs.h + coeffs.c * prod) / branchmc::density(law, node.dt);
  }

  double factor(const branchmc::Skeleton& sk, const Label& parent, int k, const branchmc::Vec& x,
                const branchmc::GeneratorCoeffs& coeffs) const {
    Label label = parent;
    label.path.push_back({k, 0});
    const auto& child = sk.find(label);
    const auto cls = branchmc::mark_class(child.mark, m_);
    double values[7] = {};
    for (int order = 0; order <= spec_.q; ++order) {
      label.path.back().ghost = order;
      values[order] = psi(sk, label, x);
    }
    const double combined = spec_.combine(cls, values);
    if (cls == branchmc::MarkClass::Value) return combined;

    const branchmc::Mat s_inv_t = p_.diffusion.volatility(0.0, x).inverse().transpose();
    const double dt = child.dt;
    const branchmc::Vec w1 = sk.increment(child, 0);
    const bool split = spec_.increments_per_node == 2;
    if (cls == branchmc::MarkClass::Gradient) {
      const double scale = split ? std::sqrt(2.0) : 1.0;
      return combined * scale * coeffs.b[child.mark - 1].dot(s_inv_t * w1) / dt;
    }
    const branchmc::Mat& a = coeffs.a[child.mark - 1 - m_];
    const branchmc::Vec y1 = s_inv_t * w1;
    if (!split) {
      const branchmc::Mat k2 = (y1 * y1.transpose() - dt * s_inv_t * s_inv_t.transpose()) / (dt * dt);
      return combined * (a.array() * k2.array()).sum();
    }
    const branchmc::Vec y2 = s_inv_t * sk.increment(child, 1);
    return combined * 2.0 * y1.dot(a * y2) / (dt * dt);
  }

  const branchmc::Problem& p_;
  branchmc::RecursionConfig cfg_;
  branchmc::GhostSchemeSpec spec_;
  int m_;
};

}  // namespace testing
