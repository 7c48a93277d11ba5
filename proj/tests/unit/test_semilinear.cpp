#include <doctest.h>

#include <cmath>

#include "brute_force.hpp"
#include "branchmc/semilinear.hpp"
#include "support.hpp"

using namespace branchmc;

namespace {

/// ∂t u + ½Δu + c·u = 0, u(T) = 1, so u(0) = e^{cT}.
Problem linear_ode(int d, double c, double maturity) {
  Problem p{"ode",
            Diffusion::constant(Vec::Zero(d), Mat::Identity(d, d)),
            {},
            maturity,
            [](const Vec&) { return 1.0; },
            std::nullopt,
            Vec::Zero(d),
            [d](double, const Vec&) { return Vec(Vec::Ones(d)); }};
  p.generator.h = [](double, const Vec&) { return 0.0; };
  p.generator.c = [c](double, const Vec&) { return c; };
  p.generator.exponents = {1};
  return p;
}

/// ∂t u + ½σσᵀ:D²u + μ·Du + c·(β·Du) = 0 with g(x) = α·x:
/// u(t, x) = α·(x + (μ + cβ)(T − t)), Du = α.
struct LinearTransport {
  Vec alpha = Vec{{0.7, -0.4, 0.2}};
  Vec beta = Vec{{0.3, -0.2, 0.5}};
  Vec mu = Vec{{0.1, 0.0, -0.1}};
  double c = 0.5;
  Problem problem;

  explicit LinearTransport(double maturity) : problem(make(maturity)) {}

  Problem make(double maturity) const {
    Mat sigma{{1.0, 0.2, 0.0}, {0.0, 0.8, 0.1}, {0.0, 0.0, 1.2}};
    Problem p{"linear",
              Diffusion::constant(mu, sigma),
              {},
              maturity,
              [a = alpha](const Vec& x) { return a.dot(x); },
              std::nullopt,
              Vec::Constant(3, 0.5),
              [](double, const Vec&) { return Vec(Vec::Ones(3)); }};
    p.generator.h = [](double, const Vec&) { return 0.0; };
    p.generator.c = [c = c](double, const Vec&) { return c; };
    p.generator.b = {[b = beta](double, const Vec&) { return b; }};
    p.generator.exponents = {0, 1};
    return p;
  }

  double value() const { return alpha.dot(problem.x0 + (mu + c * beta) * problem.maturity); }
  double gradient() const { return alpha.sum(); }
};

SemiSchemeConfig config(SemiScheme s, int nested = 1) {
  SemiSchemeConfig cfg = SemiSchemeConfig::defaults(s);
  cfg.nested_order = nested;
  cfg.node_budget = 1000000;
  return cfg;
}

}  // namespace

TEST_CASE("gradient weight") {
  Vec b(2), w(2);
  b << 1.0, 2.0;
  w << 0.5, 0.25;
  CHECK(gradient_weight(b, Mat::Identity(2, 2), w, 0.5) == doctest::Approx(2.0));
  Mat s_inv = Mat::Zero(2, 2);
  s_inv(0, 0) = 2.0;
  s_inv(1, 1) = 1.0;
  CHECK(gradient_weight(b, s_inv, w, 0.5) == doctest::Approx(3.0));
  s_inv(0, 1) = 1.0;  // (σ⁻¹)ᵀw = (1, 0.75)
  CHECK(gradient_weight(b, s_inv, w, 0.5) == doctest::Approx(5.0));
}

TEST_CASE("scheme defaults") {
  const auto orig = SemiSchemeConfig::defaults(SemiScheme::Original);
  CHECK(orig.law_u.is_exponential());
  CHECK_FALSE(orig.law_grad.is_exponential());
  CHECK(orig.law_grad.mean() == doctest::Approx(1.25));
  const auto renorm = SemiSchemeConfig::defaults(SemiScheme::Renorm);
  CHECK(renorm.law_grad.is_exponential());
  CHECK(ghost_scheme(SemiScheme::RenormAntithetic) == GhostScheme::RenormAntithetic);
}

TEST_CASE("constant-coefficient ODE: u(0) = e^{cT}") {
  const Problem p = linear_ode(2, 0.5, 1.0);
  for (auto s : {SemiScheme::Original, SemiScheme::Renorm, SemiScheme::RenormAntithetic}) {
    SemilinearEstimator est(p, config(s));
    const auto r = testing::sample(200000, 3, [&](RandomStream& rng) { return est.value(rng); });
    INFO("scheme " << static_cast<int>(s) << " mean " << r.mean << " ± " << r.stderr_);
    CHECK(r.within(std::exp(0.5), 4.0));
    CHECK(r.stderr_ < 0.01);
  }
}

TEST_CASE("linear transport: value and gradient oracles") {
  const LinearTransport lt(1.0);
  for (auto s : {SemiScheme::Original, SemiScheme::Renorm, SemiScheme::RenormAntithetic}) {
    SemilinearEstimator est(lt.problem, config(s));
    const auto v = testing::sample(200000, 5, [&](RandomStream& rng) { return est.value(rng); });
    const auto g = testing::sample(200000, 6, [&](RandomStream& rng) { return est.root_gradient(rng); });
    INFO("scheme " << static_cast<int>(s) << " value " << v.mean << " ± " << v.stderr_ << ", gradient "
                   << g.mean << " ± " << g.stderr_);
    CHECK(v.within(lt.value(), 4.0));
    CHECK(g.within(lt.gradient(), 4.0));
  }
}

TEST_CASE("nested order 1 reproduces the original estimator draw for draw") {
  const Problem p = builtin_problem("A", 4, 1.0);
  SemiSchemeConfig cfg = config(SemiScheme::Original, 1);
  RandomStream a(11, 0), b(11, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = estimate_original(p, cfg, a);
    const double y = estimate_nested(p, cfg, b);
    REQUIRE(x == y);
  }
  cfg.nested_order = 0;
  CHECK_THROWS_AS(estimate_nested(p, cfg, a), std::invalid_argument);
}

TEST_CASE("recursion matches the label-by-label oracle") {
  for (auto [name, d, t] : {std::tuple{"A", 4, 1.0}, std::tuple{"B", 4, 1.0}, std::tuple{"A", 2, 2.0}}) {
    const Problem p = builtin_problem(name, d, t);
    for (auto s : {SemiScheme::Original, SemiScheme::Renorm, SemiScheme::RenormAntithetic}) {
      for (int nested : {1, 2}) {
        const RecursionConfig rc = recursion_config(config(s, nested));
        BackwardRecursion rec(p, rc);
        const testing::BruteForce oracle(p, rc);
        RandomStream rng(17, 0);
        Skeleton sk;
        int nontrivial = 0;
        for (int i = 0; i < 300; ++i) {
          rec.sample(rng, Quantity::Value, sk);
          if (sk.nodes.size() > 60) continue;
          nontrivial += sk.nodes.size() > 3;
          const double got = rec.evaluate(sk, Quantity::Value);
          const double want = oracle.value(sk);
          INFO(name << " scheme " << static_cast<int>(s) << " nested " << nested << " tree " << i);
          REQUIRE(got == doctest::Approx(want).epsilon(1e-11).scale(1.0));
        }
        CHECK(nontrivial > 10);
      }
    }
  }
}

TEST_CASE("antithetic draws are invariant under W → −W") {
  const Problem p = builtin_problem("A", 4, 2.0);
  BackwardRecursion rec(p, recursion_config(config(SemiScheme::RenormAntithetic)));
  RandomStream rng(23, 0);
  Skeleton sk;
  for (auto q : {Quantity::Value, Quantity::Gradient}) {
    for (int i = 0; i < 5000; ++i) {
      rec.sample(rng, q, sk);
      const double a = rec.evaluate(sk, q);
      sk.negate_increments();
      const double b = rec.evaluate(sk, q);
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("renormalized draws change under W → −W") {
  const Problem p = builtin_problem("A", 4, 2.0);
  BackwardRecursion rec(p, recursion_config(config(SemiScheme::Renorm)));
  RandomStream rng(23, 0);
  Skeleton sk;
  int differing = 0;
  for (int i = 0; i < 200; ++i) {
    rec.sample(rng, Quantity::Value, sk);
    const double a = rec.evaluate(sk, Quantity::Value);
    sk.negate_increments();
    differing += a != rec.evaluate(sk, Quantity::Value);
  }
  CHECK(differing > 100);
}

TEST_CASE("test A at T = 1: every scheme finds the exact value") {
  const Problem p = builtin_problem("A", 4, 1.0);
  const double exact = p.solution->u(0.0, p.x0);
  const double grad = p.gradient_direction(0.0, p.x0).dot(p.solution->gradient(0.0, p.x0));
  for (auto s : {SemiScheme::Original, SemiScheme::Renorm, SemiScheme::RenormAntithetic}) {
    SemilinearEstimator est(p, config(s));
    const auto v = testing::sample(100000, 31, [&](RandomStream& rng) { return est.value(rng); });
    INFO("scheme " << static_cast<int>(s) << " value " << v.mean << " ± " << v.stderr_);
    CHECK(v.within(exact, 4.0));
    if (s != SemiScheme::Original) {
      const auto g = testing::sample(100000, 32, [&](RandomStream& rng) { return est.root_gradient(rng); });
      INFO("gradient " << g.mean << " ± " << g.stderr_ << " exact " << grad);
      CHECK(g.within(grad, 4.0));
    }
  }
  SemilinearEstimator nested(p, config(SemiScheme::Original, 2));
  const auto v = testing::sample(20000, 33, [&](RandomStream& rng) { return nested.value(rng); });
  INFO("nested " << v.mean << " ± " << v.stderr_);
  CHECK(v.within(exact, 4.0));
}

TEST_CASE("weight clipping floors ΔT") {
  const Problem p = builtin_problem("A", 4, 1.0);
  SemiSchemeConfig cfg = config(SemiScheme::Renorm);
  cfg.clip_dt = 0.0;
  CHECK_THROWS_AS(SemilinearEstimator(p, cfg), std::invalid_argument);
  cfg.clip_dt = 1e6;
  SemilinearEstimator clipped(p, cfg);
  SemilinearEstimator plain(p, config(SemiScheme::Renorm));
  RandomStream a(2, 0), b(2, 0);
  // With a huge floor every gradient factor vanishes except through h.
  for (int i = 0; i < 100; ++i) CHECK(std::abs(clipped.root_gradient(a)) < 1e-3 * (1.0 + std::abs(plain.root_gradient(b))));
}

TEST_CASE("scheme/problem mismatches are rejected") {
  const Problem c = builtin_problem("C", 4, 1.0);
  CHECK_THROWS_AS(SemilinearEstimator(c, config(SemiScheme::Renorm)), std::invalid_argument);
  const Problem burgers = builtin_problem("burgers-var", 4, 1.0);
  CHECK_THROWS_AS(SemilinearEstimator(burgers, config(SemiScheme::Renorm)), std::invalid_argument);
}
