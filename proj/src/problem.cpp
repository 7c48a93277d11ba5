#include "branchmc/problem.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace branchmc {

// ---------------------------------------------------------------------------
// Diffusion

namespace {

Mat checked_inverse(const Mat& sigma) {
  Eigen::FullPivLU<Mat> lu(sigma);
  if (!lu.isInvertible()) throw std::invalid_argument("volatility matrix is singular");
  return lu.inverse();
}

}  // namespace

Diffusion Diffusion::constant(Vec drift, Mat sigma) {
  const auto d = drift.size();
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("diffusion dimension out of range");
  if (sigma.rows() != d || sigma.cols() != d) throw std::invalid_argument("volatility shape mismatch");
  Diffusion out;
  out.dim_ = static_cast<int>(d);
  out.constant_ = true;
  out.sigma_inv_ = checked_inverse(sigma);
  out.drift_ = std::move(drift);
  out.sigma_ = std::move(sigma);
  return out;
}

Diffusion Diffusion::variable(int dim, VectorField drift, MatrixField sigma) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("diffusion dimension out of range");
  if (!drift || !sigma) throw std::invalid_argument("variable diffusion needs drift and volatility fields");
  Diffusion out;
  out.dim_ = dim;
  out.constant_ = false;
  out.drift_field_ = std::move(drift);
  out.sigma_field_ = std::move(sigma);
  return out;
}

Vec Diffusion::drift(double t, const Vec& x) const { return constant_ ? drift_ : drift_field_(t, x); }

Mat Diffusion::volatility(double t, const Vec& x) const { return constant_ ? sigma_ : sigma_field_(t, x); }

const Mat& Diffusion::sigma_inverse() const {
  if (!constant_) throw std::logic_error("sigma_inverse() needs a constant diffusion");
  return sigma_inv_;
}

Mat Diffusion::sigma_inverse_at(double t, const Vec& x) const {
  return constant_ ? sigma_inv_ : checked_inverse(sigma_field_(t, x));
}

// ---------------------------------------------------------------------------
// Generator

int MonomialGenerator::total_order() const {
  int total = 0;
  for (int l : exponents) total += l;
  return total;
}

bool MonomialGenerator::is_semilinear() const {
  for (std::size_t i = 1 + b.size(); i < exponents.size(); ++i) {
    if (exponents[i] != 0) return false;
  }
  return true;
}

void MonomialGenerator::validate() const {
  if (!h || !c) throw std::invalid_argument("generator needs h and c");
  const auto m = b.size();
  if (exponents.empty()) throw std::invalid_argument("generator needs exponents");
  for (int l : exponents) {
    if (l < 0) throw std::invalid_argument("generator exponents must be nonnegative");
  }
  if (total_order() <= 0) throw std::invalid_argument("generator exponents must not all be zero");
  if (exponents.size() != 1 + m && exponents.size() != 1 + 2 * m) {
    throw std::invalid_argument("generator needs 1+m or 1+2m exponents");
  }
  if (exponents.size() == 1 + 2 * m && m > 0 && a.size() != m) {
    throw std::invalid_argument("generator with Hessian exponents needs m Hessian matrices");
  }
  if (m == 0 && exponents.size() != 1) throw std::invalid_argument("gradient exponents without directions");
}

void evaluate_generator_coeffs(const Problem& problem, double t, const Vec& x, GeneratorCoeffs& out) {
  const auto& gen = problem.generator;
  const int m = gen.m();
  const int n_exp = static_cast<int>(gen.exponents.size());
  out.h = gen.h(t, x);
  out.c = gen.c(t, x);
  out.b.resize(m);
  for (int i = 0; i < m; ++i) {
    if (gen.exponents[1 + i] != 0) out.b[i] = gen.b[i](t, x);
  }
  const int n_hess = n_exp > 1 + m ? m : 0;
  out.a.resize(n_hess);
  for (int i = 0; i < n_hess; ++i) {
    if (gen.exponents[1 + m + i] != 0) out.a[i] = gen.a[i](t, x);
  }
}

GeneratorCoeffs evaluate_generator_coeffs(const Problem& problem, double t, const Vec& x) {
  GeneratorCoeffs out;
  evaluate_generator_coeffs(problem, t, x, out);
  // Report every direction, not only the ones with nonzero exponent.
  const auto& gen = problem.generator;
  for (int i = 0; i < gen.m(); ++i) out.b[i] = gen.b[i](t, x);
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = gen.a[i](t, x);
  return out;
}

namespace {

/// The monomial part c·u^ℓ0·Π(b·Du)^ℓ·Π(a:D²u)^ℓ at a point.
double monomial_value(const Problem& problem, double t, const Vec& x, double u, const Vec& du, const Mat& d2u) {
  const auto& gen = problem.generator;
  const int m = gen.m();
  double prod = gen.c(t, x) * std::pow(u, gen.exponents[0]);
  for (int i = 0; i < m; ++i) {
    if (gen.exponents[1 + i] != 0) prod *= std::pow(gen.b[i](t, x).dot(du), gen.exponents[1 + i]);
  }
  if (static_cast<int>(gen.exponents.size()) > 1 + m) {
    for (int i = 0; i < m; ++i) {
      if (gen.exponents[1 + m + i] != 0) {
        prod *= std::pow(contract(gen.a[i](t, x), d2u), gen.exponents[1 + m + i]);
      }
    }
  }
  return prod;
}

double linear_part(const Problem& problem, const AnalyticSolution& sol, double t, const Vec& x) {
  const Mat sigma = problem.diffusion.volatility(t, x);
  const Mat d2u = sol.hessian(t, x);
  const Vec du = sol.gradient(t, x);
  const Mat cov = sigma * sigma.transpose();
  return sol.du_dt(t, x) + 0.5 * contract(cov, d2u) + problem.diffusion.drift(t, x).dot(du) +
         monomial_value(problem, t, x, sol.u(t, x), du, d2u);
}

}  // namespace

double pde_residual(const Problem& problem, double t, const Vec& x) {
  if (!problem.solution) throw std::logic_error("problem '" + problem.name + "' has no analytic solution");
  return linear_part(problem, *problem.solution, t, x) + problem.generator.h(t, x);
}

ScalarField manufactured_source(const Problem& problem, const AnalyticSolution& solution) {
  // Copies keep the returned field independent of the caller's lifetime.
  auto shell = std::make_shared<Problem>(problem);
  auto sol = std::make_shared<AnalyticSolution>(solution);
  return [shell, sol](double t, const Vec& x) { return -linear_part(*shell, *sol, t, x); };
}

AnalyticSolution cosine_solution(double alpha, double maturity) {
  AnalyticSolution s;
  s.u = [=](double t, const Vec& x) { return std::cos(x.sum()) * std::exp(alpha * (maturity - t)); };
  s.du_dt = [=](double t, const Vec& x) { return -alpha * std::cos(x.sum()) * std::exp(alpha * (maturity - t)); };
  s.gradient = [=](double t, const Vec& x) {
    return Vec(Vec::Constant(x.size(), -std::sin(x.sum()) * std::exp(alpha * (maturity - t))));
  };
  s.hessian = [=](double t, const Vec& x) {
    return Mat(Mat::Constant(x.size(), x.size(), -std::cos(x.sum()) * std::exp(alpha * (maturity - t))));
  };
  return s;
}

// ---------------------------------------------------------------------------
// Built-in problems

namespace {

constexpr double kAlpha = 0.2;

TerminalFunction cosine_terminal() {
  return [](const Vec& x) { return std::cos(x.sum()); };
}

VectorField constant_vector(Vec v) {
  return [v = std::move(v)](double, const Vec&) { return v; };
}

MatrixField identity_field(int d) {
  return [d](double, const Vec&) { return Mat(Mat::Identity(d, d)); };
}

ScalarField constant_scalar(double v) {
  return [v](double, const Vec&) { return v; };
}

/// b = (0.2/d)(1 + 1/d, 1 + 2/d, ..., 2).
Vec burgers_direction(int d) {
  Vec b(d);
  for (int i = 0; i < d; ++i) b[i] = 0.2 / d * (1.0 + (i + 1.0) / d);
  return b;
}

Problem problem_a(int d, double T) {
  const Vec b = burgers_direction(d);
  const double b_sum = 0.2 * (3.0 * d + 1.0) / (2.0 * d);
  Problem p{"A",
            Diffusion::constant(Vec::Zero(d), Mat::Identity(d, d) / std::sqrt(static_cast<double>(d))),
            {},
            T,
            cosine_terminal(),
            cosine_solution(kAlpha, T),
            Vec::Constant(d, 0.5),
            constant_vector(b)};
  // ½σσᵀ:D²u = −½cos(Σx)e^{α(T−t)} since σσᵀ = I/d.
  p.generator.h = [=](double t, const Vec& x) {
    const double s = x.sum();
    const double e = std::exp(kAlpha * (T - t));
    return (kAlpha + 0.5) * std::cos(s) * e + b_sum * std::cos(s) * std::sin(s) * e * e;
  };
  p.generator.c = constant_scalar(1.0);
  p.generator.b = {constant_vector(b)};
  p.generator.exponents = {1, 1};
  return p;
}

Problem problem_b(int d, double T) {
  Problem p{"B",
            Diffusion::constant(Vec::Zero(d), Mat::Identity(d, d) / std::sqrt(static_cast<double>(d))),
            {},
            T,
            cosine_terminal(),
            std::nullopt,
            Vec::Constant(d, 0.5),
            constant_vector(Vec::Ones(d))};
  p.generator.h = constant_scalar(0.0);
  p.generator.c = constant_scalar(0.1 / d);
  p.generator.b = {constant_vector(Vec::Ones(d))};
  p.generator.exponents = {0, 2};
  return p;
}

Problem problem_c(int d, double T) {
  Problem p{"C",
            Diffusion::constant(Vec::Constant(d, 0.2), 0.5 * Mat::Identity(d, d)),
            {},
            T,
            cosine_terminal(),
            cosine_solution(kAlpha, T),
            Vec::Constant(d, 0.5),
            constant_vector(Vec::Ones(d))};
  // ½σσᵀ:D²u = −(d/8)cos e, μ·Du = −0.2 d sin e, (0.1/d) u tr(D²u) = −0.1 cos² e².
  p.generator.h = [=](double t, const Vec& x) {
    const double s = x.sum();
    const double e = std::exp(kAlpha * (T - t));
    return (kAlpha + 0.125 * d) * std::cos(s) * e + 0.2 * d * std::sin(s) * e +
           0.1 * std::cos(s) * std::cos(s) * e * e;
  };
  p.generator.c = constant_scalar(0.1 / d);
  p.generator.b = {constant_vector(Vec::Ones(d))};
  p.generator.a = {identity_field(d)};
  p.generator.exponents = {1, 0, 1};
  return p;
}

Problem problem_d(int d, double T) {
  if (d != 4) throw std::invalid_argument("problem D is defined for d = 4 only");
  Problem p{"D",
            Diffusion::constant(Vec::Constant(d, 0.2), 0.5 * Mat::Identity(d, d)),
            {},
            T,
            cosine_terminal(),
            std::nullopt,
            Vec::Constant(d, 0.5),
            constant_vector(Vec::Ones(d))};
  p.generator.h = constant_scalar(0.0);
  p.generator.c = constant_scalar(0.0125);
  p.generator.b = {constant_vector(Vec::Ones(d))};
  p.generator.a = {identity_field(d)};
  p.generator.exponents = {0, 1, 1};
  return p;
}

/// Burgers-type generator with time-dependent volatility 0.5(1 + 0.1 sin t) I.
Problem problem_burgers_var(int d, double T) {
  const Vec b = burgers_direction(d);
  const double b_sum = 0.2 * (3.0 * d + 1.0) / (2.0 * d);
  auto vol_scale = [](double t) { return 0.5 * (1.0 + 0.1 * std::sin(t)); };
  Problem p{"burgers-var",
            Diffusion::variable(
                d, [d](double, const Vec&) { return Vec(Vec::Constant(d, 0.2)); },
                [d, vol_scale](double t, const Vec&) { return Mat(vol_scale(t) * Mat::Identity(d, d)); }),
            {},
            T,
            cosine_terminal(),
            cosine_solution(kAlpha, T),
            Vec::Constant(d, 0.5),
            constant_vector(b)};
  p.generator.h = [=](double t, const Vec& x) {
    const double s = x.sum();
    const double e = std::exp(kAlpha * (T - t));
    const double v = vol_scale(t);
    return (kAlpha + 0.5 * v * v * d) * std::cos(s) * e + 0.2 * d * std::sin(s) * e +
           b_sum * std::cos(s) * std::sin(s) * e * e;
  };
  p.generator.c = constant_scalar(1.0);
  p.generator.b = {constant_vector(b)};
  p.generator.exponents = {1, 1};
  return p;
}

}  // namespace

Problem builtin_problem(std::string_view name, int dim, double maturity) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw std::invalid_argument("maturity must be > 0");
  Problem p = [&] {
    if (name == "A") return problem_a(dim, maturity);
    if (name == "B") return problem_b(dim, maturity);
    if (name == "C") return problem_c(dim, maturity);
    if (name == "D") return problem_d(dim, maturity);
    if (name == "burgers-var") return problem_burgers_var(dim, maturity);
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
  }();
  p.generator.validate();
  return p;
}

}  // namespace branchmc
