#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "branchmc/linalg.hpp"

namespace branchmc {

using ScalarField = std::function<double(double t, const Vec& x)>;
using VectorField = std::function<Vec(double t, const Vec& x)>;
using MatrixField = std::function<Mat(double t, const Vec& x)>;
using TerminalFunction = std::function<double(const Vec& x)>;

/// Drift μ and volatility σ0 of the underlying diffusion, either constant or
/// given as (t, x) fields. Constant volatility is inverted once at
/// construction.
class Diffusion {
 public:
  /// Throws std::invalid_argument when sigma is singular or shapes disagree.
  static Diffusion constant(Vec drift, Mat sigma);
  static Diffusion variable(int dim, VectorField drift, MatrixField sigma);

  int dim() const { return dim_; }
  bool is_constant() const { return constant_; }

  Vec drift(double t, const Vec& x) const;
  Mat volatility(double t, const Vec& x) const;

  /// σ0⁻¹; only for constant diffusions.
  const Mat& sigma_inverse() const;
  /// σ0(t, x)⁻¹, checked for singularity.
  Mat sigma_inverse_at(double t, const Vec& x) const;

 private:
  Diffusion() = default;

  int dim_ = 0;
  bool constant_ = true;
  Vec drift_;
  Mat sigma_;
  Mat sigma_inv_;
  VectorField drift_field_;
  MatrixField sigma_field_;
};

/// f(t,x,y,z,γ) = h + c · y^ℓ0 · Π_{i=1..m} (b_i·z)^ℓi · Π_{i=m+1..2m} (a_i:γ)^ℓi.
///
/// `exponents` holds ℓ0..ℓm for a semilinear generator or ℓ0..ℓ2m when
/// Hessian factors are present.
struct MonomialGenerator {
  ScalarField h;
  ScalarField c;
  std::vector<VectorField> b;  // m gradient directions
  std::vector<MatrixField> a;  // m Hessian contraction matrices, or empty
  std::vector<int> exponents;

  int m() const { return static_cast<int>(b.size()); }
  int total_order() const;
  bool is_semilinear() const;
  /// Throws std::invalid_argument on inconsistent shapes or exponents.
  void validate() const;
};

/// Coefficients of a generator evaluated at one space-time point.
struct GeneratorCoeffs {
  double h = 0.0;
  double c = 0.0;
  std::vector<Vec> b;  // b_1..b_m
  std::vector<Mat> a;  // a_{m+1}..a_{2m}
};

struct AnalyticSolution {
  ScalarField u;
  ScalarField du_dt;
  VectorField gradient;
  MatrixField hessian;
};

struct Problem {
  std::string name;
  Diffusion diffusion;
  MonomialGenerator generator;
  double maturity = 1.0;
  TerminalFunction terminal;
  std::optional<AnalyticSolution> solution;
  Vec x0;
  /// Direction d of the root gradient quantity d·Du(0, x0).
  VectorField gradient_direction;

  int dim() const { return diffusion.dim(); }
};

/// Built-in problems: "A", "B", "C", "D" and the variable-coefficient
/// "burgers-var". Throws std::invalid_argument for unknown names, d < 1,
/// T <= 0, d > kMaxDim or D with d != 4.
Problem builtin_problem(std::string_view name, int dim, double maturity);

/// ∂t u + ½σσᵀ:D²u + μ·Du + f(t, x, u, Du, D²u) for the analytic solution.
/// Throws std::logic_error when the problem has none.
double pde_residual(const Problem& problem, double t, const Vec& x);

GeneratorCoeffs evaluate_generator_coeffs(const Problem& problem, double t, const Vec& x);
/// In-place variant reusing the storage of `out`.
void evaluate_generator_coeffs(const Problem& problem, double t, const Vec& x, GeneratorCoeffs& out);

/// The source h that makes `solution` exact for the remaining data of
/// `problem` (its own h is ignored).
ScalarField manufactured_source(const Problem& problem, const AnalyticSolution& solution);

/// u(t,x) = cos(Σx) e^{α(T−t)} with derivatives.
AnalyticSolution cosine_solution(double alpha, double maturity);

/// Loads a custom problem from a JSON description (see README).
Problem load_problem_json(const std::string& text);

}  // namespace branchmc
