#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "branchmc/recursion.hpp"

namespace branchmc {

enum class SchemeId {
  Original,
  Nested,
  Renorm,
  RenormAntithetic,
  V1,
  V2,
  V3,
  OriginalEuler,
  RenormEuler,
  RenormAntitheticEuler,
};

/// CLI spelling: original, nested, renorm, renorm-anti, v1, v2, v3,
/// original-euler, renorm-euler, renorm-anti-euler.
SchemeId parse_scheme(std::string_view name);
std::string_view scheme_name(SchemeId scheme);
bool is_euler(SchemeId scheme);

Quantity parse_quantity(std::string_view name);
std::string_view quantity_name(Quantity quantity);

struct RunConfig {
  std::string problem = "A";
  std::string problem_file;  // JSON problem description; overrides `problem`
  int dim = 4;
  double maturity = 1.0;
  SchemeId scheme = SchemeId::RenormAntithetic;
  int nested_order = 1;
  std::optional<double> lambda;  // rate of the exponential laws, default 0.4
  std::optional<double> kappa;   // gamma shape for derivative marks
  std::optional<double> theta;   // gamma scale for derivative marks
  double euler_dt = 0.0;
  std::size_t n_particles = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Quantity quantity = Quantity::Value;
  std::size_t node_budget = 100000;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct RunResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;  // successful draws
  std::size_t failures = 0;
  double elapsed_s = 0.0;
  bool std_error_defined = true;  // false when n == 1
  std::uint64_t seed = 0;
};

struct ConvergenceSeries {
  std::vector<RunResult> points;
  double slope = 0.0;
  bool slope_defined = false;  // false when some stderr is zero
};

/// Streaming mean/variance (Welford) with the Chan et al. merge.
struct Accumulator {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Accumulator& other);
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

using Draw = std::function<double(RandomStream&)>;
/// Called once per worker; each returned Draw is used by a single thread.
using DrawFactory = std::function<Draw()>;

inline constexpr std::size_t kBatchSize = 1024;

/// Runs n draws in batches of kBatchSize; batch i uses RandomStream(seed, i).
/// Batches are merged in index order so the result does not depend on the
/// number of workers. NodeBudgetExceeded draws are counted and skipped.
/// Throws std::runtime_error when every draw fails.
RunResult run_draws(const DrawFactory& factory, std::size_t n, std::uint64_t seed, unsigned workers);

Problem make_problem(const RunConfig& config);
RecursionConfig make_recursion_config(const RunConfig& config);
DrawFactory make_draw_factory(const RunConfig& config, std::shared_ptr<const Problem> problem);

RunResult run(const RunConfig& config);

/// One run per N with seed derive_seed(seed, i) for the i-th point. Needs at
/// least three strictly increasing N.
ConvergenceSeries convergence_study(const RunConfig& config, std::span<const std::size_t> ns);
ConvergenceSeries convergence_study(const DrawFactory& factory, std::span<const std::size_t> ns, std::uint64_t seed,
                                    unsigned workers);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace branchmc
