#include "branchmc/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "branchmc/euler.hpp"
#include "branchmc/fullnonlinear.hpp"
#include "branchmc/semilinear.hpp"

namespace branchmc {

namespace {

struct SchemeEntry {
  SchemeId id;
  std::string_view name;
};

constexpr SchemeEntry kSchemes[] = {
    {SchemeId::Original, "original"},
    {SchemeId::Nested, "nested"},
    {SchemeId::Renorm, "renorm"},
    {SchemeId::RenormAntithetic, "renorm-anti"},
    {SchemeId::V1, "v1"},
    {SchemeId::V2, "v2"},
    {SchemeId::V3, "v3"},
    {SchemeId::OriginalEuler, "original-euler"},
    {SchemeId::RenormEuler, "renorm-euler"},
    {SchemeId::RenormAntitheticEuler, "renorm-anti-euler"},
};

bool uses_two_laws(SchemeId s) {
  return s == SchemeId::Original || s == SchemeId::Nested || s == SchemeId::OriginalEuler;
}

}  // namespace

SchemeId parse_scheme(std::string_view name) {
  for (const auto& e : kSchemes) {
    if (e.name == name) return e.id;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(SchemeId scheme) {
  for (const auto& e : kSchemes) {
    if (e.id == scheme) return e.name;
  }
  return "unknown";
}

bool is_euler(SchemeId s) {
  return s == SchemeId::OriginalEuler || s == SchemeId::RenormEuler || s == SchemeId::RenormAntitheticEuler;
}

Quantity parse_quantity(std::string_view name) {
  if (name == "value") return Quantity::Value;
  if (name == "gradient") return Quantity::Gradient;
  throw std::invalid_argument("unknown quantity '" + std::string(name) + "'");
}

std::string_view quantity_name(Quantity q) { return q == Quantity::Value ? "value" : "gradient"; }

void RunConfig::validate() const {
  if (n_particles < 1) throw std::invalid_argument("particles must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (nested_order < 1) throw std::invalid_argument("nested order must be >= 1");
  if (is_euler(scheme) && !(euler_dt > 0.0)) throw std::invalid_argument("Euler schemes need euler_dt > 0");
  if (!is_euler(scheme) && euler_dt != 0.0) throw std::invalid_argument("euler_dt is only used by Euler schemes");
  if (node_budget < 1) throw std::invalid_argument("node budget must be >= 1");
  // Law parameters are checked by the ArrivalLaw constructors.
  make_recursion_config(*this);
}

void Accumulator::add(double x) {
  ++n;
  const double delta = x - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (x - mean);
}

void Accumulator::merge(const Accumulator& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(o.n);
  const double total = na + nb;
  const double delta = o.mean - mean;
  mean += delta * nb / total;
  m2 += o.m2 + delta * delta * na * nb / total;
  n += o.n;
}

RunResult run_draws(const DrawFactory& factory, std::size_t n, std::uint64_t seed, unsigned workers) {
  if (n < 1) throw std::invalid_argument("particles must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  const std::size_t batches = (n + kBatchSize - 1) / kBatchSize;
  std::vector<Accumulator> stats(batches);
  std::vector<std::size_t> failures(batches, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    try {
      Draw draw = factory();
      for (std::size_t b = next++; b < batches; b = next++) {
        RandomStream rng(seed, b);
        const std::size_t count = std::min(kBatchSize, n - b * kBatchSize);
        for (std::size_t i = 0; i < count; ++i) {
          try {
            stats[b].add(draw(rng));
          } catch (const NodeBudgetExceeded&) {
            ++failures[b];
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = batches;
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, batches));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  Accumulator total;
  RunResult r;
  for (std::size_t b = 0; b < batches; ++b) {
    total.merge(stats[b]);
    r.failures += failures[b];
  }
  if (total.n == 0) throw std::runtime_error("all " + std::to_string(n) + " draws exceeded the node budget");
  r.estimate = total.mean;
  r.n = total.n;
  r.std_error_defined = total.n > 1;
  r.std_error = r.std_error_defined ? std::sqrt(total.variance() / static_cast<double>(total.n)) : 0.0;
  r.seed = seed;
  r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Problem make_problem(const RunConfig& config) {
  if (config.problem_file.empty()) return builtin_problem(config.problem, config.dim, config.maturity);
  std::ifstream in(config.problem_file);
  if (!in) throw std::invalid_argument("cannot open problem file '" + config.problem_file + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_problem_json(buf.str());
}

RecursionConfig make_recursion_config(const RunConfig& c) {
  const ArrivalLaw value_law = ArrivalLaw::exponential(c.lambda.value_or(0.4));
  const bool gamma = uses_two_laws(c.scheme) || c.kappa || c.theta;
  const ArrivalLaw derivative_law =
      gamma ? ArrivalLaw::gamma(c.kappa.value_or(0.5), c.theta.value_or(2.5)) : value_law;

  SemiSchemeConfig semi;
  semi.law_u = value_law;
  semi.law_grad = derivative_law;
  semi.nested_order = c.nested_order;
  semi.node_budget = c.node_budget;

  NonlinearSchemeConfig full;
  full.laws = {value_law, derivative_law, derivative_law};
  full.nested_order = c.nested_order;
  full.node_budget = c.node_budget;

  switch (c.scheme) {
    case SchemeId::Original:
      semi.scheme = SemiScheme::Original;
      semi.nested_order = 1;
      return recursion_config(semi);
    case SchemeId::Nested:
      semi.scheme = SemiScheme::Original;
      return recursion_config(semi);
    case SchemeId::Renorm:
      semi.scheme = SemiScheme::Renorm;
      return recursion_config(semi);
    case SchemeId::RenormAntithetic:
      semi.scheme = SemiScheme::RenormAntithetic;
      return recursion_config(semi);
    case SchemeId::V1:
      full.scheme = NonlinearScheme::V1;
      return recursion_config(full);
    case SchemeId::V2:
      full.scheme = NonlinearScheme::V2;
      return recursion_config(full);
    case SchemeId::V3:
      full.scheme = NonlinearScheme::V3;
      return recursion_config(full);
    case SchemeId::OriginalEuler:
      return recursion_config(semi, {c.euler_dt, EulerScheme::OriginalEuler});
    case SchemeId::RenormEuler:
      return recursion_config(semi, {c.euler_dt, EulerScheme::RenormEuler});
    case SchemeId::RenormAntitheticEuler:
      return recursion_config(semi, {c.euler_dt, EulerScheme::RenormAntitheticEuler});
  }
  throw std::invalid_argument("unknown scheme");
}

DrawFactory make_draw_factory(const RunConfig& config, std::shared_ptr<const Problem> problem) {
  const RecursionConfig rc = make_recursion_config(config);
  { BackwardRecursion check(*problem, rc); }  // rejects bad scheme/problem pairings up front
  const Quantity q = config.quantity;
  return [problem, rc, q]() -> Draw {
    auto rec = std::make_shared<BackwardRecursion>(*problem, rc);
    return [problem, rec, q](RandomStream& rng) { return rec->draw(rng, q); };
  };
}

RunResult run(const RunConfig& config) {
  config.validate();
  auto problem = std::make_shared<const Problem>(make_problem(config));
  return run_draws(make_draw_factory(config, problem), config.n_particles, config.seed, config.workers);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct abscissae");
  return sxy / sxx;
}

ConvergenceSeries convergence_study(const DrawFactory& factory, std::span<const std::size_t> ns, std::uint64_t seed,
                                    unsigned workers) {
  if (ns.size() < 3) throw std::invalid_argument("a convergence study needs at least three particle counts");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw std::invalid_argument("particle counts must be strictly increasing");
  }
  ConvergenceSeries series;
  std::vector<double> lx, ly;
  bool defined = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    series.points.push_back(run_draws(factory, ns[i], derive_seed(seed, i), workers));
    const RunResult& r = series.points.back();
    if (!(r.std_error > 0.0)) defined = false;
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(defined ? std::log(r.std_error) : 0.0);
  }
  series.slope_defined = defined;
  if (defined) series.slope = ols_slope(lx, ly);
  return series;
}

ConvergenceSeries convergence_study(const RunConfig& config, std::span<const std::size_t> ns) {
  config.validate();
  auto problem = std::make_shared<const Problem>(make_problem(config));
  return convergence_study(make_draw_factory(config, problem), ns, config.seed, config.workers);
}

}  // namespace branchmc
