// branchsolve: run a branching-diffusion estimator and write CSV/JSON rows.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "branchmc/emit.hpp"
#include "branchmc/runner.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::optional<std::string> config_path;
  std::optional<std::string> problem, problem_file, scheme, quantity, out, format, study;
  std::optional<int> dim, nested_order;
  std::optional<double> maturity, lambda, kappa, theta, euler_dt;
  std::optional<std::size_t> particles, node_budget;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool omit_timing = false;
};

template <class T>
void merge(std::optional<T>& cli, const json& file, const char* key) {
  if (cli || !file.contains(key)) return;
  cli = file.at(key).get<T>();
}

std::vector<std::size_t> parse_study(const std::string& text) {
  std::vector<std::size_t> ns;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size() || !(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw std::invalid_argument("bad particle count '" + item + "' in --study");
    }
    ns.push_back(static_cast<std::size_t>(v));
  }
  return ns;
}

int run(const Options& cli) {
  Options o = cli;
  if (o.config_path) {
    std::ifstream in(*o.config_path);
    if (!in) throw std::invalid_argument("cannot open config file '" + *o.config_path + "'");
    const json file = json::parse(in);
    if (!file.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    merge(o.problem, file, "problem");
    merge(o.problem_file, file, "problem-file");
    merge(o.scheme, file, "scheme");
    merge(o.quantity, file, "quantity");
    merge(o.out, file, "out");
    merge(o.format, file, "format");
    merge(o.dim, file, "dim");
    merge(o.nested_order, file, "nested-order");
    merge(o.maturity, file, "maturity");
    merge(o.lambda, file, "lambda");
    merge(o.kappa, file, "kappa");
    merge(o.theta, file, "theta");
    merge(o.euler_dt, file, "euler-dt");
    merge(o.particles, file, "particles");
    merge(o.node_budget, file, "node-budget");
    merge(o.seed, file, "seed");
    merge(o.workers, file, "workers");
    if (!o.study && file.contains("study")) {
      const json& s = file["study"];
      if (s.is_string()) {
        o.study = s.get<std::string>();
      } else {
        std::string joined;
        for (const auto& n : s) joined += (joined.empty() ? "" : ",") + std::to_string(n.get<std::size_t>());
        o.study = joined;
      }
    }
    if (file.value("omit-timing", false)) o.omit_timing = true;
  }

  branchmc::RunConfig c;
  if (o.problem) c.problem = *o.problem;
  if (o.problem_file) c.problem_file = *o.problem_file;
  if (o.dim) c.dim = *o.dim;
  if (o.maturity) c.maturity = *o.maturity;
  if (o.scheme) c.scheme = branchmc::parse_scheme(*o.scheme);
  if (o.nested_order) c.nested_order = *o.nested_order;
  c.lambda = o.lambda;
  c.kappa = o.kappa;
  c.theta = o.theta;
  if (o.euler_dt) c.euler_dt = *o.euler_dt;
  if (o.particles) c.n_particles = *o.particles;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.quantity) c.quantity = branchmc::parse_quantity(*o.quantity);
  if (o.node_budget) c.node_budget = *o.node_budget;
  const auto format = branchmc::parse_format(o.format.value_or("csv"));

  if (!c.problem_file.empty()) {
    // Dimension and maturity come from the problem file.
    const branchmc::Problem p = branchmc::make_problem(c);
    c.dim = p.dim();
    c.maturity = p.maturity;
  }

  std::vector<branchmc::RunResult> results;
  if (o.study) {
    const auto ns = parse_study(*o.study);
    const auto series = branchmc::convergence_study(c, ns);
    results = series.points;
    std::cerr << json{{"slope", series.slope_defined ? json(series.slope) : json(nullptr)},
                      {"slope_defined", series.slope_defined}}
                     .dump()
              << '\n';
  } else {
    results.push_back(branchmc::run(c));
  }

  std::vector<branchmc::ResultRow> rows;
  std::size_t failures = 0;
  for (const auto& r : results) {
    rows.push_back(branchmc::make_row(c, r));
    if (o.omit_timing) rows.back().elapsed_s = 0.0;
    failures += r.failures;
    if (!r.std_error_defined) std::cerr << json{{"warning", "stderr undefined for a single draw"}}.dump() << '\n';
  }
  if (failures > 0) std::cerr << json{{"budget_failures", failures}}.dump() << '\n';

  if (o.out && !o.out->empty()) {
    branchmc::emit(rows, *o.out, format);
  } else if (format == branchmc::OutputFormat::Csv) {
    branchmc::write_csv(rows, std::cout);
  } else {
    branchmc::write_json(rows, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo branching-diffusion solver for semilinear and fully nonlinear PDEs"};
  Options o;
  app.add_option("--config", o.config_path, "JSON file with the same keys; command-line values win");
  app.add_option("--problem", o.problem, "A, B, C, D or burgers-var");
  app.add_option("--problem-file", o.problem_file, "JSON description of a custom problem");
  app.add_option("--dim", o.dim, "space dimension");
  app.add_option("--maturity", o.maturity, "maturity T");
  app.add_option("--scheme", o.scheme,
                 "original, nested, renorm, renorm-anti, v1, v2, v3, original-euler, renorm-euler, renorm-anti-euler");
  app.add_option("--nested-order", o.nested_order, "nested order n");
  app.add_option("--particles", o.particles, "number of draws N");
  app.add_option("--lambda", o.lambda, "rate of the exponential arrival law");
  app.add_option("--kappa", o.kappa, "gamma shape for derivative marks");
  app.add_option("--theta", o.theta, "gamma scale for derivative marks");
  app.add_option("--euler-dt", o.euler_dt, "Euler time step");
  app.add_option("--quantity", o.quantity, "value or gradient");
  app.add_option("--seed", o.seed, "64-bit seed");
  app.add_option("--workers", o.workers, "worker threads");
  app.add_option("--node-budget", o.node_budget, "maximum nodes per sampled tree");
  app.add_option("--out", o.out, "output path (default stdout)");
  app.add_option("--format", o.format, "csv or json");
  app.add_option("--study", o.study, "comma-separated increasing particle counts");
  app.add_flag("--omit-timing", o.omit_timing, "write elapsed_s as 0 for reproducible output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 2;
  }
  try {
    return run(o);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
}
