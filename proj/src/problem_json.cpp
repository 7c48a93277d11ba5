#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "branchmc/problem.hpp"

namespace branchmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("problem file: " + what); }

Vec read_vector(const json& j, int d, const std::string& key) {
  if (j.is_number()) return Vec::Constant(d, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != d) fail("'" + key + "' must be a number or an array of length dim");
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = j[i].get<double>();
  return v;
}

/// A number s stands for s·I.
Mat read_matrix(const json& j, int d, const std::string& key) {
  if (j.is_number()) return Mat(Mat::Identity(d, d) * j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != d) fail("'" + key + "' must be a number or a dim x dim array");
  Mat m(d, d);
  for (int r = 0; r < d; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != d) fail("'" + key + "' rows must have length dim");
    for (int c = 0; c < d; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

TerminalFunction read_terminal(const json& j, int d) {
  const std::string type = j.value("type", "cos-sum");
  if (type == "cos-sum") return [](const Vec& x) { return std::cos(x.sum()); };
  if (type == "linear") {
    const Vec coef = read_vector(j.at("coefficients"), d, "terminal.coefficients");
    const double offset = j.value("offset", 0.0);
    return [=](const Vec& x) { return offset + coef.dot(x); };
  }
  if (type == "constant") {
    const double v = j.at("value").get<double>();
    return [=](const Vec&) { return v; };
  }
  fail("unknown terminal type '" + type + "'");
}

}  // namespace

Problem load_problem_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(e.what());
  }
  try {
    const int d = j.at("dim").get<int>();
    if (d < 1 || d > kMaxDim) fail("dim must be in [1, " + std::to_string(kMaxDim) + "]");
    const double T = j.at("maturity").get<double>();
    if (!(T > 0.0)) fail("maturity must be > 0");

    const Vec mu = read_vector(j.value("drift", json(0.0)), d, "drift");
    const Mat sigma = read_matrix(j.value("volatility", json(1.0)), d, "volatility");

    MonomialGenerator gen;
    gen.exponents = j.at("exponents").get<std::vector<int>>();
    gen.c = [c = j.value("c", 1.0)](double, const Vec&) { return c; };
    for (const json& b : j.value("gradient_directions", json::array())) {
      gen.b.push_back([v = read_vector(b, d, "gradient_directions")](double, const Vec&) { return v; });
    }
    for (const json& a : j.value("hessian_matrices", json::array())) {
      gen.a.push_back([m = read_matrix(a, d, "hessian_matrices")](double, const Vec&) { return m; });
    }
    gen.h = [](double, const Vec&) { return 0.0; };

    Problem p{j.value("name", std::string("custom")),
              Diffusion::constant(mu, sigma),
              std::move(gen),
              T,
              read_terminal(j.value("terminal", json::object()), d),
              std::nullopt,
              read_vector(j.value("x0", json(0.5)), d, "x0"),
              {}};
    p.generator.validate();

    const Vec direction = j.contains("root_direction") ? read_vector(j["root_direction"], d, "root_direction")
                                                       : Vec(Vec::Ones(d));
    p.gradient_direction = [direction](double, const Vec&) { return direction; };

    const json source = j.value("source", json{{"type", "zero"}});
    const std::string type = source.value("type", "zero");
    if (type == "constant") {
      p.generator.h = [v = source.at("value").get<double>()](double, const Vec&) { return v; };
    } else if (type == "manufactured") {
      if (j.contains("terminal") && j["terminal"].value("type", "cos-sum") != "cos-sum") {
        fail("a manufactured source requires the cos-sum terminal");
      }
      p.solution = cosine_solution(source.value("alpha", 0.2), T);
      p.generator.h = manufactured_source(p, *p.solution);
    } else if (type != "zero") {
      fail("unknown source type '" + type + "'");
    }
    return p;
  } catch (const json::exception& e) {
    fail(e.what());
  }
}

}  // namespace branchmc
