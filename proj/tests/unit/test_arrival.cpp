#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "branchmc/arrival.hpp"

using namespace branchmc;

namespace {

double tail_quadrature(const ArrivalLaw& law, double t) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double s) { return density(law, s); }, t, std::numeric_limits<double>::infinity());
}

double total_mass(const ArrivalLaw& law) {
  boost::math::quadrature::tanh_sinh<double> head;
  const double near = head.integrate([&](double s) { return density(law, s); }, 0.0, 1.0);
  return near + tail_quadrature(law, 1.0);
}

/// t with survival(t) = p, by bisection on the survival function.
double quantile_of_survival(const ArrivalLaw& law, double p) {
  double lo = 0.0, hi = 1.0;
  while (survival(law, hi) > p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (survival(law, mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("density closed forms") {
  CHECK(density(ArrivalLaw::exponential(0.4), 1.0) == doctest::Approx(0.4 * std::exp(-0.4)).epsilon(1e-14));
  CHECK(density(ArrivalLaw::exponential(0.4), 1.0) == doctest::Approx(0.268128).epsilon(1e-6));
  CHECK(density(ArrivalLaw::gamma(0.5, 2.5), 2.5) ==
        doctest::Approx(std::exp(-1.0) / (2.5 * std::sqrt(std::numbers::pi))).epsilon(1e-13));
  CHECK(density(ArrivalLaw::gamma(0.5, 2.5), 2.5) == doctest::Approx(0.083017).epsilon(1e-5));
  CHECK(density(ArrivalLaw::exponential(0.7), 1e-14) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(density(ArrivalLaw::gamma(1.0, 2.0), 0.3) == doctest::Approx(0.5 * std::exp(-0.15)).epsilon(1e-13));
}

TEST_CASE("density rejects nonpositive times") {
  CHECK_THROWS_AS(density(ArrivalLaw::exponential(0.4), 0.0), std::domain_error);
  CHECK_THROWS_AS(density(ArrivalLaw::gamma(0.5, 2.5), -1.0), std::domain_error);
}

TEST_CASE("survival closed forms") {
  for (const auto& law : {ArrivalLaw::exponential(0.4), ArrivalLaw::gamma(0.5, 2.5), ArrivalLaw::gamma(0.3, 1.0)}) {
    CHECK(survival(law, 0.0) == 1.0);
  }
  CHECK(survival(ArrivalLaw::exponential(0.4), 2.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(survival(ArrivalLaw::gamma(0.5, 2.5), 2.5) == doctest::Approx(std::erfc(1.0)).epsilon(1e-12));
  CHECK(survival(ArrivalLaw::gamma(0.5, 2.5), 2.5) == doctest::Approx(0.157299).epsilon(1e-5));
  for (double t : {0.01, 0.3, 1.0, 4.0, 20.0}) {
    CHECK(std::abs(survival(ArrivalLaw::gamma(0.5, 2.5), t) - std::erfc(std::sqrt(t / 2.5))) < 1e-12);
  }
  CHECK_THROWS_AS(survival(ArrivalLaw::exponential(0.4), -0.1), std::domain_error);
}

TEST_CASE("invalid law parameters are rejected") {
  CHECK_THROWS_AS(ArrivalLaw::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalLaw::exponential(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalLaw::gamma(1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalLaw::gamma(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalLaw::gamma(0.5, 0.0), std::invalid_argument);
  CHECK_NOTHROW(ArrivalLaw::gamma(1.0, 1.0));
}

TEST_CASE("density quadrature matches survival") {
  for (const auto& law : {ArrivalLaw::exponential(0.4), ArrivalLaw::gamma(0.5, 2.5), ArrivalLaw::gamma(0.8, 0.7)}) {
    CAPTURE(law.describe());
    CHECK(std::abs(total_mass(law) - 1.0) < 1e-6);
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      CAPTURE(t);
      CHECK(std::abs(tail_quadrature(law, t) - survival(law, t)) < 1e-8);
    }
  }
}

TEST_CASE("survival is strictly decreasing in (0, 1]") {
  for (const auto& law : {ArrivalLaw::exponential(0.4), ArrivalLaw::gamma(0.5, 2.5)}) {
    double prev = survival(law, 0.0);
    for (double t = 0.05; t < 30.0; t += 0.05) {
      const double s = survival(law, t);
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
      CHECK(s < prev);
      prev = s;
    }
  }
}

TEST_CASE("sample means and tails") {
  const int n = 1000000;
  RandomStream rng(11, 0);
  double sum_e = 0.0, sum_g = 0.0;
  int above = 0;
  const auto expo = ArrivalLaw::exponential(0.4);
  const auto gam = ArrivalLaw::gamma(0.5, 2.5);
  for (int i = 0; i < n; ++i) {
    const double te = sample_arrival(expo, rng);
    const double tg = sample_arrival(gam, rng);
    REQUIRE(te > 0.0);
    REQUIRE(tg > 0.0);
    sum_e += te;
    sum_g += tg;
    above += tg > 2.5;
  }
  CHECK(std::abs(sum_e / n - 2.5) < 0.01);
  CHECK(std::abs(sum_g / n - 1.25) < 0.01);
  CHECK(std::abs(static_cast<double>(above) / n - std::erfc(1.0)) < 0.003);
}

TEST_CASE("sample histogram matches the density by decile") {
  const int n = 1000000;
  for (const auto& law : {ArrivalLaw::exponential(0.4), ArrivalLaw::gamma(0.5, 2.5)}) {
    CAPTURE(law.describe());
    std::vector<double> edges;
    for (int k = 1; k < 10; ++k) edges.push_back(quantile_of_survival(law, 1.0 - 0.1 * k));
    std::vector<int> counts(10, 0);
    RandomStream rng(3, 1);
    for (int i = 0; i < n; ++i) {
      const double t = sample_arrival(law, rng);
      ++counts[std::upper_bound(edges.begin(), edges.end(), t) - edges.begin()];
    }
    const double sd = std::sqrt(n * 0.1 * 0.9);
    for (int k = 0; k < 10; ++k) {
      CAPTURE(k);
      CHECK(std::abs(counts[k] - 0.1 * n) < 4.0 * sd);
    }
  }
}
