#include "branchmc/arrival.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace branchmc {

ArrivalLaw::ArrivalLaw(Exponential e) : law_(e) {
  if (!(e.rate > 0.0) || !std::isfinite(e.rate)) {
    throw std::invalid_argument("exponential arrival law needs rate > 0");
  }
}

ArrivalLaw::ArrivalLaw(Gamma g) : law_(g) {
  if (!(g.shape > 0.0 && g.shape <= 1.0)) {
    throw std::invalid_argument("gamma arrival law needs shape in (0, 1]");
  }
  if (!(g.scale > 0.0) || !std::isfinite(g.scale)) {
    throw std::invalid_argument("gamma arrival law needs scale > 0");
  }
}

double ArrivalLaw::mean() const {
  if (const auto* e = std::get_if<Exponential>(&law_)) return 1.0 / e->rate;
  const auto& g = std::get<Gamma>(law_);
  return g.shape * g.scale;
}

std::string ArrivalLaw::describe() const {
  std::ostringstream os;
  if (const auto* e = std::get_if<Exponential>(&law_)) {
    os << "exponential(rate=" << e->rate << ")";
  } else {
    const auto& g = std::get<Gamma>(law_);
    os << "gamma(shape=" << g.shape << ", scale=" << g.scale << ")";
  }
  return os.str();
}

double density(const ArrivalLaw& law, double s) {
  if (!(s > 0.0)) throw std::domain_error("arrival density needs s > 0");
  if (const auto* e = std::get_if<Exponential>(&law.variant())) {
    return e->rate * std::exp(-e->rate * s);
  }
  const auto& g = std::get<Gamma>(law.variant());
  const double log_rho =
      (g.shape - 1.0) * std::log(s) - s / g.scale - std::lgamma(g.shape) - g.shape * std::log(g.scale);
  return std::exp(log_rho);
}

double survival(const ArrivalLaw& law, double t) {
  if (!(t >= 0.0)) throw std::domain_error("arrival survival needs t >= 0");
  if (const auto* e = std::get_if<Exponential>(&law.variant())) {
    return std::exp(-e->rate * t);
  }
  const auto& g = std::get<Gamma>(law.variant());
  if (t == 0.0) return 1.0;
  return boost::math::gamma_q(g.shape, t / g.scale);
}

double sample_arrival(const ArrivalLaw& law, RandomStream& rng) {
  double tau = 0.0;
  if (const auto* e = std::get_if<Exponential>(&law.variant())) {
    std::exponential_distribution<double> dist(e->rate);
    do {
      tau = dist(rng.engine());
    } while (!(tau > 0.0));
  } else {
    const auto& g = std::get<Gamma>(law.variant());
    // libstdc++ handles shape < 1 by Marsaglia-Tsang on shape + 1 with a
    // U^(1/shape) boost; U^(1/shape) can underflow to an exact zero.
    std::gamma_distribution<double> dist(g.shape, g.scale);
    do {
      tau = dist(rng.engine());
    } while (!(tau > 0.0));
  }
  return tau;
}

}  // namespace branchmc
