#pragma once

#include <string>
#include <variant>

#include "branchmc/rng.hpp"

namespace branchmc {

struct Exponential {
  double rate;  // λ, 1/time
};

/// Gamma law restricted to shape in (0, 1]; scale has units of time.
struct Gamma {
  double shape;  // κ
  double scale;  // θ
};

/// Distribution of the branching time τ of one particle.
class ArrivalLaw {
 public:
  ArrivalLaw(Exponential e);
  ArrivalLaw(Gamma g);

  static ArrivalLaw exponential(double rate) { return ArrivalLaw(Exponential{rate}); }
  static ArrivalLaw gamma(double shape, double scale) { return ArrivalLaw(Gamma{shape, scale}); }

  bool is_exponential() const { return std::holds_alternative<Exponential>(law_); }
  const std::variant<Exponential, Gamma>& variant() const { return law_; }
  double mean() const;
  std::string describe() const;

 private:
  std::variant<Exponential, Gamma> law_;
};

/// ρ(s). Throws std::domain_error for s <= 0.
double density(const ArrivalLaw& law, double s);

/// F̄(t) = P(τ > t). Throws std::domain_error for t < 0.
double survival(const ArrivalLaw& law, double t);

/// Strictly positive draw from the law; zero draws are redrawn.
double sample_arrival(const ArrivalLaw& law, RandomStream& rng);

}  // namespace branchmc
