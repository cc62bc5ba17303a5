#pragma once

#include <cmath>
#include <random>

#include "sumlab/sum_core.hpp"

namespace testsupport {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Population of a linear-cost city with utility u, from the antiderivative of
// 2πx(1 − tx/Y)^p: with s = 1 − t·d̄/Y the integral is
// 2π(Y/t)²[(1 − s^{p+1})/(p+1) − (1 − s^{p+2})/(p+2)].
inline double analytic_population(const sumlab::sum::CityParams& p, double u) {
  const double ba = p.beta * p.a_land;
  const double e = (1.0 - ba) / ba;
  const double c = std::pow(p.alpha, p.alpha) * std::pow(p.beta, p.beta);
  const double t_bar = p.income - std::pow(p.farm_rent, p.beta) * u / c;
  const double s = 1.0 - t_bar / p.income;
  const double scale = std::pow(p.tfp, 1.0 / p.a_land) *
                       std::pow(p.b_capital / p.capital_price, p.b_capital / p.a_land) *
                       std::pow(std::pow(p.alpha, p.alpha) / u, 1.0 / ba) *
                       std::pow(p.beta, p.b_capital / p.a_land) * std::pow(p.income, e);
  const double ratio = p.income / p.t_per_km;
  const double shape = (1.0 - std::pow(s, e + 1.0)) / (e + 1.0) -
                       (1.0 - std::pow(s, e + 2.0)) / (e + 2.0);
  return scale * 2.0 * 3.14159265358979323846 * ratio * ratio * shape;
}

// Parameter draw covering shares and scales seen in practice. The city size is
// drawn through its fringe (3 to 50 km), and N* follows from the closed form.
inline sumlab::sum::CityParams random_params(std::mt19937_64& rng) {
  auto p = sumlab::sum::CityParams::from_shares(uniform(rng, 0.15, 0.6), uniform(rng, 0.08, 0.6));
  p.tfp = log_uniform(rng, 0.5, 2.0);
  p.capital_price = log_uniform(rng, 0.5, 2.0);
  p.income = log_uniform(rng, 50.0, 500.0);
  p.t_per_km = log_uniform(rng, 0.5, 10.0);
  p.farm_rent = log_uniform(rng, 0.5, 50.0);
  const double fringe = std::min(log_uniform(rng, 3.0, 50.0), 0.9 * p.income / p.t_per_km);
  const double c = std::pow(p.alpha, p.alpha) * std::pow(p.beta, p.beta);
  const double u = c * (p.income - p.t_per_km * fringe) / std::pow(p.farm_rent, p.beta);
  p.population = analytic_population(p, u);
  return p;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace testsupport
