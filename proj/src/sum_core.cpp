#include "sumlab/sum_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sumlab/errors.hpp"

namespace sumlab::sum {

namespace {

constexpr double kShareTolerance = 1e-12;
constexpr double kQuadratureTolerance = 1e-10;
constexpr int kMaxBracketSteps = 200;
constexpr int kMaxNewtonSteps = 5;

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool open_share(double v) { return finite(v) && v > 0.0 && v < 1.0; }

// ln(α^α β^β)
double log_preference_constant(double alpha, double beta) {
  return alpha * std::log(alpha) + beta * std::log(beta);
}

// ln of the density prefactor so that ln n = log_scale + p·ln(Y − T).
double log_density_scale(const CityParams& p, double utility) {
  const double a = p.a_land;
  const double b = p.b_capital;
  const double ba = p.beta * a;
  return std::log(p.tfp) / a + (b / a) * std::log(b / p.capital_price) +
         (p.alpha * std::log(p.alpha) - std::log(utility)) / ba + (b / a) * std::log(p.beta);
}

double density_exponent(const CityParams& p) {
  const double ba = p.beta * p.a_land;
  return (1.0 - ba) / ba;
}

// Net cost at the fringe for a given utility: Y − Rbar^β·u / (α^α β^β).
double fringe_cost(const CityParams& p, double utility) {
  if (p.farm_rent == 0.0) return p.income;
  const double c = std::exp(log_preference_constant(p.alpha, p.beta));
  return p.income - std::pow(p.farm_rent, p.beta) * utility / c;
}

double fringe_from_utility(const CityParams& p, double utility, const CommuteCost& cost) {
  const double t_bar = fringe_cost(p, utility);
  if (t_bar <= cost(0.0)) return 0.0;
  return cost.distance_at(t_bar);
}

// ∫₀^{d̄} 2πx (1 − T(x)/Y)^p dx, split at envelope kinks. Integrated over
// s = x/d̄ so that error estimates are relative to an O(1) integral.
double shape_integral(const CityParams& p, const CommuteCost& cost, double fringe) {
  if (fringe <= 0.0) return 0.0;
  const double expo = density_exponent(p);
  auto integrand = [&](double s) {
    const double net = std::max(0.0, 1.0 - cost(s * fringe) / p.income);
    return 2.0 * std::numbers::pi * s * std::pow(net, expo);
  };
  std::vector<double> nodes{0.0};
  for (double k : cost.kinks(fringe)) nodes.push_back(k / fringe);
  nodes.push_back(1.0);

  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double err = 0.0;
    const double part = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, nodes[i], nodes[i + 1], 15, 1e-12, &err);
    total += part;
    total_error += err;
  }
  if (!finite(total) || total_error > kQuadratureTolerance * std::abs(total)) {
    std::ostringstream os;
    os << "population quadrature did not converge: integral=" << total
       << " error_estimate=" << total_error << " fringe=" << fringe << " exponent=" << expo;
    throw NumericError(os.str());
  }
  return total * fringe * fringe;
}

struct PopulationEval {
  double population;
  double derivative;  // dN/du
};

PopulationEval evaluate_population(const CityParams& p, double utility, const CommuteCost& cost,
                                   double land_share) {
  const double fringe = fringe_from_utility(p, utility, cost);
  const double log_scale = log_density_scale(p, utility) + density_exponent(p) * std::log(p.income);
  const double scale = land_share * std::exp(log_scale);
  const double pop = fringe > 0.0 ? scale * shape_integral(p, cost, fringe) : 0.0;

  double deriv = -pop / (p.beta * p.a_land * utility);
  if (fringe > 0.0 && p.farm_rent > 0.0) {
    const double c = std::exp(log_preference_constant(p.alpha, p.beta));
    const double dtbar_du = -std::pow(p.farm_rent, p.beta) / c;
    const double dfringe_du = dtbar_du / cost.slope_at(fringe);
    const double edge = std::max(0.0, 1.0 - cost(fringe) / p.income);
    deriv += scale * 2.0 * std::numbers::pi * fringe * std::pow(edge, density_exponent(p)) *
             dfringe_du;
  }
  return {pop, deriv};
}

}  // namespace

// ---------------------------------------------------------------------------

void CityParams::validate() const {
  require(open_share(alpha) && open_share(beta), "alpha and beta must lie in (0,1)");
  require(std::abs(alpha + beta - 1.0) <= kShareTolerance, "alpha + beta must equal 1");
  require(open_share(a_land) && open_share(b_capital), "a_land and b_capital must lie in (0,1)");
  require(std::abs(a_land + b_capital - 1.0) <= kShareTolerance, "a_land + b_capital must equal 1");
  require(finite(tfp) && tfp > 0.0, "tfp must be positive");
  require(finite(capital_price) && capital_price > 0.0, "capital_price must be positive");
  require(finite(income) && income > 0.0, "income must be positive");
  require(finite(t_per_km) && t_per_km > 0.0, "t_per_km must be positive");
  require(finite(farm_rent) && farm_rent >= 0.0, "farm_rent must be non-negative");
  require(finite(population) && population > 0.0, "population must be positive");
}

CityParams CityParams::from_shares(double beta, double a_land) {
  CityParams p;
  p.beta = beta;
  p.alpha = 1.0 - beta;
  p.a_land = a_land;
  p.b_capital = 1.0 - a_land;
  return p;
}

// ---------------------------------------------------------------------------

CommuteCost::CommuteCost(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  require(!pieces_.empty(), "commute cost needs at least one piece");
  for (const auto& pc : pieces_) {
    require(finite(pc.intercept) && pc.intercept >= 0.0, "commute cost intercept must be >= 0");
    require(finite(pc.slope) && pc.slope > 0.0, "commute cost slope must be positive");
  }
}

CommuteCost CommuteCost::linear(double t_per_km) { return CommuteCost({{0.0, t_per_km}}); }

CommuteCost CommuteCost::envelope(std::vector<Piece> pieces) { return CommuteCost(std::move(pieces)); }

double CommuteCost::operator()(double dist) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pc : pieces_) best = std::min(best, pc.intercept + pc.slope * dist);
  return best;
}

double CommuteCost::distance_at(double cost) const {
  double d = 0.0;
  for (const auto& pc : pieces_) d = std::max(d, (cost - pc.intercept) / pc.slope);
  return d;
}

double CommuteCost::slope_at(double dist) const {
  double best = std::numeric_limits<double>::infinity();
  double slope = pieces_.front().slope;
  for (const auto& pc : pieces_) {
    const double v = pc.intercept + pc.slope * dist;
    if (v < best || (v == best && pc.slope < slope)) {
      best = v;
      slope = pc.slope;
    }
  }
  return slope;
}

std::vector<double> CommuteCost::kinks(double limit) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces_.size(); ++j) {
      const double ds = pieces_[i].slope - pieces_[j].slope;
      if (ds == 0.0) continue;
      const double x = (pieces_[j].intercept - pieces_[i].intercept) / ds;
      if (x > 0.0 && x < limit) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

double dwelling_size(double income, double cost, double rent, double beta) {
  require(finite(income) && finite(cost) && finite(rent) && finite(beta), "non-finite input");
  require(rent > 0.0, "rent must be positive");
  require(cost >= 0.0 && cost <= income, "transport cost must lie in [0, income]");
  return beta * (income - cost) / rent;
}

double composite_consumption(double income, double cost, double alpha) {
  require(finite(income) && finite(cost) && finite(alpha), "non-finite input");
  require(cost >= 0.0 && cost <= income, "transport cost must lie in [0, income]");
  return alpha * (income - cost);
}

double bid_rent(double income, double cost, double beta, double central_rent) {
  require(finite(income) && finite(cost) && finite(beta) && finite(central_rent),
          "non-finite input");
  require(central_rent > 0.0, "central rent must be positive");
  require(cost >= 0.0, "transport cost must be non-negative");
  require(cost <= income, "bid-rent undefined for transport cost above income");
  if (cost == income) return 0.0;
  return central_rent * std::pow((income - cost) / income, 1.0 / beta);
}

double central_rent_from_utility(double alpha, double beta, double income, double utility) {
  require(finite(utility) && utility > 0.0, "utility must be positive");
  require(finite(income) && income > 0.0, "income must be positive");
  return std::exp((log_preference_constant(alpha, beta) + std::log(income) - std::log(utility)) /
                  beta);
}

double housing_supply_per_land(double rent, double tfp, double a_land, double b_capital,
                               double capital_price) {
  require(finite(rent) && rent >= 0.0, "rent must be non-negative");
  require(tfp > 0.0 && capital_price > 0.0, "tfp and capital price must be positive");
  require(open_share(a_land) && open_share(b_capital), "production shares must lie in (0,1)");
  if (rent == 0.0) return 0.0;
  return std::pow(tfp, 1.0 / a_land) * std::pow(b_capital * rent / capital_price, b_capital / a_land);
}

double capital_intensity(double rent, double tfp, double a_land, double b_capital,
                         double capital_price) {
  require(finite(rent) && rent >= 0.0, "rent must be non-negative");
  return std::pow(tfp * b_capital * rent / capital_price, 1.0 / a_land);
}

double density_at_rent(double income, double cost, double rent, const CityParams& p) {
  const double supply = housing_supply_per_land(rent, p.tfp, p.a_land, p.b_capital, p.capital_price);
  return supply / dwelling_size(income, cost, rent, p.beta);
}

double log_density(double income, double cost, const CityParams& p, double utility) {
  require(finite(utility) && utility > 0.0, "utility must be positive");
  require(finite(income) && finite(cost), "non-finite input");
  require(cost >= 0.0 && cost < income, "log density needs 0 <= T < Y");
  return log_density_scale(p, utility) + density_exponent(p) * std::log(income - cost);
}

double density(double income, double cost, const CityParams& p, double utility) {
  require(finite(income) && finite(cost), "non-finite input");
  require(cost <= income, "density undefined for transport cost above income");
  if (cost == income) return 0.0;
  return std::exp(log_density(income, cost, p, utility));
}

double fringe_distance(const CityParams& p, double central_rent) {
  return fringe_distance(p, central_rent, CommuteCost::linear(p.t_per_km));
}

double fringe_distance(const CityParams& p, double central_rent, const CommuteCost& cost) {
  require(finite(central_rent) && central_rent > 0.0, "central rent must be positive");
  require(central_rent >= p.farm_rent, "central rent below farm rent: no urban land");
  const double t_bar = p.income * (1.0 - std::pow(p.farm_rent / central_rent, p.beta));
  if (t_bar <= cost(0.0)) return 0.0;
  return cost.distance_at(t_bar);
}

double total_population(const CityParams& p, double utility, double land_share) {
  return total_population(p, utility, CommuteCost::linear(p.t_per_km), land_share);
}

double total_population(const CityParams& p, double utility, const CommuteCost& cost,
                        double land_share) {
  require(finite(utility) && utility > 0.0, "utility must be positive");
  require(finite(land_share) && land_share >= 0.0 && land_share <= 1.0,
          "land share must lie in [0,1]");
  return evaluate_population(p, utility, cost, land_share).population;
}

Equilibrium solve_equilibrium(const CityParams& p, double land_share) {
  return solve_equilibrium(p, CommuteCost::linear(p.t_per_km), land_share);
}

Equilibrium solve_equilibrium(const CityParams& p, const CommuteCost& cost, double land_share) {
  p.validate();
  require(land_share > 0.0 && land_share <= 1.0, "land share must lie in (0,1]");
  const double target = p.population;
  auto pop = [&](double u) { return evaluate_population(p, u, cost, land_share).population; };

  // Population is strictly decreasing in u; expand geometrically from u = 1.
  double lo = 1.0;
  double hi = 1.0;
  if (pop(1.0) > target) {
    int steps = 0;
    while (pop(hi) > target) {
      lo = hi;
      hi *= 2.0;
      if (++steps > kMaxBracketSteps)
        throw NoEquilibriumError("utility bracket expansion failed (population never falls)");
    }
  } else {
    int steps = 0;
    while (!(pop(lo) > target)) {
      hi = lo;
      lo *= 0.5;
      if (++steps > kMaxBracketSteps)
        throw NoEquilibriumError(
            "utility bracket expansion failed: no positive-population city at these parameters");
    }
  }

  auto residual = [&](double u) { return pop(u) / target - 1.0; };

  // Bisection in log u down to a coarse residual, Newton afterwards.
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  double u = std::sqrt(lo * hi);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    u = std::exp(mid);
    const double r = residual(u);
    if (std::abs(r) <= 1e-6) break;
    if (r > 0.0) log_lo = mid; else log_hi = mid;
    if (log_hi - log_lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
      break;
  }

  bool polished = false;
  for (int it = 0; it < kMaxNewtonSteps; ++it) {
    const auto ev = evaluate_population(p, u, cost, land_share);
    const double r = ev.population / target - 1.0;
    if (std::abs(r) <= 1e-14) {
      polished = true;
      break;
    }
    if (!(ev.derivative < 0.0) || !finite(ev.derivative)) break;
    const double next = u - (ev.population - target) / ev.derivative;
    if (!(next > std::exp(log_lo) && next < std::exp(log_hi))) break;
    u = next;
    polished = std::abs(residual(u)) <= kClosureTolerance;
  }

  if (!polished) {
    // Newton left the bracket or stalled: finish by bisection alone.
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (log_lo + log_hi);
      u = std::exp(mid);
      const double r = residual(u);
      if (r == 0.0) break;
      if (r > 0.0) log_lo = mid; else log_hi = mid;
      if (log_hi - log_lo <= 2 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
        break;
    }
  }

  Equilibrium eq;
  eq.utility = u;
  eq.central_rent = central_rent_from_utility(p.alpha, p.beta, p.income, u);
  eq.fringe = fringe_from_utility(p, u, cost);
  eq.closure_residual = residual(u);
  if (!(std::abs(eq.closure_residual) <= kClosureTolerance)) {
    std::ostringstream os;
    os << "closure residual " << eq.closure_residual << " above tolerance at u=" << u;
    throw NumericError(os.str());
  }
  return eq;
}

// ---------------------------------------------------------------------------

std::string_view to_string(StaticsParameter which) {
  switch (which) {
    case StaticsParameter::Population: return "population";
    case StaticsParameter::Income: return "income";
    case StaticsParameter::TransportCost: return "transport_cost";
    case StaticsParameter::FarmRent: return "farm_rent";
  }
  return "unknown";
}

CityParams perturbed(const CityParams& p, StaticsParameter which, double factor) {
  CityParams q = p;
  switch (which) {
    case StaticsParameter::Population: q.population *= factor; break;
    case StaticsParameter::Income: q.income *= factor; break;
    case StaticsParameter::TransportCost: q.t_per_km *= factor; break;
    case StaticsParameter::FarmRent: q.farm_rent *= factor; break;
  }
  return q;
}

ComparativeStaticsReport comparative_statics(const CityParams& p, StaticsParameter which,
                                             double rel_step) {
  require(finite(rel_step) && rel_step > 0.0 && rel_step <= 0.5, "rel_step must lie in (0, 0.5]");
  ComparativeStaticsReport rep;
  rep.parameter = which;
  rep.expected_sign =
      (which == StaticsParameter::Population || which == StaticsParameter::Income) ? 1 : -1;
  rep.baseline_fringe = solve_equilibrium(p).fringe;
  rep.perturbed_fringe = solve_equilibrium(perturbed(p, which, 1.0 + rel_step)).fringe;
  const double delta = rep.perturbed_fringe - rep.baseline_fringe;
  if (std::abs(delta) <= kClosureTolerance * std::abs(rep.baseline_fringe)) {
    rep.sign = 0;
    rep.degenerate = true;
  } else {
    rep.sign = delta > 0.0 ? 1 : -1;
  }
  return rep;
}

}  // namespace sumlab::sum
