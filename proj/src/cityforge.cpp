#include "sumlab/cityforge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sumlab/errors.hpp"

namespace sumlab::forge {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Per-cell standard-normal shocks, drawn in a fixed order so that switching one
// noise source on or off leaves the others unchanged for a given seed.
struct Shocks {
  double mask_u;
  double congestion;
  double rent;
  double density;
};

Shocks draw_shocks(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Shocks s{};
  s.mask_u = unif(rng);
  s.congestion = normal(rng);
  s.rent = normal(rng);
  s.density = normal(rng);
  return s;
}

// Listings for one cell; returns the cell rent implied by them (NaN if none).
double draw_ads(std::mt19937_64& rng, const NoiseSpec& noise, CellRecord& cell, double rent,
                double size, std::vector<RentAd>& ads) {
  const double mean = noise.ad_rate * cell.population / 1000.0;
  cell.n_ads = 0;
  if (mean > 1e7) throw DomainError("implausible listing count in one cell; check parameter units");
  if (mean > 0.0) {
    std::poisson_distribution<std::int64_t> pois(mean);
    cell.n_ads = pois(rng);
  }
  if (cell.n_ads == 0) return kMissing;
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  for (std::int64_t k = 0; k < cell.n_ads; ++k) {
    const double s = size * std::exp(noise.ad_size_sigma * normal(rng));
    const double per_m2 = rent * std::exp(noise.ad_rent_sigma * normal(rng));
    ads.push_back({cell.id, per_m2 * s, s});
    sum += per_m2;
  }
  return sum / static_cast<double>(cell.n_ads);
}

// Travel times as observed: congested, then optionally star-sampled and interpolated.
void record_times(std::vector<CellRecord>& cells, const std::vector<double>& car,
                  const std::vector<double>& transit, const Commute& commute) {
  if (commute.sample_fraction >= 1.0) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      cells[i].time_car = car[i];
      cells[i].time_transit = transit[i];
    }
    return;
  }
  std::vector<transport::LatticePoint> pts;
  pts.reserve(cells.size());
  for (const auto& c : cells) pts.push_back({c.ix, c.iy});
  const auto car_s = transport::star_sample(pts, car, 8, commute.sample_fraction);
  const auto tr_s = transport::star_sample(pts, transit, 8, commute.sample_fraction);
  const auto car_i = transport::interpolate_field(car_s, pts, commute.scheme);
  const auto tr_i = transport::interpolate_field(tr_s, pts, commute.scheme);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].time_car = std::max(0.0, car_i.values[i]);
    cells[i].time_transit = std::max(0.0, tr_i.values[i]);
  }
}

// 1 − e^{−x}(1 + x), accurate for small x.
double truncated_gamma2(double x) {
  if (x < 1e-3) return x * x * (0.5 - x / 3.0 + x * x / 8.0);
  return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

void NoiseSpec::validate() const {
  require(nonneg(sigma_rent) && nonneg(sigma_density), "noise sigmas must be >= 0");
  require(nonneg(ad_rate), "ad_rate must be >= 0");
  require(nonneg(mask_rate) && mask_rate < 1.0, "mask_rate must lie in [0, 1)");
  require(nonneg(congestion_sigma) && nonneg(congestion_rent_loading),
          "congestion parameters must be >= 0");
  require(nonneg(ad_size_sigma) && nonneg(ad_rent_sigma), "ad sigmas must be >= 0");
}

NoiseSpec NoiseSpec::none() {
  NoiseSpec n;
  n.ad_size_sigma = 0.0;
  n.full_rent_coverage = true;
  return n;
}

void AmenityParams::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
  require(nonneg(theta), "theta must be >= 0");
}

double AmenityParams::operator()(double dist) const { return kappa * std::exp(-theta * dist); }

Commute Commute::linear(double t_per_km) {
  Commute c;
  c.model = transport::CostModel::linear(t_per_km);
  return c;
}

Commute Commute::modal(const transport::TransportParams& p, const transport::SpeedModel& speeds) {
  Commute c;
  c.model = transport::CostModel::modal(p);
  c.speeds = speeds;
  return c;
}

std::vector<CellRecord> make_grid(const GridSpec& spec) {
  spec.validate();
  const double h = spec.cell_size;
  const double reach = spec.radius + 1e-9 * h;
  const auto m = static_cast<std::int64_t>(std::floor(spec.radius / h + 1e-9));
  std::vector<CellRecord> cells;
  for (std::int64_t iy = -m; iy <= m; ++iy) {
    for (std::int64_t ix = -m; ix <= m; ++ix) {
      const double dist = h * std::hypot(static_cast<double>(ix), static_cast<double>(iy));
      if (dist > reach) continue;
      CellRecord c;
      c.id = static_cast<std::int64_t>(cells.size());
      c.ix = ix;
      c.iy = iy;
      c.x = spec.center_x + h * static_cast<double>(ix);
      c.y = spec.center_y + h * static_cast<double>(iy);
      c.dist = dist;
      cells.push_back(c);
    }
  }
  return cells;
}

double population_for_fringe(const sum::CityParams& params, const Commute& commute, double fringe_km,
                             double land_share) {
  require(std::isfinite(fringe_km) && fringe_km > 0.0, "fringe must be positive");
  require(params.farm_rent > 0.0, "calibration by fringe needs a positive farm rent");
  const auto profile = transport::commute_cost_profile(commute.model, commute.speeds);
  const double t_bar = profile(fringe_km);
  require(t_bar < params.income, "commuting cost at the fringe exceeds income");
  // Utility at which the bid-rent meets the farm rent at the requested distance.
  const double c = std::pow(params.alpha, params.alpha) * std::pow(params.beta, params.beta);
  const double u = c * (params.income - t_bar) / std::pow(params.farm_rent, params.beta);
  return sum::total_population(params, u, profile, land_share);
}

sum::CityParams calibrate_city(sum::CityParams params, const Commute& commute, double fringe_km,
                               double central_density, double land_share) {
  require(std::isfinite(central_density) && central_density > 0.0,
          "central density must be positive");
  params.validate();
  const auto profile = transport::commute_cost_profile(commute.model, commute.speeds);
  const double c = std::pow(params.alpha, params.alpha) * std::pow(params.beta, params.beta);
  const double u = c * (params.income - profile(fringe_km)) / std::pow(params.farm_rent, params.beta);
  // Density scales with A^{1/a}.
  const double n0 = sum::density(params.income, profile(0.0), params, u);
  params.tfp *= std::pow(central_density / n0, params.a_land);
  params.population = population_for_fringe(params, commute, fringe_km, land_share);
  return params;
}

GridSpec grid_covering(double fringe_km, double cell_size, std::uint64_t seed) {
  require(std::isfinite(fringe_km) && fringe_km >= 0.0, "fringe must be finite and >= 0");
  GridSpec g;
  g.cell_size = cell_size;
  g.radius = fringe_km + cell_size;
  g.seed = seed;
  g.validate();
  return g;
}

SimulatedCity simulate_city(const std::string& city_id, const sum::CityParams& params,
                            const GridSpec& spec, const NoiseSpec& noise, const Commute& commute) {
  params.validate();
  noise.validate();
  commute.speeds.validate();
  require(commute.sample_fraction > 0.0 && commute.sample_fraction <= 1.0,
          "sample_fraction must lie in (0, 1]");

  const auto profile = transport::commute_cost_profile(commute.model, commute.speeds);
  const auto eq = sum::solve_equilibrium(params, profile, 1.0 - noise.mask_rate);

  SimulatedCity out;
  out.params = params;
  out.equilibrium = eq;
  CityGrid& grid = out.grid;
  grid.city_id = city_id;
  grid.spec = spec;
  grid.income = params.income;
  grid.cost_model = commute.model;
  grid.cells = make_grid(spec);

  std::mt19937_64 rng(spec.seed);
  const double area = spec.cell_area();
  const double Y = params.income;
  const auto& sp = commute.speeds;
  std::vector<double> car(grid.cells.size()), transit(grid.cells.size());

  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    CellRecord& c = grid.cells[i];
    const Shocks z = draw_shocks(rng);
    c.land_share = z.mask_u < noise.mask_rate ? 0.0 : 1.0;

    const double jam = std::exp(noise.congestion_sigma * z.congestion);
    car[i] = sp.car_time(c.dist) * jam;
    transit[i] = sp.transit_time(c.dist) * jam;
    c.dist_car = sp.car_distance(c.dist);
    const auto choice = transport::cell_cost(commute.model, c.dist, c.dist_car, car[i], transit[i]);
    const double T = choice->cost;
    c.gen_cost = T;

    const bool urban = c.dist < eq.fringe && c.land_share > 0.0 && T < Y;
    if (!urban) {
      c.population = 0.0;
      c.density = c.land_share > 0.0 ? 0.0 : kMissing;
      continue;
    }
    const double r_model = sum::bid_rent(Y, T, params.beta, eq.central_rent);
    const double rent = r_model * std::exp(noise.sigma_rent * z.rent -
                                           noise.congestion_rent_loading * z.congestion);
    c.density = sum::density(Y, T, params, eq.utility) * std::exp(noise.sigma_density * z.density);
    c.population = c.density * c.land_share * area;
    c.dwelling_size = sum::dwelling_size(Y, T, r_model, params.beta);
    const double observed = draw_ads(rng, noise, c, rent, c.dwelling_size, grid.ads);
    c.rent = noise.full_rent_coverage ? (c.n_ads > 0 ? observed : rent) : observed;
  }
  record_times(grid.cells, car, transit, commute);
  return out;
}

sum::Equilibrium solve_amenity_equilibrium(const sum::CityParams& params,
                                           const AmenityParams& amenity, double radius,
                                           double land_share) {
  params.validate();
  amenity.validate();
  require(std::isfinite(radius) && radius > 0.0, "radius must be positive");
  require(land_share > 0.0 && land_share <= 1.0, "land share must lie in (0, 1]");

  const double Y = params.income;
  const double ab = params.a_land * params.beta;
  const double k = amenity.theta / ab;

  // Effective city edge for a utility level.
  auto edge = [&](double u) {
    const double R0 = sum::central_rent_from_utility(params.alpha, params.beta, Y, u);
    const double peak = R0 * std::pow(amenity.kappa, 1.0 / params.beta);
    if (params.farm_rent <= 0.0 || amenity.theta == 0.0)
      return peak > params.farm_rent ? radius : 0.0;
    if (peak <= params.farm_rent) return 0.0;
    return std::min(radius, params.beta / amenity.theta * std::log(peak / params.farm_rent));
  };
  auto log_pop = [&](double u) {
    const double D = edge(u);
    if (D <= 0.0) return -std::numeric_limits<double>::infinity();
    const double shape = k > 0.0 ? 2.0 * std::numbers::pi * truncated_gamma2(k * D) / (k * k)
                                 : std::numbers::pi * D * D;
    return std::log(land_share) + sum::log_density(Y, 0.0, params, u) +
           std::log(amenity.kappa) / ab + std::log(shape);
  };

  const double target = std::log(params.population);
  double lo = 1.0, hi = 1.0;
  for (int i = 0; log_pop(lo) < target; ++i) {
    if (i > 200) throw NoEquilibriumError("amenity equilibrium: population unreachable");
    lo *= 0.5;
  }
  for (int i = 0; log_pop(hi) > target; ++i) {
    if (i > 200) throw NoEquilibriumError("amenity equilibrium: population unbounded");
    hi *= 2.0;
  }
  for (int i = 0; i < 400 && hi / lo - 1.0 > 4.0 * std::numeric_limits<double>::epsilon(); ++i) {
    const double mid = std::sqrt(lo * hi);
    if (log_pop(mid) > target) lo = mid; else hi = mid;
  }
  const double u = std::sqrt(lo * hi);
  sum::Equilibrium eq;
  eq.utility = u;
  eq.central_rent = sum::central_rent_from_utility(params.alpha, params.beta, Y, u);
  eq.fringe = edge(u);
  eq.closure_residual = std::expm1(log_pop(u) - target);
  if (!(std::abs(eq.closure_residual) <= 1e-8))
    throw NumericError("amenity equilibrium: closure residual " +
                       std::to_string(eq.closure_residual));
  return eq;
}

SimulatedCity simulate_amenity_city(const std::string& city_id, const sum::CityParams& params,
                                    const GridSpec& spec, const AmenityParams& amenity,
                                    const NoiseSpec& noise, const Commute& commute) {
  noise.validate();
  commute.speeds.validate();
  spec.validate();
  const auto eq = solve_amenity_equilibrium(params, amenity, spec.radius, 1.0 - noise.mask_rate);
  const bool truncated = eq.fringe >= spec.radius;

  SimulatedCity out;
  out.params = params;
  out.equilibrium = eq;
  CityGrid& grid = out.grid;
  grid.city_id = city_id;
  grid.spec = spec;
  grid.income = params.income;
  grid.cost_model = commute.model;
  grid.cells = make_grid(spec);

  std::mt19937_64 rng(spec.seed);
  const double area = spec.cell_area();
  const double Y = params.income;
  const double n0 = sum::density(Y, 0.0, params, eq.utility);
  const auto& sp = commute.speeds;
  std::vector<double> car(grid.cells.size()), transit(grid.cells.size());

  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    CellRecord& c = grid.cells[i];
    const Shocks z = draw_shocks(rng);
    c.land_share = z.mask_u < noise.mask_rate ? 0.0 : 1.0;
    car[i] = sp.car_time(c.dist);
    transit[i] = sp.transit_time(c.dist);
    c.dist_car = sp.car_distance(c.dist);
    c.gen_cost =
        transport::cell_cost(commute.model, c.dist, c.dist_car, car[i], transit[i])->cost;

    const bool urban = (truncated || c.dist < eq.fringe) && c.land_share > 0.0;
    if (!urban) {
      c.population = 0.0;
      c.density = c.land_share > 0.0 ? 0.0 : kMissing;
      continue;
    }
    // Closed forms in logs keep the noise-free gradients exactly linear in d.
    const double log_l = std::log(amenity.kappa) - amenity.theta * c.dist;
    const double r_model = eq.central_rent * std::exp(log_l / params.beta);
    const double rent = r_model * std::exp(noise.sigma_rent * z.rent);
    c.density = n0 * std::exp(log_l / (params.a_land * params.beta) +
                              noise.sigma_density * z.density);
    c.population = c.density * c.land_share * area;
    c.dwelling_size = sum::dwelling_size(Y, 0.0, r_model, params.beta);
    const double observed = draw_ads(rng, noise, c, rent, c.dwelling_size, grid.ads);
    c.rent = noise.full_rent_coverage ? (c.n_ads > 0 ? observed : rent) : observed;
  }
  record_times(grid.cells, car, transit, commute);
  return out;
}

}  // namespace sumlab::forge
