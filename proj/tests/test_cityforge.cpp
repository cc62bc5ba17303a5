#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "sumlab/cityforge.hpp"
#include "sumlab/errors.hpp"

using namespace sumlab;
using namespace sumlab::forge;
using testsupport::rel_err;

namespace {

sum::CityParams analytic_city() {
  sum::CityParams p;
  p.income = 100.0;
  p.t_per_km = 10.0;
  p.farm_rent = 25.0;
  p.population = 38800.0 * std::numbers::pi;
  return p;
}

GridSpec grid(double cell, double radius, std::uint64_t seed = 1) {
  GridSpec g;
  g.cell_size = cell;
  g.radius = radius;
  g.seed = seed;
  return g;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("grid layout") {
  CHECK(make_grid(grid(1.0, 1.0)).size() == 5u);
  CHECK(make_grid(grid(1.0, 0.4)).size() == 1u);
  const double small = static_cast<double>(make_grid(grid(1.0, 20.0)).size());
  const double large = static_cast<double>(make_grid(grid(1.0, 40.0)).size());
  CHECK(large / small == doctest::Approx(4.0).epsilon(0.03));
  const auto cells = make_grid(grid(0.5, 3.0));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].id == static_cast<std::int64_t>(i));
    CHECK(cells[i].dist == doctest::Approx(std::hypot(cells[i].x, cells[i].y)));
    CHECK(cells[i].dist <= 3.0 + 1e-12);
  }
  CHECK_THROWS_AS(make_grid(grid(0.0, 1.0)), DomainError);
}

TEST_CASE("noise-free rents and densities are log-linear in net income") {
  auto p = sum::CityParams::from_shares(1.0 / 3.0, 0.13);
  p.income = 100.0;
  p.t_per_km = 2.0;
  p.farm_rent = 5.0;
  p.population = 2e5;
  const auto city = simulate_city("c", p, grid(0.5, 40.0), NoiseSpec::none(), Commute::linear(2.0));
  const double f = 3.0;
  const double h = (1.0 - 0.13 / 3.0) / (0.13 / 3.0);
  const CellRecord* ref = nullptr;
  int checked = 0;
  for (const auto& c : city.grid.cells) {
    if (!(c.population > 0.0)) continue;
    if (!ref) {
      ref = &c;
      continue;
    }
    const double dx = std::log(p.income - c.gen_cost) - std::log(p.income - ref->gen_cost);
    if (std::abs(dx) < 1e-3) continue;
    CHECK((std::log(c.rent) - std::log(ref->rent)) / dx == doctest::Approx(f).epsilon(1e-9));
    CHECK((std::log(c.density) - std::log(ref->density)) / dx == doctest::Approx(h).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("noise-free grids are monotone in distance and close the population") {
  const auto p = analytic_city();
  const double fringe = 8.0;
  double previous_error = INFINITY;
  for (double divisions : {25.0, 50.0, 100.0}) {
    const double cell = fringe / divisions;
    const auto city =
        simulate_city("c", p, grid(cell, fringe + cell), NoiseSpec::none(), Commute::linear(10.0));
    const double err = rel_err(city.grid.total_population(), p.population);
    if (divisions == 50.0) CHECK(err <= 0.02);
    CHECK(err < previous_error);
    previous_error = err;

    auto cells = city.grid.cells;
    std::sort(cells.begin(), cells.end(), [](auto& a, auto& b) { return a.dist < b.dist; });
    double r_prev = INFINITY, n_prev = INFINITY;
    for (const auto& c : cells) {
      const double r = c.population > 0.0 ? c.rent : 0.0;
      CHECK(r <= r_prev * (1 + 1e-12));
      CHECK(c.density <= n_prev * (1 + 1e-12));
      r_prev = r;
      n_prev = c.density;
    }
  }
}

TEST_CASE("regeneration with the same seed is identical") {
  NoiseSpec noise;
  noise.sigma_rent = 0.2;
  noise.sigma_density = 0.2;
  noise.mask_rate = 0.1;
  const auto a = simulate_city("c", analytic_city(), grid(0.4, 9.0, 42), noise, Commute::linear(10.0));
  const auto b = simulate_city("c", analytic_city(), grid(0.4, 9.0, 42), noise, Commute::linear(10.0));
  REQUIRE(a.grid.cells.size() == b.grid.cells.size());
  for (std::size_t i = 0; i < a.grid.cells.size(); ++i) {
    const auto& x = a.grid.cells[i];
    const auto& y = b.grid.cells[i];
    CHECK(same(x.rent, y.rent));
    CHECK(same(x.density, y.density));
    CHECK(x.population == y.population);
    CHECK(x.n_ads == y.n_ads);
    CHECK(x.land_share == y.land_share);
  }
  CHECK(a.grid.ads.size() == b.grid.ads.size());
  const auto c = simulate_city("c", analytic_city(), grid(0.4, 9.0, 43), noise, Commute::linear(10.0));
  bool differs = false;
  for (std::size_t i = 0; i < c.grid.cells.size(); ++i)
    differs = differs || !same(c.grid.cells[i].rent, a.grid.cells[i].rent);
  CHECK(differs);
}

TEST_CASE("masked cells carry no density and no rent") {
  NoiseSpec noise = NoiseSpec::none();
  noise.mask_rate = 0.3;
  noise.ad_rate = 5.0;
  const auto city = simulate_city("c", analytic_city(), grid(0.2, 9.0, 7), noise, Commute::linear(10.0));
  int masked = 0;
  for (const auto& c : city.grid.cells) {
    if (c.land_share > 0.0) continue;
    ++masked;
    CHECK(std::isnan(c.density));
    CHECK(std::isnan(c.rent));
    CHECK(c.population == 0.0);
    CHECK(c.n_ads == 0);
  }
  CHECK(masked > 100);
  // Masking shrinks land, not population.
  CHECK(rel_err(city.grid.total_population(), analytic_city().population) <= 0.03);
}

TEST_CASE("ad counts average to the requested rate") {
  NoiseSpec noise;
  noise.ad_rate = 2.0;
  std::vector<double> rates;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto city = simulate_city("c", analytic_city(), grid(0.5, 9.0, seed), noise, Commute::linear(10.0));
    rates.push_back(static_cast<double>(city.grid.total_ads()) / (city.grid.total_population() / 1000.0));
    CHECK(static_cast<std::size_t>(city.grid.total_ads()) == city.grid.ads.size());
  }
  double mean = 0.0, var = 0.0;
  for (double r : rates) mean += r / rates.size();
  for (double r : rates) var += (r - mean) * (r - mean) / (rates.size() - 1);
  CHECK(std::abs(mean - 2.0) <= 3.0 * std::sqrt(var / rates.size()));
}

TEST_CASE("cells without ads have no rent unless full coverage is requested") {
  NoiseSpec noise;
  noise.ad_rate = 0.5;
  const auto city = simulate_city("c", analytic_city(), grid(0.2, 9.0, 3), noise, Commute::linear(10.0));
  int urban = 0, priced = 0;
  for (const auto& c : city.grid.cells) {
    if (c.population > 0.0) ++urban;
    CHECK((c.n_ads > 0) == !std::isnan(c.rent));
    if (!std::isnan(c.rent)) ++priced;
  }
  CHECK(priced < urban);
}

TEST_CASE("amenity cities follow the exponential gradients exactly") {
  auto p = sum::CityParams::from_shares(0.5, 0.5);
  p.income = 100.0;
  p.farm_rent = 5.0;
  p.population = 5e5;
  AmenityParams amenity{1.0, 0.01};
  const auto city = simulate_amenity_city("a", p, grid(1.0, 60.0), amenity, NoiseSpec::none(),
                                          Commute::linear(1.0));
  const CellRecord* ref = nullptr;
  int checked = 0;
  for (const auto& c : city.grid.cells) {
    if (!(c.population > 0.0)) continue;
    if (!ref) {
      ref = &c;
      continue;
    }
    const double dd = c.dist - ref->dist;
    if (std::abs(dd) < 0.5) continue;
    CHECK((std::log(c.rent) - std::log(ref->rent)) / dd == doctest::Approx(-0.02).epsilon(1e-9));
    CHECK((std::log(c.density) - std::log(ref->density)) / dd == doctest::Approx(-0.04).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 100);

  const auto flat = simulate_amenity_city("f", p, grid(1.0, 20.0), AmenityParams{1.0, 0.0},
                                          NoiseSpec::none(), Commute::linear(1.0));
  for (const auto& c : flat.grid.cells) {
    CHECK(c.rent == doctest::Approx(flat.grid.cells.front().rent).epsilon(1e-13));
    CHECK(c.density == doctest::Approx(flat.grid.cells.front().density).epsilon(1e-13));
  }
}

TEST_CASE("amenity equilibrium closes against the truncated-disc integral") {
  auto p = sum::CityParams::from_shares(0.5, 0.5);
  p.income = 100.0;
  p.farm_rent = 5.0;
  p.population = 5e5;
  const AmenityParams amenity{1.3, 0.05};
  const auto eq = solve_amenity_equilibrium(p, amenity, 200.0);
  // Midpoint-rule ∫ 2πx n(x) dx as the independent check.
  const double n0 = sum::density(p.income, 0.0, p, eq.utility) * std::pow(1.3, 4.0);
  const int steps = 200000;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = (i + 0.5) * eq.fringe / steps;
    total += 2.0 * std::numbers::pi * x * n0 * std::exp(-0.05 * x / 0.25) * eq.fringe / steps;
  }
  CHECK(rel_err(total, p.population) <= 1e-8);
  // At the fringe the rent equals the farm rent.
  CHECK(eq.central_rent * std::pow(1.3 * std::exp(-0.05 * eq.fringe), 2.0) ==
        doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("modal cities with sampled and congested times") {
  transport::TransportParams tp;
  tp.wage = transport::TransportParams::wage_from_income(30000.0);
  tp.fuel_price = 1.5;
  tp.transit_fare = 1.5;
  auto p = sum::CityParams::from_shares(0.3, 0.15);
  p.income = 30000.0;
  p.farm_rent = 500.0;
  auto commute = Commute::modal(tp);
  p = calibrate_city(p, commute, 10.0, 8000.0);
  CHECK(population_for_fringe(p, commute, 10.0) == p.population);
  const auto clean = simulate_city("m", p, grid(0.5, 20.0, 5), NoiseSpec::none(), commute);
  CHECK(clean.equilibrium.fringe == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(clean.grid.cells[clean.grid.cells.size() / 2].density == doctest::Approx(8000.0).epsilon(1e-9));
  for (const auto& c : clean.grid.cells) {
    CHECK(c.time_car == doctest::Approx(commute.speeds.car_time(c.dist)));
    CHECK(c.time_transit == doctest::Approx(commute.speeds.transit_time(c.dist)));
  }

  commute.sample_fraction = 0.1;
  const auto sampled = simulate_city("m", p, grid(0.5, 20.0, 5), NoiseSpec::none(), commute);
  double worst = 0.0;
  for (const auto& c : sampled.grid.cells)
    worst = std::max(worst, std::abs(c.time_transit - commute.speeds.transit_time(c.dist)) /
                                commute.speeds.transit_time(c.dist));
  CHECK(worst <= 0.1);

  NoiseSpec jam = NoiseSpec::none();
  jam.congestion_sigma = 0.3;
  commute.sample_fraction = 1.0;
  const auto congested = simulate_city("m", p, grid(0.5, 20.0, 5), jam, commute);
  double spread = 0.0;
  for (const auto& c : congested.grid.cells)
    if (c.dist > 0) spread = std::max(spread, std::abs(std::log(c.time_car / commute.speeds.car_time(c.dist))));
  CHECK(spread > 0.3);
}
