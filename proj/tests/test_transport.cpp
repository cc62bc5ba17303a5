#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "sumlab/errors.hpp"
#include "sumlab/transport.hpp"

using namespace sumlab;
using namespace sumlab::transport;

namespace {

TransportParams unit_trip() {
  TransportParams p;
  p.wage = 20.0;
  p.fuel_price = 2.0;
  p.fuel_efficiency = 0.1;
  p.transit_fare = 2.0;
  p.trips_per_period = 1.0;
  return p;
}

// Square lattice with the origin as one of its cells.
std::vector<LatticePoint> square_grid(int side) {
  std::vector<LatticePoint> cells;
  const int lo = -side / 2;
  for (int y = lo; y < lo + side; ++y)
    for (int x = lo; x < lo + side; ++x) cells.push_back({x, y});
  return cells;
}

double radial(const LatticePoint& c) { return 0.1 + 0.05 * std::hypot(c.ix, c.iy); }

struct FieldError {
  double worst = 0.0;
  double mean = 0.0;
};

// Relative error of the interpolated radial field over cells inside the sample hull.
FieldError radial_error(const std::vector<LatticePoint>& cells, double fraction,
                        InterpolationScheme scheme) {
  std::vector<double> field;
  for (const auto& c : cells) field.push_back(radial(c));
  const auto samples = star_sample(cells, field, 8, fraction);
  const FieldInterpolator f(samples.points, samples.values, scheme);
  FieldError e;
  int inside = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double x = static_cast<double>(cells[i].ix), y = static_cast<double>(cells[i].iy);
    if (!f.inside_hull(x, y)) continue;
    const double rel = std::abs(f(x, y) - field[i]) / field[i];
    e.worst = std::max(e.worst, rel);
    e.mean += rel;
    ++inside;
  }
  e.mean /= inside;
  return e;
}

}  // namespace

TEST_CASE("per-mode costs") {
  const auto p = unit_trip();
  CHECK(car_cost(10.0, 0.5, p) == doctest::Approx(12.0));
  CHECK(car_cost(0.0, 0.0, p) == 0.0);
  CHECK(transit_cost(0.5, p) == doctest::Approx(12.0));
  auto free = p;
  free.transit_fare = 0.0;
  CHECK(transit_cost(0.0, free) == 0.0);
  auto twice = p;
  twice.trips_per_period = 2.0;
  CHECK(car_cost(10.0, 0.5, twice) == doctest::Approx(2.0 * car_cost(10.0, 0.5, p)));
  CHECK(transit_cost(0.7, twice) == doctest::Approx(2.0 * transit_cost(0.7, p)));
  CHECK_THROWS_AS(car_cost(-1.0, 0.5, p), DomainError);
  CHECK_THROWS_AS(transit_cost(-0.1, p), DomainError);
}

TEST_CASE("mode choice") {
  auto c = generalized_cost(12.0, 10.0);
  CHECK(c->cost == 10.0);
  CHECK(c->mode == Mode::Transit);
  c = generalized_cost(12.0, std::nullopt);
  CHECK(c->mode == Mode::Car);
  c = generalized_cost(12.0, 12.0);
  CHECK(c->mode == Mode::Transit);
  CHECK_FALSE(generalized_cost(std::nullopt, std::nullopt).has_value());
}

TEST_CASE("generalized cost never falls when a mode gets dearer") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double car = u(rng), tr = u(rng), bump = u(rng);
    const double base = generalized_cost(car, tr)->cost;
    CHECK(generalized_cost(car + bump, tr)->cost >= base);
    CHECK(generalized_cost(car, tr + bump)->cost >= base);
  }
}

TEST_CASE("cell cost under both models") {
  const auto linear = CostModel::linear(3.0);
  CHECK(cell_cost(linear, 4.0, NAN, NAN, NAN)->cost == doctest::Approx(12.0));
  const auto modal = CostModel::modal(unit_trip());
  CHECK(cell_cost(modal, 8.0, 10.0, 0.5, NAN)->mode == Mode::Car);
  CHECK(cell_cost(modal, 8.0, 10.0, 0.5, 0.4)->cost == doctest::Approx(10.0));
  CHECK_FALSE(cell_cost(modal, 8.0, NAN, NAN, NAN).has_value());
  CHECK(cell_cost(modal.without_fare(), 8.0, 10.0, 0.5, 0.4)->cost == doctest::Approx(8.0));
}

TEST_CASE("commuting profile matches per-cell costs at uncongested speeds") {
  const auto p = unit_trip();
  const SpeedModel speeds;
  const auto model = CostModel::modal(p);
  const auto profile = commute_cost_profile(model, speeds);
  for (double d = 0.0; d <= 60.0; d += 0.75) {
    const auto direct = cell_cost(model, d, speeds.car_distance(d), speeds.car_time(d),
                                  speeds.transit_time(d));
    CHECK(profile(d) == doctest::Approx(direct->cost).epsilon(1e-13));
  }
  CHECK(TransportParams::wage_from_income(17600.0) == doctest::Approx(10.0));
}

TEST_CASE("star sample counts and geometry") {
  const auto cells = square_grid(20);
  const std::vector<double> field(cells.size(), 1.0);
  const auto s = star_sample(cells, field, 8, 0.10);
  CHECK(s.cell_index.size() == 40u);
  CHECK(std::set<std::size_t>(s.cell_index.begin(), s.cell_index.end()).size() == 40u);
  CHECK(s.coverage_fraction == doctest::Approx(0.10));
  bool has_centre = false;
  for (const auto& p : s.points) has_centre = has_centre || (p.ix == 0 && p.iy == 0);
  CHECK(has_centre);

  const auto all = star_sample(cells, field, 8, 1.0);
  CHECK(all.cell_index.size() == cells.size());

  const auto big = square_grid(40);
  const std::vector<double> f2(big.size(), 1.0);
  const auto s2 = star_sample(big, f2, 8, 0.10);
  CHECK(s2.cell_index.size() == 160u);

  // With room to spare every sample lies on one of the eight branch axes (within half a cell).
  const auto wide = square_grid(60);
  const std::vector<double> f3(wide.size(), 1.0);
  const auto s3 = star_sample(wide, f3, 8, 0.02);
  CHECK(s3.branches == 8);
  for (const auto& p : s3.points) {
    bool on_axis = false;
    for (int k = 0; k < 8; ++k) {
      const double a = k * 3.14159265358979323846 / 4.0;
      const double along = p.ix * std::cos(a) + p.iy * std::sin(a);
      const double across = std::abs(-p.ix * std::sin(a) + p.iy * std::cos(a));
      on_axis = on_axis || (along >= -1e-9 && across <= 0.5 + 1e-9);
    }
    CHECK(on_axis);
  }

  CHECK_THROWS_AS(star_sample(cells, field, 8, 0.0), DomainError);
  CHECK_THROWS_AS(star_sample(cells, field, 8, 1.5), DomainError);
}

TEST_CASE("star sampling is deterministic and count is ceil(fraction * cells)") {
  std::mt19937_64 rng(2);
  for (int side : {5, 9, 16, 23, 31}) {
    const auto cells = square_grid(side);
    const std::vector<double> field(cells.size(), 0.5);
    for (double frac : {0.05, 0.1, 0.33, 0.7}) {
      const auto a = star_sample(cells, field, 8, frac);
      const auto b = star_sample(cells, field, 8, frac);
      CHECK(a.cell_index == b.cell_index);
      const auto want = static_cast<std::size_t>(std::ceil(frac * cells.size() - 1e-9));
      CHECK(a.cell_index.size() == want);
    }
  }
}

TEST_CASE("radial travel-time field is recovered from a 10% star") {
  const auto cells = square_grid(40);
  const auto err10 = radial_error(cells, 0.10, InterpolationScheme::CloughTocher);
  CHECK(err10.worst <= 0.05);
  // The worst cell sits beside the cone tip at the centre; the average error shrinks
  // steadily as the star fills in.
  double previous = err10.mean;
  for (double frac : {0.2, 0.3, 0.5, 0.75}) {
    const auto e = radial_error(cells, frac, InterpolationScheme::CloughTocher);
    CHECK(e.mean < previous);
    CHECK(e.worst <= 0.05);
    previous = e.mean;
  }
  CHECK(radial_error(cells, 1.0, InterpolationScheme::CloughTocher).worst == 0.0);
}

TEST_CASE("interpolated field reproduces affine times and samples") {
  const auto cells = square_grid(30);
  std::vector<double> field;
  for (const auto& c : cells) field.push_back(2.0 * c.ix + 3.0 * c.iy + 100.0);
  const auto samples = star_sample(cells, field, 8, 0.10);
  const auto out = interpolate_field(samples, cells);
  CHECK_FALSE(out.degraded);
  const FieldInterpolator f(samples.points, samples.values);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double x = static_cast<double>(cells[i].ix), y = static_cast<double>(cells[i].iy);
    if (f.inside_hull(x, y)) CHECK(std::abs(out.values[i] - field[i]) <= 1e-12 * field[i]);
  }
  for (std::size_t k = 0; k < samples.cell_index.size(); ++k)
    CHECK(out.values[samples.cell_index[k]] == samples.values[k]);
}

TEST_CASE("rush hour selection") {
  const std::vector<TimeSlice> slices{{"16h", 5.0}, {"17h", 9.0}, {"18h", 7.0}};
  CHECK(rush_hour_select(slices) == "17h");
  const std::vector<TimeSlice> flat{{"16h", 4.0}, {"17h", 4.0}, {"18h", 4.0}};
  CHECK(rush_hour_select(flat) == "16h");
  const std::vector<TimeSlice> one{{"08h", 1.0}};
  CHECK(rush_hour_select(one) == "08h");
  CHECK_THROWS_AS(rush_hour_select(std::vector<TimeSlice>{}), DomainError);
}
