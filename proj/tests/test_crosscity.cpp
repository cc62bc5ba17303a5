#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sumlab/cityforge.hpp"
#include "sumlab/crosscity.hpp"
#include "sumlab/errors.hpp"

using namespace sumlab;
using namespace sumlab::cross;

namespace {

CityGrid grid_of(std::vector<CellRecord> cells, double cell = 1.0) {
  CityGrid g;
  g.city_id = "g";
  g.spec.cell_size = cell;
  g.cells = std::move(cells);
  return g;
}

CellRecord cell(double dist, double time, double pop) {
  CellRecord c;
  c.dist = dist;
  c.time_car = time;
  c.time_transit = time * 2.0;
  c.population = pop;
  return c;
}

// Random feature table; every city gets every column.
std::vector<CityFeatures> random_features(std::mt19937_64& rng, std::size_t n) {
  auto u = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<CityFeatures> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& f = out[i];
    f.city_id = "C" + std::to_string(1000 + i);
    f.population = std::exp(u(std::log(2e5), std::log(2e7)));
    f.income = std::exp(u(std::log(2e3), std::log(6e4)));
    f.farm_rent = std::exp(u(0.0, 5.0));
    f.fuel_price = std::exp(u(-0.7, 0.9));
    f.commuting_speed = std::exp(u(std::log(15.0), std::log(45.0)));
    f.monocentricity = u(0.0, 1.0);
    f.coastal = u(0.0, 1.0) < 0.4 ? 1.0 : 0.0;
    f.gini = u(25.0, 60.0);
    f.informal_pct = u(0.0, 40.0);
    f.regulatory = std::floor(u(0.0, 3.0));
    f.continent = kAllContinents[i % 6];
    f.income_group = i % 2 == 0 ? IncomeGroup::High : IncomeGroup::Other;
    f.market_cover = std::exp(u(std::log(200.0), std::log(5000.0)));
    f.spatial_cover = u(0.02, 0.6);
  }
  return out;
}

// log area = Xb for the urban-area design, plus group-specific income elasticity.
void set_areas(std::vector<CityFeatures>& fs, std::mt19937_64& rng, double noise, double income_high,
               double income_other) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& f : fs) {
    const double inc = f.income_group == IncomeGroup::High ? income_high : income_other;
    const double la = -12.0 + 0.86 * std::log(f.population) + inc * std::log(f.income) -
                      0.22 * std::log(f.farm_rent) - 0.06 * std::log(f.fuel_price) +
                      0.47 * std::log(f.commuting_speed) + 0.15 * f.monocentricity;
    f.area_km2 = std::exp(la + noise * g(rng));
  }
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST_CASE("density-weighted speed") {
  CHECK(density_weighted_speed(grid_of({cell(2, 0.1, 100), cell(6, 0.2, 300)})) == doctest::Approx(27.5));
  CHECK(density_weighted_speed(grid_of({cell(5, 0.25, 7)})) == doctest::Approx(20.0));
  CHECK(density_weighted_speed(grid_of({cell(2, 0.1, 50), cell(3, 0.1, 50), cell(8, 0.2, 50)})) ==
        doctest::Approx((20.0 + 30.0 + 40.0) / 3.0));
  // Transit is the faster mode here.
  auto c = cell(4, 0.4, 10);
  c.time_transit = 0.2;
  CHECK(density_weighted_speed(grid_of({c})) == doctest::Approx(20.0));
  // Unpopulated and zero-time cells do not count.
  CHECK(density_weighted_speed(grid_of({cell(0, 0, 1000), cell(3, 0.1, 10), cell(9, 0.1, 0)})) ==
        doctest::Approx(30.0));
  CHECK(std::isnan(density_weighted_speed(grid_of({cell(0, 0, 10)}))));
  CHECK(std::isnan(density_weighted_speed(grid_of({}))));
}

TEST_CASE("urbanized area") {
  std::vector<CellRecord> ten(10);
  for (auto& c : ten) c.population = 5.0;
  CHECK(urbanized_area(grid_of(ten)) == doctest::Approx(10.0));
  CHECK(urbanized_area(grid_of({})) == 0.0);
  ten[0].land_share = 0.5;
  ten[1].population = 0.0;
  CHECK(urbanized_area(grid_of(ten, 0.5)) == doctest::Approx(8.5 * 0.25));

  auto p = sum::CityParams::from_shares(1.0 / 3.0, 0.13);
  p.income = 100.0;
  p.t_per_km = 5.0;
  p.farm_rent = 5.0;
  const auto commute = forge::Commute::linear(5.0);
  p = forge::calibrate_city(p, commute, 12.0, 5000.0);
  const auto city = forge::simulate_city("c", p, forge::grid_covering(12.0, 12.0 / 50.0, 1),
                                         forge::NoiseSpec::none(), commute);
  const double disc = std::numbers::pi * 144.0;
  CHECK(std::abs(urbanized_area(city.grid) / disc - 1.0) <= 0.03);
}

TEST_CASE("second step recovers a known linear model") {
  const SecondStepSpec spec{Dependent::RentGradient, 2};
  const auto names = second_step_regressors(spec);
  const std::vector<double> truth{3.0, -0.5, 0.4, -0.1, -0.0002, 4.0, -0.02, -0.03, 0.2};
  const int reps = 200;
  std::vector<std::vector<double>> est(truth.size());
  std::vector<std::vector<double>> reported_se(truth.size());
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int r = 0; r < reps; ++r) {
    auto fs = random_features(rng, 60);
    std::map<std::string, double> grads;
    for (const auto& f : fs) {
      const double vals[] = {f.coastal, f.monocentricity, std::log(f.population), f.market_cover,
                             f.spatial_cover, f.gini, f.informal_pct, f.regulatory};
      double y = truth[0];
      for (int j = 0; j < 8; ++j) y += truth[j + 1] * vals[j];
      grads[f.city_id] = y + 0.8 * g(rng);
    }
    const auto res = second_step(grads, fs, spec);
    REQUIRE(res.fit.names.size() == truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
      est[j].push_back(res.fit.coef[j]);
      reported_se[j].push_back(res.fit.se[j]);
    }
  }
  for (std::size_t j = 0; j < truth.size(); ++j) {
    INFO("coefficient " << j);
    const double mc_se = sd(est[j]) / std::sqrt(static_cast<double>(reps));
    CHECK(std::abs(mean(est[j]) - truth[j]) <= 2.0 * mc_se);
    // Classical standard errors match the Monte Carlo spread.
    CHECK(mean(reported_se[j]) == doctest::Approx(sd(est[j])).epsilon(0.15));
  }
  CHECK(names.size() == 8);
}

TEST_CASE("second step: null features are rarely jointly significant") {
  // Under the null, rejections at 10% are Binomial(100, 0.1), so "at most 10
  // of 100" sits at the median. The long run below checks the calibration.
  auto quiet_count = [](std::uint64_t seed, int reps) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    int quiet = 0;
    for (int r = 0; r < reps; ++r) {
      const auto fs = random_features(rng, 80);
      std::map<std::string, double> grads;
      for (const auto& f : fs) grads[f.city_id] = 20.0 + 3.0 * g(rng);
      const auto res = second_step(grads, fs, {Dependent::DensityGradient, 2});
      if (res.fit.f_p >= 0.10) ++quiet;
    }
    return quiet;
  };
  CHECK(quiet_count(1, 100) >= 90);
  const int long_run = quiet_count(1234, 2000);
  CHECK(long_run >= 1760);
  CHECK(long_run <= 1840);
}

TEST_CASE("second step is invariant to row order") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  auto fs = random_features(rng, 50);
  std::map<std::string, double> grads;
  for (const auto& f : fs) grads[f.city_id] = g(rng);
  const auto a = second_step(grads, fs, {Dependent::RentGradient, 3});
  std::shuffle(fs.begin(), fs.end(), rng);
  const auto b = second_step(grads, fs, {Dependent::RentGradient, 3});
  CHECK(a.fit.coef == b.fit.coef);
  CHECK(a.fit.se == b.fit.se);
}

TEST_CASE("second step: the omitted continent does not change fitted values") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto fs = random_features(rng, 72);
  std::map<std::string, double> grads;
  for (const auto& f : fs) grads[f.city_id] = 2.0 + (f.continent == Continent::Asia ? 4.0 : 0.0) + g(rng);
  SecondStepSpec europe{Dependent::RentGradient, 3};
  SecondStepSpec asia = europe;
  asia.reference = Continent::Asia;
  const auto a = second_step(grads, fs, europe);
  const auto b = second_step(grads, fs, asia);
  const auto fa = a.fitted(), fb = b.fitted();
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(std::abs(fa[i] - fb[i]) <= 1e-10);
  // Coefficients shift by the reference effect.
  CHECK(a.fit.coefficient("Asia") == doctest::Approx(-b.fit.coefficient("Europe")).epsilon(1e-9));
  CHECK(a.fit.coefficient("Africa") - a.fit.coefficient("Asia") ==
        doctest::Approx(b.fit.coefficient("Africa")).epsilon(1e-9));
  CHECK(a.fit.r2 == doctest::Approx(b.fit.r2).epsilon(1e-12));
}

TEST_CASE("second step: degenerate dummies, missing data and small samples") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  auto fs = random_features(rng, 40);
  for (auto& f : fs) f.continent = Continent::Asia;
  std::map<std::string, double> grads;
  for (const auto& f : fs) grads[f.city_id] = g(rng);
  const auto res = second_step(grads, fs, {Dependent::DensityGradient, 3});
  CHECK(res.warnings.size() == 5);
  CHECK(res.fit.names.size() == 7);  // intercept + six block-2 regressors

  fs[0].gini = kMissing;
  grads.erase(fs[1].city_id);
  const auto dropped = second_step(grads, fs, {Dependent::DensityGradient, 2});
  CHECK(dropped.n_dropped == 2);
  CHECK(dropped.fit.n_obs == 38);
  // Block 1 of the density spec does not use gini.
  CHECK(second_step(grads, fs, {Dependent::DensityGradient, 1}).n_dropped == 1);

  fs.resize(31);
  CHECK_THROWS_AS(second_step(grads, fs, {Dependent::DensityGradient, 2}), DomainError);
  CHECK_THROWS_AS(second_step(grads, fs, {Dependent::DensityGradient, 4}), DomainError);

  // Perfectly collinear features name the column.
  auto twin = random_features(rng, 40);
  std::map<std::string, double> g2;
  for (auto& f : twin) {
    f.informal_pct = 0.5 * f.gini;
    g2[f.city_id] = g(rng);
  }
  try {
    second_step(g2, twin, {Dependent::RentGradient, 2});
    FAIL("expected singularity");
  } catch (const SingularityError& e) {
    CHECK(e.column() == "informal_pct");
  }
}

TEST_CASE("urban-area regression: exact log-linear areas") {
  std::mt19937_64 rng(10);
  auto fs = random_features(rng, 40);
  set_areas(fs, rng, 0.0, 0.4, 0.4);
  const auto r = urban_area_regression(fs, Subset::All);
  CHECK(r.fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.fit.coefficient("log_population") == doctest::Approx(0.86).epsilon(1e-9));
  CHECK(r.fit.coefficient("log_income") == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(r.fit.coefficient("log_farm_rent") == doctest::Approx(-0.22).epsilon(1e-9));
  CHECK(r.fit.coefficient("log_fuel_price") == doctest::Approx(-0.06).epsilon(1e-8));
  CHECK(r.fit.coefficient("log_commuting_speed") == doctest::Approx(0.47).epsilon(1e-9));
  CHECK(r.fit.coefficient("monocentricity") == doctest::Approx(0.15).epsilon(1e-8));
  CHECK(r.fit.coefficient(econo::kIntercept) == doctest::Approx(-12.0).epsilon(1e-9));

  const auto high = urban_area_regression(fs, Subset::High);
  CHECK(high.fit.n_obs == 20);

  fs[3].farm_rent = 0.0;
  fs[4].area_km2 = kMissing;
  const auto d = urban_area_regression(fs, Subset::All);
  CHECK(d.n_dropped == 2);
  CHECK(d.fit.n_obs == 38);
  CHECK(d.dropped.at("nonpositive-or-missing:log_farm_rent") == 1);
  CHECK(d.dropped.at("nonpositive-or-missing:area") == 1);

  for (auto& f : fs) f.income_group = IncomeGroup::Other;
  CHECK_THROWS_AS(urban_area_regression(fs, Subset::High), DomainError);
}

TEST_CASE("urban-area signs on solver ensembles") {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ens = solver_ensemble(50, seed);
    std::vector<CityFeatures> fs;
    for (const auto& c : ens) fs.push_back(c.features);
    const auto r = urban_area_regression(fs, Subset::All);
    if (r.fit.coefficient("log_population") > 0 && r.fit.coefficient("log_income") > 0 &&
        r.fit.coefficient("log_farm_rent") < 0)
      ++ok;
  }
  MESSAGE("sign pattern held in " << ok << "/100 ensembles");
  CHECK(ok >= 95);
}

TEST_CASE("solver ensemble is deterministic and consistent") {
  const auto a = solver_ensemble(10, 3), b = solver_ensemble(10, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features.area_km2 == b[i].features.area_km2);
    CHECK(a[i].features.area_km2 ==
          doctest::Approx(std::numbers::pi * a[i].equilibrium.fringe * a[i].equilibrium.fringe));
    CHECK_NOTHROW(a[i].features.validate());
  }
}

TEST_CASE("chow split: identical groups without noise") {
  std::mt19937_64 rng(12);
  auto fs = random_features(rng, 40);
  set_areas(fs, rng, 0.0, 0.4, 0.4);
  const auto r = chow_split_test(fs);
  CHECK(r.f == 0.0);
  CHECK(r.n1 == 20);
  CHECK(r.n2 == 20);
}

TEST_CASE("chow split: null calibration and power") {
  std::mt19937_64 rng(13);
  int rejected = 0;
  for (int s = 0; s < 200; ++s) {
    auto fs = random_features(rng, 100);
    set_areas(fs, rng, 0.2, 0.4, 0.4);
    if (chow_split_test(fs).p < 0.05) ++rejected;
  }
  MESSAGE("null rejections at 5%: " << rejected << "/200");
  CHECK(rejected >= 4);
  CHECK(rejected <= 18);

  int detected = 0;
  for (int s = 0; s < 100; ++s) {
    auto fs = random_features(rng, 100);
    set_areas(fs, rng, 0.05, 0.28, 0.44);
    if (chow_split_test(fs).p < 0.05) ++detected;
  }
  CHECK(detected >= 90);

  auto few = random_features(rng, 12);
  set_areas(few, rng, 0.1, 0.4, 0.4);
  CHECK_THROWS_AS(chow_split_test(few), DomainError);
}

TEST_CASE("feature validation and names") {
  CityFeatures f;
  f.city_id = "x";
  CHECK_NOTHROW(f.validate());
  f.regulatory = 3.0;
  CHECK_THROWS_AS(f.validate(), DomainError);
  f.regulatory = 2.0;
  f.monocentricity = 1.5;
  CHECK_THROWS_AS(f.validate(), DomainError);
  CHECK(parse_continent("NorthAmerica") == Continent::NorthAmerica);
  CHECK_THROWS_AS(parse_continent("Antarctica"), DomainError);
  CHECK(parse_subset("other") == Subset::Other);
  CHECK(parse_income_group("high") == IncomeGroup::High);
}
