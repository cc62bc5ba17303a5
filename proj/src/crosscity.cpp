#include "sumlab/crosscity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sumlab/errors.hpp"
#include "sumlab/transport.hpp"

namespace sumlab::cross {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool finite(double v) { return std::isfinite(v); }

double log_or_nan(double v) { return v > 0.0 && std::isfinite(v) ? std::log(v) : kMissing; }

// Continent dummies, reference omitted.
std::vector<Continent> dummy_continents(Continent reference) {
  std::vector<Continent> out;
  for (Continent c : kAllContinents)
    if (c != reference) out.push_back(c);
  return out;
}

double feature(const CityFeatures& f, const std::string& name) {
  if (name == "coastal") return f.coastal;
  if (name == "monocentricity") return f.monocentricity;
  if (name == "log_population") return log_or_nan(f.population);
  if (name == "market_cover") return f.market_cover;
  if (name == "spatial_cover") return f.spatial_cover;
  if (name == "gini") return f.gini;
  if (name == "informal_pct") return f.informal_pct;
  if (name == "regulatory") return f.regulatory;
  for (Continent c : kAllContinents)
    if (name == to_string(c)) return f.continent == c ? 1.0 : 0.0;
  throw DomainError("unknown feature '" + name + "'");
}

}  // namespace

std::string to_string(Continent c) {
  switch (c) {
    case Continent::Europe: return "Europe";
    case Continent::Asia: return "Asia";
    case Continent::Africa: return "Africa";
    case Continent::Oceania: return "Oceania";
    case Continent::NorthAmerica: return "NorthAmerica";
    case Continent::SouthAmerica: return "SouthAmerica";
  }
  return "unknown";
}

std::string to_string(IncomeGroup g) { return g == IncomeGroup::High ? "high" : "other"; }

Continent parse_continent(const std::string& s) {
  for (Continent c : kAllContinents)
    if (to_string(c) == s) return c;
  throw DomainError("unknown continent '" + s +
                    "' (expected Europe, Asia, Africa, Oceania, NorthAmerica or SouthAmerica)");
}

IncomeGroup parse_income_group(const std::string& s) {
  if (s == "high") return IncomeGroup::High;
  if (s == "other") return IncomeGroup::Other;
  throw DomainError("unknown income group '" + s + "' (expected high or other)");
}

std::string to_string(Dependent d) { return d == Dependent::RentGradient ? "rent" : "density"; }

std::string to_string(Subset s) {
  switch (s) {
    case Subset::All: return "all";
    case Subset::High: return "high";
    case Subset::Other: return "other";
  }
  return "unknown";
}

Subset parse_subset(const std::string& s) {
  if (s == "all") return Subset::All;
  if (s == "high") return Subset::High;
  if (s == "other") return Subset::Other;
  throw DomainError("unknown subset '" + s + "' (expected all, high or other)");
}

void CityFeatures::validate() const {
  const std::string who = "city '" + city_id + "': ";
  auto positive = [&](double v, const char* name) {
    require(std::isnan(v) || (finite(v) && v > 0.0), who + name + " must be positive");
  };
  positive(population, "population");
  positive(income, "income");
  positive(fuel_price, "fuel_price");
  positive(commuting_speed, "commuting_speed");
  positive(area_km2, "area_km2");
  require(std::isnan(farm_rent) || (finite(farm_rent) && farm_rent >= 0.0), who + "farm_rent must be >= 0");
  require(std::isnan(monocentricity) || (monocentricity >= 0.0 && monocentricity <= 1.0),
          who + "monocentricity must lie in [0, 1]");
  require(std::isnan(coastal) || coastal == 0.0 || coastal == 1.0, who + "coastal must be 0 or 1");
  require(std::isnan(regulatory) || regulatory == 0.0 || regulatory == 1.0 || regulatory == 2.0,
          who + "regulatory must be 0, 1 or 2");
  require(std::isnan(gini) || finite(gini), who + "gini must be finite");
  require(std::isnan(informal_pct) || (informal_pct >= 0.0 && informal_pct <= 100.0),
          who + "informal_pct must lie in [0, 100]");
  require(std::isnan(market_cover) || (finite(market_cover) && market_cover > 0.0),
          who + "market_cover must be positive");
  require(std::isnan(spatial_cover) || (spatial_cover >= 0.0 && spatial_cover <= 1.0),
          who + "spatial_cover must lie in [0, 1]");
}

double density_weighted_speed(const CityGrid& city) {
  double weight = 0.0, total = 0.0;
  for (const auto& c : city.cells) {
    if (!(c.population > 0.0)) continue;
    double t = kMissing;
    if (!is_missing(c.time_car)) t = c.time_car;
    if (!is_missing(c.time_transit)) t = is_missing(t) ? c.time_transit : std::min(t, c.time_transit);
    if (!(t > 0.0)) continue;
    weight += c.population;
    total += c.population * c.dist / t;
  }
  return weight > 0.0 ? total / weight : kMissing;
}

double urbanized_area(const CityGrid& city) {
  double area = 0.0;
  for (const auto& c : city.cells)
    if (c.population > 0.0) area += c.land_share;
  return area * city.cell_area();
}

std::vector<std::string> second_step_regressors(const SecondStepSpec& spec) {
  require(spec.specification >= 1 && spec.specification <= 3, "second-step specification must be 1, 2 or 3");
  std::vector<std::string> names;
  if (spec.dependent == Dependent::RentGradient) {
    names = {"coastal", "monocentricity", "log_population", "market_cover", "spatial_cover"};
    if (spec.specification >= 2) names.insert(names.end(), {"gini", "informal_pct", "regulatory"});
  } else {
    names = {"log_population", "monocentricity"};
    if (spec.specification >= 2) names.insert(names.end(), {"gini", "informal_pct", "coastal", "regulatory"});
  }
  if (spec.specification == 3)
    for (Continent c : dummy_continents(spec.reference)) names.push_back(to_string(c));
  return names;
}

std::vector<double> SecondStepResult::fitted() const {
  std::vector<double> out(data.y.size(), fit.coef[0]);
  for (std::size_t j = 0; j < data.design.size(); ++j) {
    const double b = fit.coefficient(data.design[j].name);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b * data.design[j].values[i];
  }
  return out;
}

SecondStepResult second_step(const std::map<std::string, double>& gradients,
                             const std::vector<CityFeatures>& features, const SecondStepSpec& spec) {
  const auto names = second_step_regressors(spec);
  std::vector<const CityFeatures*> rows;
  for (const auto& f : features) rows.push_back(&f);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->city_id < b->city_id; });

  SecondStepResult out;
  std::vector<std::vector<double>> cols(names.size());
  for (const auto* f : rows) {
    const auto it = gradients.find(f->city_id);
    bool complete = it != gradients.end() && finite(it->second);
    std::vector<double> vals(names.size());
    for (std::size_t j = 0; complete && j < names.size(); ++j) {
      vals[j] = feature(*f, names[j]);
      complete = finite(vals[j]);
    }
    if (!complete) {
      ++out.n_dropped;
      continue;
    }
    out.data.city_ids.push_back(f->city_id);
    out.data.y.push_back(it->second);
    for (std::size_t j = 0; j < names.size(); ++j) cols[j].push_back(vals[j]);
  }
  const std::size_t n = out.data.y.size();
  require(n >= spec.min_cities, "second step needs at least " + std::to_string(spec.min_cities) +
                                    " cities with complete data (got " + std::to_string(n) + ")");

  for (std::size_t j = 0; j < names.size(); ++j) {
    const bool dummy = j >= names.size() - (spec.specification == 3 ? dummy_continents(spec.reference).size() : 0);
    if (dummy) {
      const double lo = *std::min_element(cols[j].begin(), cols[j].end());
      const double hi = *std::max_element(cols[j].begin(), cols[j].end());
      if (lo == hi) {
        out.warnings.push_back("continent dummy '" + names[j] + "' is constant across cities and was dropped");
        continue;
      }
    }
    out.data.design.push_back({names[j], std::move(cols[j])});
  }
  out.fit = econo::ols(out.data.y, out.data.design);
  return out;
}

UrbanAreaResult urban_area_data(const std::vector<CityFeatures>& features, Subset subset) {
  static const char* names[] = {"log_population", "log_income", "log_farm_rent", "log_fuel_price",
                                "log_commuting_speed", "monocentricity"};
  std::vector<const CityFeatures*> rows;
  for (const auto& f : features) {
    if (subset == Subset::High && f.income_group != IncomeGroup::High) continue;
    if (subset == Subset::Other && f.income_group != IncomeGroup::Other) continue;
    rows.push_back(&f);
  }
  require(!rows.empty(), "subset '" + to_string(subset) + "' contains no cities");
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->city_id < b->city_id; });

  UrbanAreaResult out;
  std::vector<std::vector<double>> cols(6);
  for (const auto* f : rows) {
    const double vals[] = {log_or_nan(f->population), log_or_nan(f->income), log_or_nan(f->farm_rent),
                           log_or_nan(f->fuel_price), log_or_nan(f->commuting_speed), f->monocentricity};
    const double y = log_or_nan(f->area_km2);
    const char* reason = nullptr;
    if (!finite(y)) reason = "area";
    for (int j = 0; !reason && j < 6; ++j)
      if (!finite(vals[j])) reason = names[j];
    if (reason) {
      ++out.dropped[std::string("nonpositive-or-missing:") + reason];
      ++out.n_dropped;
      continue;
    }
    out.data.city_ids.push_back(f->city_id);
    out.data.y.push_back(y);
    for (int j = 0; j < 6; ++j) cols[j].push_back(vals[j]);
  }
  for (int j = 0; j < 6; ++j) out.data.design.push_back({names[j], std::move(cols[j])});
  return out;
}

UrbanAreaResult urban_area_regression(const std::vector<CityFeatures>& features, Subset subset) {
  auto out = urban_area_data(features, subset);
  out.fit = econo::ols(out.data.y, out.data.design);
  return out;
}

econo::ChowResult chow_split_test(const std::vector<CityFeatures>& features) {
  const auto all = urban_area_data(features, Subset::All);
  std::map<std::string, bool> high;
  for (const auto& f : features) high[f.city_id] = f.income_group == IncomeGroup::High;
  std::vector<bool> first;
  for (const auto& id : all.data.city_ids) first.push_back(high.at(id));
  return econo::chow_test(all.data.y, all.data.design, first);
}

std::vector<EnsembleCity> solver_ensemble(std::size_t n_cities, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unif = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto log_unif = [&](double lo, double hi) { return std::exp(unif(std::log(lo), std::log(hi))); };

  auto base = sum::CityParams::from_shares(1.0 / 3.0, 0.15);
  // Common technology, scaled once so a mid-sized city has plausible densities.
  base.tfp = 3e-2;

  std::vector<EnsembleCity> out;
  out.reserve(n_cities);
  for (std::size_t i = 0; i < n_cities; ++i) {
    EnsembleCity c;
    c.params = base;
    auto& p = c.params;
    auto& f = c.features;
    p.income = log_unif(3000.0, 60000.0);
    f.fuel_price = log_unif(0.5, 2.5);
    f.commuting_speed = log_unif(15.0, 45.0);
    p.farm_rent = log_unif(20.0, 400.0);
    p.population = log_unif(2e5, 2e7);
    transport::TransportParams tp;
    tp.wage = transport::TransportParams::wage_from_income(p.income);
    p.t_per_km = tp.trips_per_period * (f.fuel_price * tp.fuel_efficiency + tp.wage / f.commuting_speed);
    c.equilibrium = sum::solve_equilibrium(p);

    const auto num = std::to_string(i);
    f.city_id = "E" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num;
    f.population = p.population;
    f.income = p.income;
    f.farm_rent = p.farm_rent;
    f.monocentricity = unif(0.0, 1.0);
    f.coastal = unif(0.0, 1.0) < 0.4 ? 1.0 : 0.0;
    f.gini = unif(25.0, 60.0);
    f.informal_pct = unif(0.0, 40.0);
    f.regulatory = std::floor(unif(0.0, 3.0));
    f.continent = kAllContinents[static_cast<std::size_t>(unif(0.0, 6.0)) % 6];
    f.income_group = p.income >= 15000.0 ? IncomeGroup::High : IncomeGroup::Other;
    f.area_km2 = std::numbers::pi * c.equilibrium.fringe * c.equilibrium.fringe;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace sumlab::cross
