#pragma once

// Second-step analysis across cities: gradients on city characteristics, the
// urbanized-area regression with its income-group split, and the city-level
// features computed from grids.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sumlab/econo.hpp"
#include "sumlab/grid.hpp"
#include "sumlab/sum_core.hpp"

namespace sumlab::cross {

enum class Continent { Europe, Asia, Africa, Oceania, NorthAmerica, SouthAmerica };
enum class IncomeGroup { High, Other };

inline constexpr Continent kAllContinents[] = {Continent::Europe,  Continent::Asia,
                                               Continent::Africa,  Continent::Oceania,
                                               Continent::NorthAmerica, Continent::SouthAmerica};

std::string to_string(Continent c);
std::string to_string(IncomeGroup g);
Continent parse_continent(const std::string& s);
IncomeGroup parse_income_group(const std::string& s);

/// One row of the features table. Missing numbers are NaN.
struct CityFeatures {
  std::string city_id;
  double population = kMissing;
  double income = kMissing;
  double farm_rent = kMissing;
  double fuel_price = kMissing;
  double commuting_speed = kMissing;  // km/h
  double monocentricity = kMissing;   // [0, 1]
  double coastal = kMissing;          // 0 or 1
  double gini = kMissing;
  double informal_pct = kMissing;
  double regulatory = kMissing;  // 0, 1 or 2
  Continent continent = Continent::Europe;
  IncomeGroup income_group = IncomeGroup::Other;
  double market_cover = kMissing;
  double spatial_cover = kMissing;
  double area_km2 = kMissing;

  /// Throws DomainError on values outside their ranges (missing is allowed).
  void validate() const;
};

/// Σ Nᵢ·(distᵢ / fastest timeᵢ) / Σ Nᵢ over populated cells with a positive time.
/// NaN when no cell qualifies.
double density_weighted_speed(const CityGrid& city);

/// Σ cell area · land share over populated cells.
double urbanized_area(const CityGrid& city);

enum class Dependent { RentGradient, DensityGradient };
std::string to_string(Dependent d);

struct SecondStepSpec {
  Dependent dependent = Dependent::RentGradient;
  int specification = 1;  // 1, 2 or 3; each adds a block to the previous
  Continent reference = Continent::Europe;
  std::size_t min_cities = 30;
};

/// Regressor names of a specification, continent dummies included.
std::vector<std::string> second_step_regressors(const SecondStepSpec& spec);

struct RegressionData {
  std::vector<std::string> city_ids;  // sorted
  std::vector<double> y;
  std::vector<econo::Regressor> design;
};

struct SecondStepResult {
  econo::FitResult fit;
  RegressionData data;
  std::size_t n_dropped = 0;  // cities without a gradient or with missing features
  std::vector<std::string> warnings;

  /// In-sample predictions, in data.city_ids order.
  std::vector<double> fitted() const;
};

/// OLS of per-city gradients on the block's regressors. Rows are sorted by city
/// id first, so the result does not depend on input order.
SecondStepResult second_step(const std::map<std::string, double>& gradients,
                             const std::vector<CityFeatures>& features, const SecondStepSpec& spec);

enum class Subset { All, High, Other };
std::string to_string(Subset s);
Subset parse_subset(const std::string& s);

struct UrbanAreaResult {
  econo::FitResult fit;
  RegressionData data;
  std::size_t n_dropped = 0;
  std::map<std::string, std::size_t> dropped;
};

/// Rows of the urbanized-area design (log area on log population, income,
/// farm rent, fuel price, commuting speed, and monocentricity).
UrbanAreaResult urban_area_data(const std::vector<CityFeatures>& features, Subset subset);

UrbanAreaResult urban_area_regression(const std::vector<CityFeatures>& features, Subset subset);

/// Chow test of the urbanized-area design across the income-group split.
econo::ChowResult chow_split_test(const std::vector<CityFeatures>& features);

/// Cities drawn from the closed-city solver with randomized N*, Y, fuel price,
/// commuting speed and farm rent. Area is π·d̄².
struct EnsembleCity {
  CityFeatures features;
  sum::CityParams params;
  sum::Equilibrium equilibrium;
};

std::vector<EnsembleCity> solver_ensemble(std::size_t n_cities, std::uint64_t seed);

}  // namespace sumlab::cross
