#pragma once

// First-step, per-city analysis: rent and density gradients under the main
// specification and its robustness variants, structural recovery, and
// listing-data quality.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sumlab/econo.hpp"
#include "sumlab/grid.hpp"

namespace sumlab::gradient {

enum class Target { Rent, Density };
enum class RegressorKind { LogNetIncome, EuclidDistance, LogTransportCost, LogTransportTime, LogNetIncomeNoFare };
enum class RentAggregation { CellMean, SizeRegression };

std::string to_string(Target t);
std::string to_string(RegressorKind r);
std::string to_string(RentAggregation a);

struct GradientSpec {
  std::string id = "main";
  RegressorKind regressor = RegressorKind::LogNetIncome;
  RentAggregation rent_aggregation = RentAggregation::CellMean;
  econo::Method method = econo::Method::TSLS;

  /// Throws DomainError for 2SLS on the distance regressor (the instrument
  /// would be the regressor itself).
  void validate() const;
  /// Same spec with another estimator, validated.
  GradientSpec with_method(econo::Method m) const;
  /// True when the slope is an elasticity with respect to net income.
  bool structural() const;
};

/// Named specifications: main (2SLS), main-ols, r1 .. r5.
GradientSpec spec_by_id(const std::string& id);
const std::vector<GradientSpec>& standard_specs();

struct FitOptions {
  std::size_t min_obs = 10;
};

enum class FitStatus { Ok, Skipped };

struct CityGradient {
  std::string city_id;
  Target target = Target::Rent;
  GradientSpec spec;
  FitStatus status = FitStatus::Skipped;
  std::string skip_reason;  // empty when fitted
  double slope = kMissing;  // f_c or h_c
  econo::FitResult fit;
  econo::SignClass sign = econo::SignClass::NonSignificant;
  std::size_t n_cells = 0;
  std::size_t n_used = 0;
  std::map<std::string, std::size_t> dropped;  // per-cell reason codes

  bool ok() const { return status == FitStatus::Ok; }
  std::size_t n_dropped() const { return n_cells - n_used; }
};

/// Regression of ln R on the variant's regressor.
CityGradient fit_rent_gradient(const CityGrid& city, const GradientSpec& spec, const FitOptions& opt = {});
/// Regression of ln n on the variant's regressor, n = population / (L · cell area).
CityGradient fit_density_gradient(const CityGrid& city, const GradientSpec& spec, const FitOptions& opt = {});
CityGradient fit_gradient(const CityGrid& city, Target target, const GradientSpec& spec,
                          const FitOptions& opt = {});

struct StructuralEstimates {
  double beta_hat = kMissing;
  double a_hat = kMissing;
  double b_hat = kMissing;
  bool valid = false;  // all three strictly inside (0, 1)
  std::string flags;   // names of out-of-range estimates, ';'-separated
};

/// β = 1/f, a = f/(1+h), b = 1 − a. Throws DomainError when f ≤ 0 or h ≤ −1.
StructuralEstimates recover_structural(double f, double h);

struct DataQuality {
  double market_cover = kMissing;  // persons per listing
  double spatial_cover = 0.0;      // share of populated cells with rent data
};

DataQuality data_quality(const CityGrid& city);

/// Cell rent per m² from its listings, NaN when the listings cannot support the mode.
double aggregate_rents(std::span<const RentAd> ads, RentAggregation mode);

/// Cell rents rebuilt from the listing table, keyed by cell id.
std::map<std::int64_t, double> cell_rents(const CityGrid& city, RentAggregation mode);

}  // namespace sumlab::gradient
