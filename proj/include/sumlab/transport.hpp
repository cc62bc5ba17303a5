#pragma once

// Generalized commuting cost: opportunity cost of time at the wage rate plus
// the monetary cost of the cheaper mode, and the sparse-sampling machinery used
// to build travel-time surfaces from a star of sampled cells.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sumlab/sum_core.hpp"
#include "sumlab/triangulation.hpp"

namespace sumlab::transport {

/// Commuting round trips per period: two per working day over a 220-day year.
inline constexpr double kWorkingDaysPerPeriod = 220.0;
inline constexpr double kTripsPerPeriod = 2.0 * kWorkingDaysPerPeriod;
/// Paid hours per period; the hourly wage is income / kWorkHoursPerPeriod.
inline constexpr double kWorkHoursPerPeriod = 8.0 * kWorkingDaysPerPeriod;

struct TransportParams {
  double wage = 1.0;              // currency per hour
  double fuel_price = 1.0;        // currency per liter
  double fuel_efficiency = 0.08;  // liters per km
  double transit_fare = 1.0;      // currency per trip
  double trips_per_period = kTripsPerPeriod;

  void validate() const;
  static double wage_from_income(double income_per_period) {
    return income_per_period / kWorkHoursPerPeriod;
  }
};

/// trips · (time·wage + dist·efficiency·fuel price)
double car_cost(double dist_km, double time_h, const TransportParams& p);
/// trips · (time·wage + fare); independent of distance.
double transit_cost(double time_h, const TransportParams& p);

enum class Mode { Car, Transit, Linear };

std::string to_string(Mode m);

struct ModeChoice {
  double cost = 0.0;
  Mode mode = Mode::Transit;
};

/// The cheaper available mode; ties go to transit. Empty when neither mode has data.
std::optional<ModeChoice> generalized_cost(std::optional<double> car, std::optional<double> transit);

/// How a city's transport cost is computed from a cell's geometry and times.
struct CostModel {
  enum class Kind { Linear, Modal };
  Kind kind = Kind::Modal;
  double t_per_km = 0.0;  // Linear only
  TransportParams params;  // Modal only

  static CostModel linear(double t_per_km);
  static CostModel modal(const TransportParams& p);
  /// Same model with the transit fare removed.
  CostModel without_fare() const;
};

/// Per-cell generalized cost. NaN inputs mean "no data for that mode".
std::optional<ModeChoice> cell_cost(const CostModel& model, double dist_km, double dist_car_km,
                                    double time_car_h, double time_transit_h);

/// Speeds and geometry used to synthesize travel times.
struct SpeedModel {
  double car_speed_kmh = 30.0;
  double transit_speed_kmh = 20.0;
  double transit_wait_h = 0.15;
  double car_detour = 1.25;  // road km per Euclidean km

  void validate() const;
  double car_distance(double dist_km) const { return car_detour * dist_km; }
  double car_time(double dist_km) const { return car_detour * dist_km / car_speed_kmh; }
  double transit_time(double dist_km) const {
    return dist_km / transit_speed_kmh + transit_wait_h;
  }
};

/// Commuting cost as a function of Euclidean distance under uncongested speeds,
/// as the lower envelope of the per-mode affine costs.
sum::CommuteCost commute_cost_profile(const CostModel& model, const SpeedModel& speeds);

struct SampledField {
  std::vector<std::size_t> cell_index;  // positions in the sampled grid
  std::vector<LatticePoint> points;
  std::vector<double> values;
  double coverage_fraction = 0.0;
  int branches = 0;  // branch count actually used
};

/// Cells sampled along a star of equally spaced branches centred on (0, 0),
/// the first branch pointing along +x. Exactly ceil(fraction·cells) distinct
/// cells are returned. If the branches saturate before the target count, the
/// branch count doubles. Coarse points of every branch take precedence over
/// intermediate ones, so the star tips survive truncation.
SampledField star_sample(std::span<const LatticePoint> cells, std::span<const double> field,
                         int branches = 8, double fraction = 0.10);

struct InterpolatedField {
  std::vector<double> values;
  bool degraded = false;  // nearest-sample fallback everywhere
  std::size_t outside_hull = 0;
};

InterpolatedField interpolate_field(const SampledField& samples,
                                    std::span<const LatticePoint> cells,
                                    InterpolationScheme scheme = InterpolationScheme::CloughTocher);

struct TimeSlice {
  std::string label;
  double mean_delay = 0.0;
};

/// Slice with the largest mean congestion delay; ties go to the earliest slice.
std::string rush_hour_select(std::span<const TimeSlice> slices);

}  // namespace sumlab::transport
