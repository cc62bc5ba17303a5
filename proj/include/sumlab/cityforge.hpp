#pragma once

// Synthetic gridded cities generated from the monocentric model (and from its
// distance-amenity variant), used as ground truth for the estimators.

#include <string>
#include <vector>

#include "sumlab/grid.hpp"
#include "sumlab/sum_core.hpp"
#include "sumlab/transport.hpp"

namespace sumlab::forge {

struct NoiseSpec {
  double sigma_rent = 0.0;     // log-scale sd of cell rents
  double sigma_density = 0.0;  // log-scale sd of cell densities
  double ad_rate = 1.0;        // expected listings per 1000 residents
  double mask_rate = 0.0;      // share of cells made non-urbanizable
  // Record the cell rent even where no listing was drawn.
  bool full_rent_coverage = false;
  // Congestion: travel times scale by exp(congestion_sigma·ζ) and log rents
  // shift by −congestion_rent_loading·ζ, with ζ standard normal per cell.
  double congestion_sigma = 0.0;
  double congestion_rent_loading = 0.0;
  double ad_size_sigma = 0.3;  // log-sd of listing sizes around q
  double ad_rent_sigma = 0.0;  // log-sd of listing rent per m² around the cell rent

  void validate() const;
  static NoiseSpec none();
};

struct AmenityParams {
  double kappa = 1.0;
  double theta = 0.01;  // per km

  void validate() const;
  double operator()(double dist) const;
};

/// Cost model plus the synthetic speeds used to fill travel times.
struct Commute {
  transport::CostModel model = transport::CostModel::linear(1.0);
  transport::SpeedModel speeds;
  // Below 1, recorded times come from a star sample interpolated to the grid.
  double sample_fraction = 1.0;
  transport::InterpolationScheme scheme = transport::InterpolationScheme::CloughTocher;

  static Commute linear(double t_per_km);
  static Commute modal(const transport::TransportParams& p,
                       const transport::SpeedModel& speeds = {});
};

/// Cells of a square lattice whose centres lie within `radius` of the centre.
std::vector<CellRecord> make_grid(const GridSpec& spec);

/// Population N* whose closed-city equilibrium has the given fringe distance.
double population_for_fringe(const sum::CityParams& params, const Commute& commute, double fringe_km,
                             double land_share = 1.0);

/// Parameters rescaled so the equilibrium city has the given fringe and central
/// density: productivity A sets the density level, N* follows from the fringe.
sum::CityParams calibrate_city(sum::CityParams params, const Commute& commute, double fringe_km,
                               double central_density, double land_share = 1.0);

/// Grid just covering a city of the given fringe distance.
GridSpec grid_covering(double fringe_km, double cell_size, std::uint64_t seed);

struct SimulatedCity {
  CityGrid grid;
  sum::CityParams params;
  sum::Equilibrium equilibrium;
};

SimulatedCity simulate_city(const std::string& city_id, const sum::CityParams& params,
                            const GridSpec& spec, const NoiseSpec& noise, const Commute& commute);

/// Closed-city equilibrium of the amenity model, l(d) = κ·e^{−θd}, with the
/// city truncated at `radius` when rents never fall to the farm rent.
sum::Equilibrium solve_amenity_equilibrium(const sum::CityParams& params,
                                           const AmenityParams& amenity, double radius,
                                           double land_share = 1.0);

SimulatedCity simulate_amenity_city(const std::string& city_id, const sum::CityParams& params,
                                    const GridSpec& spec, const AmenityParams& amenity,
                                    const NoiseSpec& noise, const Commute& commute);

}  // namespace sumlab::forge
