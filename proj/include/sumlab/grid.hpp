#pragma once

// Gridded city records shared by generation, estimation and I/O.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sumlab/transport.hpp"

namespace sumlab {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct GridSpec {
  double cell_size = 1.0;  // km
  double radius = 1.0;     // km
  double center_x = 0.0;
  double center_y = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double cell_area() const { return cell_size * cell_size; }
};

/// One lattice cell. Missing measurements are NaN.
struct CellRecord {
  std::int64_t id = 0;
  std::int64_t ix = 0;  // lattice offset from the centre cell
  std::int64_t iy = 0;
  double x = 0.0;
  double y = 0.0;
  double dist = 0.0;
  double land_share = 1.0;
  double population = 0.0;
  double density = kMissing;  // persons per km² of urbanizable land
  double rent = kMissing;     // per m² of floor space
  double dwelling_size = kMissing;
  double time_car = kMissing;
  double time_transit = kMissing;
  double dist_car = kMissing;
  double gen_cost = kMissing;
  std::int64_t n_ads = 0;
};

/// A single synthetic rent listing.
struct RentAd {
  std::int64_t cell_id = 0;
  double total_rent = 0.0;
  double size = 0.0;
};

struct CityGrid {
  std::string city_id;
  GridSpec spec;
  double income = 0.0;
  transport::CostModel cost_model;
  std::vector<CellRecord> cells;
  std::vector<RentAd> ads;

  double cell_area() const { return spec.cell_area(); }
  std::vector<transport::LatticePoint> lattice() const;
  double total_population() const;
  std::int64_t total_ads() const;
};

}  // namespace sumlab
