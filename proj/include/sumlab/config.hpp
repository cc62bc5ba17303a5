#pragma once

// Run configuration: an INI file with [run], [city], [grid], [noise],
// [transport], [estimation] and [checks] sections. Every key is optional and
// has a default; unknown sections and keys are errors. Validation collects all
// problems before throwing a ConfigError.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sumlab/cityforge.hpp"
#include "sumlab/crosscity.hpp"

namespace sumlab::config {

namespace fs = std::filesystem;

/// Closed interval for a city-level draw. lo == hi fixes the value.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

enum class CostKind { Modal, Linear };

struct RunConfig {
  fs::path source;  // config file, empty when built in code

  // [run]
  std::uint64_t seed = 1;
  std::size_t cities = 192;
  fs::path out = "run";  // relative paths resolve against the config file's directory

  // [city] draws, log-uniform for the strictly positive money and size ranges
  Range beta{0.28, 0.42};
  Range a_land{0.12, 0.20};
  Range income{3000.0, 60000.0};
  Range population{2e5, 2e7};
  Range farm_rent{20.0, 400.0};
  Range fuel_price{0.5, 2.5};
  Range commuting_speed{15.0, 45.0};  // car speed, km/h
  double tfp = 3e-2;
  double high_income_threshold = 15000.0;

  // [grid]
  double fringe_cells = 12.0;  // cells between the centre and the fringe

  // [noise]
  forge::NoiseSpec noise;

  // [transport]
  CostKind cost_kind = CostKind::Modal;
  double transit_speed_ratio = 0.6;
  double transit_wait_h = 0.15;
  double car_detour = 1.25;
  double fuel_efficiency = 0.08;
  double transit_fare = 1.0;
  double trips_per_period = 440.0;
  double sample_fraction = 1.0;
  transport::InterpolationScheme scheme = transport::InterpolationScheme::CloughTocher;

  // [estimation]
  std::vector<std::string> specs;  // empty = all standard specs
  std::size_t min_obs = 10;
  cross::Continent reference = cross::Continent::Europe;
  std::size_t min_cities = 30;

  // [checks]
  double gradient_tolerance = 0.10;    // median relative error of main-spec f and h
  double structural_tolerance = 0.10;  // median relative error of recovered beta and a

  /// Resolved output directory.
  fs::path out_dir() const;
  /// Throws ConfigError listing every violated key.
  void validate() const;
};

RunConfig parse(const std::string& text, const fs::path& source = {});
RunConfig load(const fs::path& path);

/// Canonical text form; parse(to_text(c)) reproduces c.
std::string to_text(const RunConfig& c);

}  // namespace sumlab::config
