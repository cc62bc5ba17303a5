#pragma once

// End-to-end run: simulate an ensemble of cities, estimate every gradient
// spec, recover structural parameters, run the cross-city regressions and
// check the outcome against the known truth.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sumlab/cityforge.hpp"
#include "sumlab/config.hpp"
#include "sumlab/crosscity.hpp"
#include "sumlab/csvio.hpp"
#include "sumlab/gradient.hpp"

namespace sumlab::pipeline {

namespace fs = std::filesystem;

/// Worker count: hardware concurrency, capped by SUMLAB_THREADS when set.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Seed of the i-th city, independent of the schedule.
std::uint64_t city_seed(std::uint64_t run_seed, std::size_t index);

struct Truth {
  std::string city_id;
  double beta = kMissing;
  double a_land = kMissing;
  double f = kMissing;  // 1/β
  double h = kMissing;  // (1 − βa)/(βa)
  double fringe_km = kMissing;
  double population = kMissing;  // N*
  std::size_t n_cells = 0;
};

extern const std::vector<std::string> kTruthHeader;
std::string truth_csv(const std::vector<Truth>& rows);
std::vector<Truth> parse_truth(std::string_view text, const std::string& label);

struct EnsembleMember {
  forge::SimulatedCity sim;
  cross::CityFeatures features;
  Truth truth;
};

/// One simulated city per index, drawn from the config's ranges.
EnsembleMember simulate_member(const config::RunConfig& cfg, std::size_t index);
std::vector<EnsembleMember> simulate_ensemble(const config::RunConfig& cfg, unsigned threads);

/// Specs selected by the config (all standard specs when none are listed).
std::vector<gradient::GradientSpec> selected_specs(const config::RunConfig& cfg);

/// Result row of one fitted or skipped gradient.
io::ResultRow to_row(const gradient::CityGradient& g, const gradient::DataQuality& q);

/// Fits every spec and target on a city. The density target is not fitted for
/// rent-aggregation variants, which would repeat the main density fit.
/// Structural specs with both fits available carry the recovered parameters.
std::vector<io::ResultRow> estimate_city(const CityGrid& city, const std::vector<gradient::GradientSpec>& specs,
                                         std::size_t min_obs);

/// Pairs rent and density rows of one spec per city and recovers β, a, b.
struct Recovered {
  std::string city_id;
  std::string spec_id;
  double f = kMissing;
  double h = kMissing;
  gradient::StructuralEstimates est;
  std::string status;  // ok | missing-rent | missing-density | invalid-gradient
};
std::vector<Recovered> recover_all(const std::vector<io::ResultRow>& rows, const std::string& spec_id);

/// City id → slope of the ok rows of one spec and target.
std::map<std::string, double> gradients_of(const std::vector<io::ResultRow>& rows, const std::string& spec_id,
                                           const std::string& target);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunSummary {
  std::vector<Check> checks;
  fs::path out_dir;
  bool all_pass() const;
};

/// Full run; writes every output under cfg.out_dir() and the report below it.
RunSummary run(const config::RunConfig& cfg, unsigned threads);

}  // namespace sumlab::pipeline
