#include "sumlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <map>
#include <set>

#include "sumlab/errors.hpp"

namespace sumlab::transport {

namespace {

bool missing(double v) { return std::isnan(v); }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

// 0, n, n/2, n/4, 3n/4, ...: coarse-to-fine order of the step indices 0..n.
std::vector<int> coarse_to_fine(int n) {
  std::vector<int> order;
  std::vector<char> used(n + 1, 0);
  auto take = [&](int s) {
    if (!used[s]) {
      used[s] = 1;
      order.push_back(s);
    }
  };
  take(0);
  take(n);
  for (int denom = 2; static_cast<int>(order.size()) < n + 1; denom *= 2) {
    for (int num = 1; num < denom; num += 2) take(static_cast<int>(std::lround(1.0 * n * num / denom)));
    if (denom > 4 * (n + 1)) {
      for (int s = 0; s <= n; ++s) take(s);
    }
  }
  return order;
}

}  // namespace

void TransportParams::validate() const {
  require(std::isfinite(wage) && wage > 0.0, "wage must be positive");
  require(std::isfinite(fuel_price) && fuel_price > 0.0, "fuel_price must be positive");
  require(std::isfinite(fuel_efficiency) && fuel_efficiency > 0.0,
          "fuel_efficiency must be positive");
  require(std::isfinite(transit_fare) && transit_fare >= 0.0, "transit_fare must be >= 0");
  require(std::isfinite(trips_per_period) && trips_per_period > 0.0,
          "trips_per_period must be positive");
}

double car_cost(double dist_km, double time_h, const TransportParams& p) {
  require(std::isfinite(dist_km) && std::isfinite(time_h), "non-finite car trip");
  require(dist_km >= 0.0 && time_h >= 0.0, "car distance and time must be >= 0");
  return p.trips_per_period * (time_h * p.wage + dist_km * p.fuel_efficiency * p.fuel_price);
}

double transit_cost(double time_h, const TransportParams& p) {
  require(std::isfinite(time_h) && time_h >= 0.0, "transit time must be >= 0");
  return p.trips_per_period * (time_h * p.wage + p.transit_fare);
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Car: return "car";
    case Mode::Transit: return "transit";
    case Mode::Linear: return "linear";
  }
  return "unknown";
}

std::optional<ModeChoice> generalized_cost(std::optional<double> car,
                                           std::optional<double> transit) {
  if (transit && (!car || *transit <= *car)) return ModeChoice{*transit, Mode::Transit};
  if (car) return ModeChoice{*car, Mode::Car};
  return std::nullopt;
}

CostModel CostModel::linear(double t_per_km) {
  require(std::isfinite(t_per_km) && t_per_km > 0.0, "t_per_km must be positive");
  CostModel m;
  m.kind = Kind::Linear;
  m.t_per_km = t_per_km;
  return m;
}

CostModel CostModel::modal(const TransportParams& p) {
  p.validate();
  CostModel m;
  m.kind = Kind::Modal;
  m.params = p;
  return m;
}

CostModel CostModel::without_fare() const {
  CostModel m = *this;
  m.params.transit_fare = 0.0;
  return m;
}

std::optional<ModeChoice> cell_cost(const CostModel& model, double dist_km, double dist_car_km,
                                    double time_car_h, double time_transit_h) {
  if (model.kind == CostModel::Kind::Linear) {
    if (missing(dist_km)) return std::nullopt;
    return ModeChoice{model.t_per_km * dist_km, Mode::Linear};
  }
  std::optional<double> car;
  std::optional<double> transit;
  if (!missing(dist_car_km) && !missing(time_car_h))
    car = car_cost(dist_car_km, time_car_h, model.params);
  if (!missing(time_transit_h)) transit = transit_cost(time_transit_h, model.params);
  return generalized_cost(car, transit);
}

void SpeedModel::validate() const {
  require(car_speed_kmh > 0.0 && transit_speed_kmh > 0.0, "speeds must be positive");
  require(transit_wait_h >= 0.0, "transit wait must be >= 0");
  require(car_detour >= 1.0, "car detour factor must be >= 1");
}

sum::CommuteCost commute_cost_profile(const CostModel& model, const SpeedModel& speeds) {
  if (model.kind == CostModel::Kind::Linear) return sum::CommuteCost::linear(model.t_per_km);
  const auto& p = model.params;
  const double car_slope =
      p.trips_per_period * speeds.car_detour * (p.wage / speeds.car_speed_kmh + p.fuel_efficiency * p.fuel_price);
  const double transit_slope = p.trips_per_period * p.wage / speeds.transit_speed_kmh;
  const double transit_intercept = p.trips_per_period * (p.wage * speeds.transit_wait_h + p.transit_fare);
  return sum::CommuteCost::envelope({{0.0, car_slope}, {transit_intercept, transit_slope}});
}

SampledField star_sample(std::span<const LatticePoint> cells, std::span<const double> field,
                         int branches, double fraction) {
  require(!cells.empty(), "star sampling needs a non-empty grid");
  require(field.size() == cells.size(), "field must hold one value per cell");
  require(std::isfinite(fraction) && fraction > 0.0 && fraction <= 1.0,
          "sampling fraction must lie in (0, 1]");
  require(branches >= 1, "star needs at least one branch");

  const std::size_t n = cells.size();
  const std::size_t target =
      std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));

  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> lookup;
  for (std::size_t i = 0; i < n; ++i) lookup.emplace(std::pair{cells[i].ix, cells[i].iy}, i);

  // Nearest cell to a continuous point; ties resolve to the lower index.
  auto snap = [&](double x, double y) {
    auto hit = lookup.find({std::llround(x), std::llround(y)});
    if (hit != lookup.end()) return hit->second;
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = static_cast<double>(cells[i].ix) - x;
      const double dy = static_cast<double>(cells[i].iy) - y;
      const double d = dx * dx + dy * dy;
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };

  // Branch reach: farthest cell within half a cell of the branch axis.
  auto reach = [&](double ux, double uy) {
    double len = 0.0;
    for (const auto& c : cells) {
      const double along = c.ix * ux + c.iy * uy;
      const double across = std::abs(-c.ix * uy + c.iy * ux);
      if (across <= 0.5 + 1e-9) len = std::max(len, along);
    }
    return len;
  };

  std::vector<std::size_t> chosen;
  int used_branches = branches;
  for (int b = branches;; b *= 2) {
    used_branches = b;
    std::vector<double> ux(b), uy(b), len(b);
    for (int k = 0; k < b; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / b;
      ux[k] = std::cos(angle);
      uy[k] = std::sin(angle);
      len[k] = reach(ux[k], uy[k]);
    }
    const double longest = *std::max_element(len.begin(), len.end());
    // Beyond half-cell spacing on the longest branch no step count finds new cells.
    const int fine_steps = static_cast<int>(std::ceil(2.0 * longest)) + 1;
    const int first_steps =
        std::min(fine_steps, std::max<int>(1, static_cast<int>(target / b) - 1));
    for (int steps = first_steps; steps <= fine_steps; ++steps) {
      std::vector<std::size_t> candidate;
      std::set<std::size_t> seen;
      for (int s : coarse_to_fine(steps)) {
        for (int k = 0; k < b; ++k) {
          const double r = len[k] * s / steps;
          const std::size_t idx = snap(r * ux[k], r * uy[k]);
          if (seen.insert(idx).second) candidate.push_back(idx);
        }
      }
      if (candidate.size() > chosen.size() || candidate.size() >= target) chosen = std::move(candidate);
      if (chosen.size() >= target) break;
    }
    if (chosen.size() >= target) {
      chosen.resize(target);
      break;
    }
    // Finer angles than the outermost cells resolve cannot help: fill by distance.
    if (b > 16.0 * (longest + 1.0)) {
      std::vector<std::size_t> rest;
      std::set<std::size_t> have(chosen.begin(), chosen.end());
      for (std::size_t i = 0; i < n; ++i)
        if (!have.count(i)) rest.push_back(i);
      std::stable_sort(rest.begin(), rest.end(), [&](std::size_t i, std::size_t j) {
        return std::hypot(cells[i].ix, cells[i].iy) < std::hypot(cells[j].ix, cells[j].iy);
      });
      for (std::size_t i : rest) {
        if (chosen.size() >= target) break;
        chosen.push_back(i);
      }
      break;
    }
  }

  SampledField out;
  out.branches = used_branches;
  out.cell_index = chosen;
  for (std::size_t i : chosen) {
    require(std::isfinite(field[i]) && field[i] >= 0.0, "sampled values must be finite and >= 0");
    out.points.push_back(cells[i]);
    out.values.push_back(field[i]);
  }
  out.coverage_fraction = static_cast<double>(chosen.size()) / static_cast<double>(n);
  return out;
}

InterpolatedField interpolate_field(const SampledField& samples,
                                    std::span<const LatticePoint> cells,
                                    InterpolationScheme scheme) {
  const FieldInterpolator interp(samples.points, samples.values, scheme);
  InterpolatedField out;
  out.degraded = interp.degraded();
  out.values.reserve(cells.size());
  for (const auto& c : cells) {
    const double x = static_cast<double>(c.ix);
    const double y = static_cast<double>(c.iy);
    if (!out.degraded && !interp.inside_hull(x, y)) ++out.outside_hull;
    out.values.push_back(interp(x, y));
  }
  return out;
}

std::string rush_hour_select(std::span<const TimeSlice> slices) {
  require(!slices.empty(), "rush-hour selection needs at least one slice");
  const TimeSlice* best = &slices.front();
  for (const auto& s : slices)
    if (s.mean_delay > best->mean_delay) best = &s;
  return best->label;
}

}  // namespace sumlab::transport
