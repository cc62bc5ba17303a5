#include "sumlab/gradient.hpp"

#include <algorithm>
#include <cmath>

#include "sumlab/errors.hpp"
#include "sumlab/transport.hpp"

namespace sumlab::gradient {

namespace {

using econo::Method;

struct Sample {
  std::vector<double> y, x, z;
};

const char* regressor_name(RegressorKind r) {
  switch (r) {
    case RegressorKind::LogNetIncome: return "ln_net_income";
    case RegressorKind::EuclidDistance: return "distance_km";
    case RegressorKind::LogTransportCost: return "ln_transport_cost";
    case RegressorKind::LogTransportTime: return "ln_transport_time";
    case RegressorKind::LogNetIncomeNoFare: return "ln_net_income_nofare";
  }
  return "x";
}

// Regressor value for one cell, or the reason it has none.
bool regressor_value(const CityGrid& city, const transport::CostModel& model, RegressorKind kind,
                     const CellRecord& c, double& x, const char*& reason) {
  switch (kind) {
    case RegressorKind::EuclidDistance:
      x = c.dist;
      return true;
    case RegressorKind::LogTransportTime: {
      double t = kMissing;
      if (!is_missing(c.time_car)) t = c.time_car;
      if (!is_missing(c.time_transit)) t = is_missing(t) ? c.time_transit : std::min(t, c.time_transit);
      if (is_missing(t)) {
        reason = "missing-time";
        return false;
      }
      if (!(t > 0.0)) {
        reason = "zero-time";
        return false;
      }
      x = std::log(t);
      return true;
    }
    default: break;
  }
  const auto cost = transport::cell_cost(model, c.dist, c.dist_car, c.time_car, c.time_transit);
  if (!cost) {
    reason = "missing-time";
    return false;
  }
  const double T = cost->cost;
  if (kind == RegressorKind::LogTransportCost) {
    if (!(T > 0.0)) {
      reason = "zero-cost";
      return false;
    }
    x = std::log(T);
    return true;
  }
  if (T >= city.income) {
    reason = "cost-exceeds-income";
    return false;
  }
  x = std::log(city.income - T);
  return true;
}

}  // namespace

std::string to_string(Target t) { return t == Target::Rent ? "rent" : "density"; }

std::string to_string(RegressorKind r) {
  switch (r) {
    case RegressorKind::LogNetIncome: return "log-net-income";
    case RegressorKind::EuclidDistance: return "euclid-distance";
    case RegressorKind::LogTransportCost: return "log-transport-cost";
    case RegressorKind::LogTransportTime: return "log-transport-time";
    case RegressorKind::LogNetIncomeNoFare: return "log-net-income-no-fare";
  }
  return "unknown";
}

std::string to_string(RentAggregation a) {
  return a == RentAggregation::CellMean ? "cell-mean" : "size-regression";
}

void GradientSpec::validate() const {
  if (regressor == RegressorKind::EuclidDistance && method == Method::TSLS)
    throw DomainError("spec '" + id +
                      "' regresses on Euclidean distance, which is also the instrument; 2SLS is "
                      "not identified there, use OLS");
}

GradientSpec GradientSpec::with_method(Method m) const {
  GradientSpec s = *this;
  s.method = m;
  s.validate();
  return s;
}

bool GradientSpec::structural() const {
  return regressor == RegressorKind::LogNetIncome || regressor == RegressorKind::LogNetIncomeNoFare;
}

const std::vector<GradientSpec>& standard_specs() {
  static const std::vector<GradientSpec> specs = {
      {"main", RegressorKind::LogNetIncome, RentAggregation::CellMean, Method::TSLS},
      {"main-ols", RegressorKind::LogNetIncome, RentAggregation::CellMean, Method::OLS},
      {"r1", RegressorKind::EuclidDistance, RentAggregation::CellMean, Method::OLS},
      {"r2", RegressorKind::LogTransportCost, RentAggregation::CellMean, Method::TSLS},
      {"r3", RegressorKind::LogTransportTime, RentAggregation::CellMean, Method::TSLS},
      {"r4", RegressorKind::LogNetIncomeNoFare, RentAggregation::CellMean, Method::TSLS},
      {"r5", RegressorKind::LogNetIncome, RentAggregation::SizeRegression, Method::TSLS},
  };
  return specs;
}

GradientSpec spec_by_id(const std::string& id) {
  std::string known;
  for (const auto& s : standard_specs()) {
    if (s.id == id) return s;
    known += (known.empty() ? "" : ", ") + s.id;
  }
  throw DomainError("unknown gradient spec '" + id + "' (known: " + known + ")");
}

double aggregate_rents(std::span<const RentAd> ads, RentAggregation mode) {
  if (mode == RentAggregation::CellMean) {
    if (ads.empty()) return kMissing;
    double s = 0.0;
    for (const auto& a : ads) s += a.total_rent / a.size;
    return s / static_cast<double>(ads.size());
  }
  if (ads.size() < 3) return kMissing;
  double ms = 0.0, mr = 0.0;
  for (const auto& a : ads) ms += a.size, mr += a.total_rent;
  ms /= static_cast<double>(ads.size());
  mr /= static_cast<double>(ads.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& a : ads) {
    sxx += (a.size - ms) * (a.size - ms);
    sxy += (a.size - ms) * (a.total_rent - mr);
  }
  if (!(sxx > 1e-12 * ms * ms * static_cast<double>(ads.size()))) return kMissing;
  return sxy / sxx;
}

std::map<std::int64_t, double> cell_rents(const CityGrid& city, RentAggregation mode) {
  std::map<std::int64_t, std::vector<RentAd>> by_cell;
  for (const auto& a : city.ads) by_cell[a.cell_id].push_back(a);
  std::map<std::int64_t, double> out;
  for (const auto& [id, ads] : by_cell) out[id] = aggregate_rents(ads, mode);
  return out;
}

CityGradient fit_gradient(const CityGrid& city, Target target, const GradientSpec& spec,
                          const FitOptions& opt) {
  spec.validate();
  CityGradient g;
  g.city_id = city.city_id;
  g.target = target;
  g.spec = spec;
  g.n_cells = city.cells.size();

  const auto model = spec.regressor == RegressorKind::LogNetIncomeNoFare ? city.cost_model.without_fare()
                                                                        : city.cost_model;
  const bool size_reg = target == Target::Rent && spec.rent_aggregation == RentAggregation::SizeRegression;
  std::map<std::int64_t, double> reg_rents;
  if (size_reg) reg_rents = cell_rents(city, RentAggregation::SizeRegression);

  Sample s;
  const double area = city.cell_area();
  for (const auto& c : city.cells) {
    const char* reason = nullptr;
    double y = kMissing;
    if (target == Target::Rent) {
      if (size_reg) {
        const auto it = reg_rents.find(c.id);
        y = it == reg_rents.end() ? kMissing : it->second;
      } else {
        y = c.rent;
      }
      if (is_missing(y))
        reason = "missing-rent";
      else if (!(y > 0.0))
        reason = "nonpositive-rent";
    } else {
      if (!(c.land_share > 0.0))
        reason = "zero-land";
      else if (!(c.population > 0.0))
        reason = "zero-population";
      else
        y = c.population / (c.land_share * area);
    }
    double x = 0.0;
    if (!reason) regressor_value(city, model, spec.regressor, c, x, reason);
    double z = 0.0;
    if (!reason && spec.method == Method::TSLS) {
      if (c.dist > 0.0)
        z = std::log(c.dist);
      else
        reason = "centre-cell";
    }
    if (reason) {
      ++g.dropped[reason];
      continue;
    }
    s.y.push_back(std::log(y));
    s.x.push_back(x);
    s.z.push_back(z);
  }
  g.n_used = s.y.size();

  if (g.n_used < std::max<std::size_t>(opt.min_obs, 3)) {
    g.skip_reason = "too-few-observations";
    return g;
  }
  const std::string name = regressor_name(spec.regressor);
  try {
    g.fit = spec.method == Method::OLS ? econo::ols(s.y, {{name, s.x}}) : econo::tsls(s.y, s.x, s.z, name);
  } catch (const WeakInstrumentError&) {
    g.skip_reason = "weak-instrument";
    return g;
  } catch (const SingularityError&) {
    g.skip_reason = "constant-regressor";
    return g;
  }
  g.status = FitStatus::Ok;
  g.slope = g.fit.coefficient(name);
  g.sign = econo::classify_sign(g.fit, name);
  return g;
}

CityGradient fit_rent_gradient(const CityGrid& city, const GradientSpec& spec, const FitOptions& opt) {
  return fit_gradient(city, Target::Rent, spec, opt);
}

CityGradient fit_density_gradient(const CityGrid& city, const GradientSpec& spec, const FitOptions& opt) {
  return fit_gradient(city, Target::Density, spec, opt);
}

StructuralEstimates recover_structural(double f, double h) {
  if (!std::isfinite(f) || !(f > 0.0))
    throw DomainError("structural recovery refused: rent elasticity f must be positive (got " +
                      std::to_string(f) + ")");
  if (!std::isfinite(h) || !(h > -1.0))
    throw DomainError("structural recovery refused: density elasticity h must exceed -1 (got " +
                      std::to_string(h) + ")");
  StructuralEstimates e;
  e.beta_hat = 1.0 / f;
  e.a_hat = f / (1.0 + h);
  e.b_hat = 1.0 - e.a_hat;
  auto check = [&e](double v, const char* name) {
    if (v > 0.0 && v < 1.0) return true;
    e.flags += (e.flags.empty() ? "" : ";") + std::string(name);
    return false;
  };
  const bool ok_beta = check(e.beta_hat, "beta");
  const bool ok_a = check(e.a_hat, "a");
  const bool ok_b = check(e.b_hat, "b");
  e.valid = ok_beta && ok_a && ok_b;
  return e;
}

DataQuality data_quality(const CityGrid& city) {
  DataQuality q;
  const auto ads = city.total_ads();
  if (ads > 0) q.market_cover = city.total_population() / static_cast<double>(ads);
  std::size_t populated = 0, with_rent = 0;
  for (const auto& c : city.cells) {
    if (!(c.population > 0.0)) continue;
    ++populated;
    if (!is_missing(c.rent)) ++with_rent;
  }
  q.spatial_cover = populated > 0 ? static_cast<double>(with_rent) / static_cast<double>(populated) : 0.0;
  return q;
}

}  // namespace sumlab::gradient
