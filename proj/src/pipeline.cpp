#include "sumlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "sumlab/errors.hpp"
#include "sumlab/report.hpp"

namespace sumlab::pipeline {

unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SUMLAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        failed = true;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first) std::rethrow_exception(first);
}

std::uint64_t city_seed(std::uint64_t run_seed, std::size_t index) {
  // splitmix64 finalizer over the run seed and the city index.
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---- truth ----------------------------------------------------------------

const std::vector<std::string> kTruthHeader = {"city_id",   "beta",       "a_land", "f_true",
                                               "h_true",    "fringe_km",  "population", "n_cells"};

std::string truth_csv(const std::vector<Truth>& rows) {
  std::ostringstream s;
  io::CsvWriter w(s);
  w.row(kTruthHeader);
  for (const auto& t : rows)
    w.row({t.city_id, io::format_number(t.beta), io::format_number(t.a_land), io::format_number(t.f),
           io::format_number(t.h), io::format_number(t.fringe_km), io::format_number(t.population),
           io::format_int(static_cast<std::int64_t>(t.n_cells))});
  return s.str();
}

std::vector<Truth> parse_truth(std::string_view text, const std::string& label) {
  const auto t = io::parse_csv(text, label);
  io::require_header(t, kTruthHeader);
  std::vector<Truth> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Truth r;
    r.city_id = t.rows[i][0];
    r.beta = t.number(i, 1);
    r.a_land = t.number(i, 2);
    r.f = t.number(i, 3);
    r.h = t.number(i, 4);
    r.fringe_km = t.number(i, 5);
    r.population = t.number(i, 6);
    const auto n = t.integer(i, 7);
    if (n < 0) throw ParseError(label, t.lines[i], "n_cells must be >= 0");
    r.n_cells = static_cast<std::size_t>(n);
    out.push_back(r);
  }
  return out;
}

// ---- simulation -----------------------------------------------------------

namespace {

std::string city_name(std::size_t i) {
  const auto num = std::to_string(i);
  return "C" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num;
}

double draw_uniform(std::mt19937_64& rng, const config::Range& r) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return r.lo == r.hi ? r.lo : r.lo + u * (r.hi - r.lo);
}

double draw_log_uniform(std::mt19937_64& rng, const config::Range& r) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (r.lo == r.hi) return r.lo;
  return std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return report::quantile_sorted(v, 0.5);
}

std::string fmt(double v) { return io::format_fixed(v, 4); }

}  // namespace

EnsembleMember simulate_member(const config::RunConfig& cfg, std::size_t index) {
  const std::uint64_t seed = city_seed(cfg.seed, index);
  std::mt19937_64 rng(seed);

  const double beta = draw_uniform(rng, cfg.beta);
  const double a = draw_uniform(rng, cfg.a_land);
  auto params = sum::CityParams::from_shares(beta, a);
  params.tfp = cfg.tfp;
  params.income = draw_log_uniform(rng, cfg.income);
  params.population = draw_log_uniform(rng, cfg.population);
  params.farm_rent = draw_log_uniform(rng, cfg.farm_rent);
  const double fuel = draw_log_uniform(rng, cfg.fuel_price);
  const double speed = draw_log_uniform(rng, cfg.commuting_speed);

  EnsembleMember m;
  auto& f = m.features;
  f.city_id = city_name(index);
  f.monocentricity = draw_uniform(rng, {0.0, 1.0});
  f.coastal = draw_uniform(rng, {0.0, 1.0}) < 0.4 ? 1.0 : 0.0;
  f.gini = draw_uniform(rng, {25.0, 60.0});
  f.informal_pct = draw_uniform(rng, {0.0, 40.0});
  f.regulatory = std::floor(draw_uniform(rng, {0.0, 3.0 - 1e-12}));
  f.continent = cross::kAllContinents[static_cast<std::size_t>(draw_uniform(rng, {0.0, 6.0 - 1e-12}))];

  transport::TransportParams tp;
  tp.wage = transport::TransportParams::wage_from_income(params.income);
  tp.fuel_price = fuel;
  tp.fuel_efficiency = cfg.fuel_efficiency;
  tp.transit_fare = cfg.transit_fare;
  tp.trips_per_period = cfg.trips_per_period;
  transport::SpeedModel speeds;
  speeds.car_speed_kmh = speed;
  speeds.transit_speed_kmh = cfg.transit_speed_ratio * speed;
  speeds.transit_wait_h = cfg.transit_wait_h;
  speeds.car_detour = cfg.car_detour;
  // Per-km cost of driving; the linear model uses it directly.
  params.t_per_km = tp.trips_per_period * cfg.car_detour * (fuel * tp.fuel_efficiency + tp.wage / speed);

  forge::Commute commute = cfg.cost_kind == config::CostKind::Modal ? forge::Commute::modal(tp, speeds)
                                                                    : forge::Commute::linear(params.t_per_km);
  commute.speeds = speeds;
  commute.sample_fraction = cfg.sample_fraction;
  commute.scheme = cfg.scheme;

  const auto profile = transport::commute_cost_profile(commute.model, commute.speeds);
  const auto eq = sum::solve_equilibrium(params, profile, 1.0 - cfg.noise.mask_rate);
  const auto grid = forge::grid_covering(eq.fringe, eq.fringe / cfg.fringe_cells, seed);
  m.sim = forge::simulate_city(f.city_id, params, grid, cfg.noise, commute);
  const auto& g = m.sim.grid;

  f.population = g.total_population();
  f.income = params.income;
  f.farm_rent = params.farm_rent;
  f.fuel_price = fuel;
  f.commuting_speed = cross::density_weighted_speed(g);
  f.income_group = params.income >= cfg.high_income_threshold ? cross::IncomeGroup::High : cross::IncomeGroup::Other;
  const auto q = gradient::data_quality(g);
  f.market_cover = q.market_cover;
  f.spatial_cover = q.spatial_cover;
  f.area_km2 = cross::urbanized_area(g);

  auto& t = m.truth;
  t.city_id = f.city_id;
  t.beta = beta;
  t.a_land = a;
  t.f = 1.0 / beta;
  t.h = (1.0 - beta * a) / (beta * a);
  t.fringe_km = m.sim.equilibrium.fringe;
  t.population = params.population;
  t.n_cells = g.cells.size();
  return m;
}

std::vector<EnsembleMember> simulate_ensemble(const config::RunConfig& cfg, unsigned threads) {
  std::vector<EnsembleMember> out(cfg.cities);
  parallel_for(cfg.cities, threads, [&](std::size_t i) { out[i] = simulate_member(cfg, i); });
  return out;
}

// ---- estimation -----------------------------------------------------------

std::vector<gradient::GradientSpec> selected_specs(const config::RunConfig& cfg) {
  if (cfg.specs.empty()) return gradient::standard_specs();
  std::vector<gradient::GradientSpec> out;
  for (const auto& id : cfg.specs) out.push_back(gradient::spec_by_id(id));
  return out;
}

io::ResultRow to_row(const gradient::CityGradient& g, const gradient::DataQuality& q) {
  io::ResultRow r;
  r.city_id = g.city_id;
  r.spec_id = g.spec.id;
  r.target = gradient::to_string(g.target);
  r.method = econo::to_string(g.spec.method);
  r.status = g.ok() ? "ok" : "skipped";
  if (g.ok()) {
    r.slope = g.slope;
    r.se = g.fit.se.at(1);
    r.t = g.fit.t.at(1);
    r.p = g.fit.p.at(1);
    r.r2 = g.fit.r2;
    r.sign_class = econo::to_string(g.sign);
  }
  r.n_obs = static_cast<std::int64_t>(g.n_used);
  r.n_dropped = static_cast<std::int64_t>(g.n_dropped());
  r.market_cover = q.market_cover;
  r.spatial_cover = q.spatial_cover;
  r.skip_reason = g.skip_reason;
  for (const auto& [reason, count] : g.dropped) {
    if (!r.drop_reasons.empty()) r.drop_reasons += ';';
    r.drop_reasons += reason + ":" + std::to_string(count);
  }
  return r;
}

std::vector<io::ResultRow> estimate_city(const CityGrid& city, const std::vector<gradient::GradientSpec>& specs,
                                         std::size_t min_obs) {
  const auto q = gradient::data_quality(city);
  gradient::FitOptions opt;
  opt.min_obs = min_obs;
  std::vector<io::ResultRow> rows;
  for (const auto& spec : specs) {
    const auto rent = gradient::fit_rent_gradient(city, spec, opt);
    rows.push_back(to_row(rent, q));
    if (spec.rent_aggregation != gradient::RentAggregation::CellMean) continue;
    const auto dens = gradient::fit_density_gradient(city, spec, opt);
    rows.push_back(to_row(dens, q));
    if (spec.structural() && rent.ok() && dens.ok()) {
      auto& rr = rows[rows.size() - 2];
      auto& dr = rows.back();
      if (rent.slope > 0.0 && dens.slope > -1.0) {
        const auto est = gradient::recover_structural(rent.slope, dens.slope);
        for (auto* r : {&rr, &dr}) {
          r->beta_hat = est.beta_hat;
          r->a_hat = est.a_hat;
          r->b_hat = est.b_hat;
          r->structural_valid = est.valid;
        }
      } else {
        rr.structural_valid = false;
        dr.structural_valid = false;
      }
    }
  }
  return rows;
}

std::vector<Recovered> recover_all(const std::vector<io::ResultRow>& rows, const std::string& spec_id) {
  std::map<std::string, std::pair<const io::ResultRow*, const io::ResultRow*>> by_city;
  for (const auto& r : rows) {
    if (r.spec_id != spec_id) continue;
    auto& slot = by_city[r.city_id];
    (r.target == "rent" ? slot.first : slot.second) = &r;
  }
  std::vector<Recovered> out;
  for (const auto& [city, pair] : by_city) {
    Recovered rec;
    rec.city_id = city;
    rec.spec_id = spec_id;
    const auto* rent = pair.first;
    const auto* dens = pair.second;
    if (!rent || rent->status != "ok") {
      rec.status = "missing-rent";
    } else if (!dens || dens->status != "ok") {
      rec.status = "missing-density";
    } else {
      rec.f = rent->slope;
      rec.h = dens->slope;
      if (!(rec.f > 0.0) || !(rec.h > -1.0)) {
        rec.status = "invalid-gradient";
      } else {
        rec.est = gradient::recover_structural(rec.f, rec.h);
        rec.status = "ok";
      }
    }
    out.push_back(rec);
  }
  return out;
}

std::map<std::string, double> gradients_of(const std::vector<io::ResultRow>& rows, const std::string& spec_id,
                                           const std::string& target) {
  std::map<std::string, double> out;
  for (const auto& r : rows)
    if (r.spec_id == spec_id && r.target == target && r.status == "ok") out[r.city_id] = r.slope;
  return out;
}

bool RunSummary::all_pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

// ---- full run -------------------------------------------------------------

namespace {

std::string structural_csv(const std::vector<Recovered>& rec, const std::map<std::string, Truth>& truth) {
  std::ostringstream s;
  io::CsvWriter w(s);
  w.row({"city_id", "spec_id", "status", "f", "h", "beta_hat", "a_hat", "b_hat", "valid", "flags", "beta_true",
         "a_true"});
  for (const auto& r : rec) {
    const auto it = truth.find(r.city_id);
    const bool ok = r.status == "ok";
    w.row({r.city_id, r.spec_id, r.status, io::format_number(r.f), io::format_number(r.h),
           io::format_number(r.est.beta_hat), io::format_number(r.est.a_hat), io::format_number(r.est.b_hat),
           ok ? (r.est.valid ? "1" : "0") : "", r.est.flags,
           io::format_number(it != truth.end() ? it->second.beta : kMissing),
           io::format_number(it != truth.end() ? it->second.a_land : kMissing)});
  }
  return s.str();
}

Check gradient_check(const std::string& name, const std::vector<io::ResultRow>& rows, const std::string& target,
                     const std::map<std::string, Truth>& truth, double tol) {
  std::vector<double> err;
  std::size_t expected = 0;
  for (const auto& r : rows) {
    if (r.spec_id != "main" || r.target != target) continue;
    ++expected;
    if (r.status != "ok") continue;
    const auto& t = truth.at(r.city_id);
    const double want = target == "rent" ? t.f : t.h;
    err.push_back(std::abs(r.slope / want - 1.0));
  }
  Check c;
  c.name = name;
  const double fitted_share = expected ? static_cast<double>(err.size()) / static_cast<double>(expected) : 0.0;
  const double med = err.empty() ? kMissing : median_of(err);
  c.pass = fitted_share >= 0.9 && med <= tol;
  c.detail = "fitted " + std::to_string(err.size()) + "/" + std::to_string(expected) +
             ", median relative error " + fmt(med) + " (tolerance " + fmt(tol) + ")";
  return c;
}

}  // namespace

RunSummary run(const config::RunConfig& cfg, unsigned threads) {
  cfg.validate();
  RunSummary summary;
  summary.out_dir = cfg.out_dir();
  const auto out = summary.out_dir;
  fs::create_directories(out / "cities");
  io::write_file(out / "config.ini", config::to_text(cfg));

  const auto specs = selected_specs(cfg);
  std::vector<EnsembleMember> members(cfg.cities);
  std::vector<std::vector<io::ResultRow>> per_city(cfg.cities);
  parallel_for(cfg.cities, threads, [&](std::size_t i) {
    members[i] = simulate_member(cfg, i);
    io::write_city(members[i].sim.grid, out / "cities");
    per_city[i] = estimate_city(members[i].sim.grid, specs, cfg.min_obs);
  });

  std::vector<io::ResultRow> rows;
  std::vector<cross::CityFeatures> features;
  std::vector<Truth> truths;
  std::map<std::string, Truth> truth_by_id;
  for (std::size_t i = 0; i < cfg.cities; ++i) {
    rows.insert(rows.end(), per_city[i].begin(), per_city[i].end());
    features.push_back(members[i].features);
    truths.push_back(members[i].truth);
    truth_by_id[members[i].truth.city_id] = members[i].truth;
  }
  io::write_file(out / "results.csv", io::results_csv(rows));
  io::write_file(out / "features.csv", io::features_csv(features));
  io::write_file(out / "truth.csv", truth_csv(truths));

  const auto recovered = recover_all(rows, "main");
  io::write_file(out / "structural.csv", structural_csv(recovered, truth_by_id));

  // Cross-city regressions.
  bool second_ok = true;
  std::string second_detail;
  {
    std::ostringstream coef, warn;
    io::CsvWriter cw(coef), ww(warn);
    cw.row(report::coefficient_header({"dependent", "specification", "n_dropped"}));
    ww.row({"dependent", "specification", "message"});
    std::size_t fitted = 0, attempted = 0;
    for (auto dep : {cross::Dependent::RentGradient, cross::Dependent::DensityGradient}) {
      const auto grads = gradients_of(rows, "main", dep == cross::Dependent::RentGradient ? "rent" : "density");
      for (int s = 1; s <= 3; ++s) {
        ++attempted;
        cross::SecondStepSpec spec;
        spec.dependent = dep;
        spec.specification = s;
        spec.reference = cfg.reference;
        spec.min_cities = cfg.min_cities;
        try {
          const auto res = cross::second_step(grads, features, spec);
          report::append_coefficients(cw, {cross::to_string(dep), std::to_string(s), std::to_string(res.n_dropped)},
                                      res.fit);
          for (const auto& m : res.warnings) ww.row({cross::to_string(dep), std::to_string(s), m});
          ++fitted;
        } catch (const std::exception& e) {
          ww.row({cross::to_string(dep), std::to_string(s), std::string("not fitted: ") + e.what()});
        }
      }
    }
    io::write_file(out / "second_step.csv", coef.str());
    io::write_file(out / "second_step_notes.csv", warn.str());
    second_ok = fitted == attempted;
    second_detail = "fitted " + std::to_string(fitted) + "/" + std::to_string(attempted) + " specifications";
  }

  Check urban{"urban-area-signs", false, ""};
  {
    std::ostringstream coef;
    io::CsvWriter cw(coef);
    cw.row(report::coefficient_header({"subset", "n_dropped"}));
    for (auto subset : {cross::Subset::All, cross::Subset::High, cross::Subset::Other}) {
      try {
        const auto res = cross::urban_area_regression(features, subset);
        report::append_coefficients(cw, {cross::to_string(subset), std::to_string(res.n_dropped)}, res.fit);
        if (subset == cross::Subset::All) {
          const double pop = res.fit.coefficient("log_population");
          const double inc = res.fit.coefficient("log_income");
          const double farm = res.fit.coefficient("log_farm_rent");
          urban.pass = pop > 0.0 && inc > 0.0 && farm < 0.0;
          urban.detail = "log_population " + fmt(pop) + ", log_income " + fmt(inc) + ", log_farm_rent " + fmt(farm);
        }
      } catch (const std::exception& e) {
        if (subset == cross::Subset::All) urban.detail = std::string("not fitted: ") + e.what();
      }
    }
    io::write_file(out / "urban_area.csv", coef.str());

    std::ostringstream chow;
    io::CsvWriter w(chow);
    w.row({"test", "f", "p", "k", "n_high", "n_other", "status"});
    try {
      const auto c = cross::chow_split_test(features);
      w.row({"income-group", io::format_number(c.f), io::format_number(c.p), std::to_string(c.k),
             std::to_string(c.n1), std::to_string(c.n2), "ok"});
    } catch (const std::exception& e) {
      w.row({"income-group", "", "", "", "", "", std::string("not computed: ") + e.what()});
    }
    io::write_file(out / "chow.csv", chow.str());
  }

  // Checks.
  {
    std::size_t mismatched = 0, ok = 0, skipped = 0;
    std::map<std::string, std::size_t> per_city_rows;
    for (const auto& r : rows) {
      ++per_city_rows[r.city_id];
      (r.status == "ok" ? ok : skipped)++;
      const auto n_cells = truth_by_id.at(r.city_id).n_cells;
      if (static_cast<std::size_t>(r.n_obs + r.n_dropped) != n_cells) ++mismatched;
    }
    std::size_t per_city_expected = 0;
    for (const auto& s : specs) per_city_expected += s.rent_aggregation == gradient::RentAggregation::CellMean ? 2 : 1;
    bool rows_ok = per_city_rows.size() == cfg.cities;
    for (const auto& [id, n] : per_city_rows) rows_ok = rows_ok && n == per_city_expected;
    Check c{"counts-reconcile", mismatched == 0 && rows_ok && ok + skipped == rows.size(),
            "rows " + std::to_string(rows.size()) + " = ok " + std::to_string(ok) + " + skipped " +
                std::to_string(skipped) + "; cell count mismatches " + std::to_string(mismatched)};
    summary.checks.push_back(c);
  }
  summary.checks.push_back(gradient_check("rent-gradient", rows, "rent", truth_by_id, cfg.gradient_tolerance));
  summary.checks.push_back(gradient_check("density-gradient", rows, "density", truth_by_id, cfg.gradient_tolerance));
  {
    std::vector<double> eb, ea;
    for (const auto& r : recovered) {
      if (r.status != "ok") continue;
      const auto& t = truth_by_id.at(r.city_id);
      eb.push_back(std::abs(r.est.beta_hat / t.beta - 1.0));
      ea.push_back(std::abs(r.est.a_hat / t.a_land - 1.0));
    }
    const double mb = eb.empty() ? kMissing : median_of(eb);
    const double ma = ea.empty() ? kMissing : median_of(ea);
    summary.checks.push_back({"structural-recovery",
                              !eb.empty() && mb <= cfg.structural_tolerance && ma <= cfg.structural_tolerance,
                              "recovered " + std::to_string(eb.size()) + "/" + std::to_string(recovered.size()) +
                                  ", median relative error beta " + fmt(mb) + ", a " + fmt(ma) + " (tolerance " +
                                  fmt(cfg.structural_tolerance) + ")"});
  }
  summary.checks.push_back({"second-step", second_ok, second_detail});
  summary.checks.push_back(urban);

  {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"check", "status", "detail"});
    for (const auto& c : summary.checks) w.row({c.name, c.pass ? "PASS" : "FAIL", c.detail});
    io::write_file(out / "checks.csv", s.str());
  }
  report::write_report(out);
  return summary;
}

}  // namespace sumlab::pipeline
