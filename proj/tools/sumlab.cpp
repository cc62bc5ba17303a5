// sumlab: simulate cities, estimate rent and density gradients, and run the
// cross-city analysis.

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>
#include <optional>

#include "sumlab/config.hpp"
#include "sumlab/crosscity.hpp"
#include "sumlab/csvio.hpp"
#include "sumlab/errors.hpp"
#include "sumlab/gradient.hpp"
#include "sumlab/pipeline.hpp"
#include "sumlab/report.hpp"

using namespace sumlab;
namespace fs = std::filesystem;

namespace {

constexpr int kChecksFailed = 1;
constexpr int kUsage = 2;

config::RunConfig load_config(const fs::path& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = config::load(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

int cmd_simulate(const fs::path& cfg_path, const fs::path& out, std::optional<std::uint64_t> seed) {
  auto cfg = load_config(cfg_path, seed);
  const auto members = pipeline::simulate_ensemble(cfg, pipeline::thread_count());
  std::vector<cross::CityFeatures> features;
  std::vector<pipeline::Truth> truth;
  for (const auto& m : members) {
    io::write_city(m.sim.grid, out / "cities");
    features.push_back(m.features);
    truth.push_back(m.truth);
  }
  io::write_file(out / "features.csv", io::features_csv(features));
  io::write_file(out / "truth.csv", pipeline::truth_csv(truth));
  std::cout << "wrote " << members.size() << " cities to " << (out / "cities").string() << '\n';
  return 0;
}

int cmd_estimate(const std::vector<fs::path>& cities, const std::string& spec_id, const std::string& method,
                 const std::string& target, const std::string& times, const fs::path& out, std::size_t min_obs) {
  auto spec = gradient::spec_by_id(spec_id);
  if (!method.empty()) {
    try {
      spec = spec.with_method(method == "ols" ? econo::Method::OLS : econo::Method::TSLS);
    } catch (const DomainError& e) {
      std::cerr << "refused: spec '" << spec_id << "' with --method " << method << ": " << e.what() << '\n';
      return kUsage;
    }
  }
  gradient::FitOptions opt;
  opt.min_obs = min_obs;
  std::vector<io::ResultRow> rows;
  for (const auto& path : cities) {
    auto city = io::read_city(path);
    if (!times.empty()) io::apply_time_samples(city, io::read_time_samples(times));
    const auto q = gradient::data_quality(city);
    std::vector<gradient::Target> targets;
    if (target != "density") targets.push_back(gradient::Target::Rent);
    if (target != "rent") targets.push_back(gradient::Target::Density);
    std::optional<gradient::CityGradient> rent, dens;
    for (auto t : targets) {
      const auto g = gradient::fit_gradient(city, t, spec, opt);
      const std::string title = city.city_id + " " + spec.id + " " + gradient::to_string(t) +
                                (t == gradient::Target::Rent ? " (f)" : " (h)");
      if (g.ok())
        std::cout << report::format_fit(g.fit, title);
      else
        std::cout << title << ": skipped (" << g.skip_reason << ")\n";
      std::cout << "cells " << g.n_cells << ", used " << g.n_used << ", dropped " << g.n_dropped() << "\n\n";
      rows.push_back(pipeline::to_row(g, q));
      (t == gradient::Target::Rent ? rent : dens) = g;
    }
    if (spec.structural() && rent && dens && rent->ok() && dens->ok() && rent->slope > 0.0 && dens->slope > -1.0) {
      const auto est = gradient::recover_structural(rent->slope, dens->slope);
      for (auto it = rows.end() - 2; it != rows.end(); ++it) {
        it->beta_hat = est.beta_hat;
        it->a_hat = est.a_hat;
        it->b_hat = est.b_hat;
        it->structural_valid = est.valid;
      }
    }
  }
  io::write_file(out, io::results_csv(rows));
  std::cout << "wrote " << rows.size() << " rows to " << out.string() << '\n';
  return 0;
}

int cmd_recover(const fs::path& results, const std::string& spec_id, const fs::path& out) {
  const auto rows = io::read_results(results);
  const auto rec = pipeline::recover_all(rows, spec_id);
  std::ostringstream csv;
  io::CsvWriter w(csv);
  w.row({"city_id", "spec_id", "status", "f", "h", "beta_hat", "a_hat", "b_hat", "valid", "flags"});
  std::cout << "city_id        f          h     beta_hat  a_hat     b_hat     status\n";
  for (const auto& r : rec) {
    const bool ok = r.status == "ok";
    w.row({r.city_id, r.spec_id, r.status, io::format_number(r.f), io::format_number(r.h),
           io::format_number(r.est.beta_hat), io::format_number(r.est.a_hat), io::format_number(r.est.b_hat),
           ok ? (r.est.valid ? "1" : "0") : "", r.est.flags});
    std::cout << std::left << std::setw(10) << r.city_id << std::right;
    for (double v : {r.f, r.h, r.est.beta_hat, r.est.a_hat, r.est.b_hat})
      std::cout << std::setw(10) << io::format_fixed(v, 4);
    std::cout << "  " << (ok && !r.est.valid ? "out-of-range:" + r.est.flags : r.status) << '\n';
  }
  if (!out.empty()) io::write_file(out, csv.str());
  return 0;
}

int cmd_second_step(const fs::path& results, const fs::path& features, int specification,
                    const std::string& dependent, const std::string& gradient_spec, const std::string& reference,
                    std::size_t min_cities) {
  const auto rows = io::read_results(results);
  const auto feats = io::read_features(features);
  cross::SecondStepSpec spec;
  spec.dependent = dependent == "rent" ? cross::Dependent::RentGradient : cross::Dependent::DensityGradient;
  spec.specification = specification;
  spec.reference = cross::parse_continent(reference);
  spec.min_cities = min_cities;
  const auto grads = pipeline::gradients_of(rows, gradient_spec, dependent);
  const auto res = cross::second_step(grads, feats, spec);
  for (const auto& m : res.warnings) std::cerr << "warning: " << m << '\n';
  std::cout << report::format_fit(res.fit, cross::to_string(spec.dependent) + " gradient, specification " +
                                               std::to_string(specification));
  std::cout << "cities dropped: " << res.n_dropped << '\n';
  return 0;
}

int cmd_urban_area(const fs::path& features, const std::string& subset, bool chow) {
  const auto feats = io::read_features(features);
  const auto res = cross::urban_area_regression(feats, cross::parse_subset(subset));
  std::cout << report::format_fit(res.fit, "log urbanized area, " + subset + " cities");
  for (const auto& [reason, n] : res.dropped) std::cout << "dropped " << n << " (" << reason << ")\n";
  if (chow) {
    const auto c = cross::chow_split_test(feats);
    std::cout << "Chow test, high vs other income: F = " << io::format_fixed(c.f, 4)
              << ", p = " << io::format_fixed(c.p, 4) << " (k = " << c.k << ", n = " << c.n1 << " + " << c.n2
              << ")\n";
  }
  return 0;
}

int cmd_pipeline(const fs::path& cfg_path, std::optional<std::uint64_t> seed, const fs::path& out) {
  auto cfg = load_config(cfg_path, seed);
  if (!out.empty()) {
    cfg.out = fs::absolute(out);
    cfg.validate();
  }
  const auto summary = pipeline::run(cfg, pipeline::thread_count());
  for (const auto& c : summary.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  std::cout << "outputs in " << summary.out_dir.string() << '\n';
  return summary.all_pass() ? 0 : kChecksFailed;
}

int cmd_report(const fs::path& run_dir) {
  for (const auto& p : report::write_report(run_dir)) std::cout << p.string() << '\n';
  std::cout << io::read_file(run_dir / "report" / "summary.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocentric-city gradients: simulation, estimation and cross-city analysis"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;

  fs::path sim_cfg, sim_out;
  auto* sim = app.add_subcommand("simulate", "Generate synthetic cities and write their grid CSVs");
  sim->add_option("--config", sim_cfg, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the configured seed");

  std::vector<fs::path> est_cities;
  std::string est_spec = "main", est_method, est_target = "both", est_times;
  fs::path est_out = "results.csv";
  std::size_t est_min_obs = 10;
  auto* est = app.add_subcommand("estimate", "First-step gradient fits of grid CSVs");
  est->add_option("--city", est_cities, "Grid CSV (meta and listings are read from its sidecars)")
      ->required()
      ->check(CLI::ExistingFile);
  est->add_option("--spec", est_spec, "main, main-ols, r1, r2, r3, r4 or r5")->capture_default_str();
  est->add_option("--method", est_method, "Override the estimator")->check(CLI::IsMember({"ols", "2sls"}));
  est->add_option("--target", est_target)->check(CLI::IsMember({"rent", "density", "both"}))->capture_default_str();
  est->add_option("--times", est_times, "Sampled travel times CSV (cell_id,mode,hours)")->check(CLI::ExistingFile);
  est->add_option("--out", est_out, "Results CSV")->capture_default_str();
  est->add_option("--min-obs", est_min_obs)->capture_default_str();

  fs::path rec_results, rec_out;
  std::string rec_spec = "main";
  auto* rec = app.add_subcommand("recover", "Structural parameters from fitted gradients");
  rec->add_option("--results", rec_results)->required()->check(CLI::ExistingFile);
  rec->add_option("--spec", rec_spec)->capture_default_str();
  rec->add_option("--out", rec_out, "Optional CSV output");

  fs::path ss_results, ss_features;
  int ss_spec = 1;
  std::string ss_dep = "rent", ss_grad = "main", ss_ref = "Europe";
  std::size_t ss_min = 30;
  auto* ss = app.add_subcommand("second-step", "Regress city gradients on city characteristics");
  ss->add_option("--results", ss_results)->required()->check(CLI::ExistingFile);
  ss->add_option("--features", ss_features)->required()->check(CLI::ExistingFile);
  ss->add_option("--spec", ss_spec)->check(CLI::IsMember({1, 2, 3}))->capture_default_str();
  ss->add_option("--dependent", ss_dep)->check(CLI::IsMember({"rent", "density"}))->capture_default_str();
  ss->add_option("--gradient-spec", ss_grad, "First-step spec supplying the gradients")->capture_default_str();
  ss->add_option("--reference", ss_ref, "Omitted continent")->capture_default_str();
  ss->add_option("--min-cities", ss_min)->capture_default_str();

  fs::path ua_features;
  std::string ua_subset = "all";
  bool ua_chow = false;
  auto* ua = app.add_subcommand("urban-area", "Urbanized-area regression");
  ua->add_option("--features", ua_features)->required()->check(CLI::ExistingFile);
  ua->add_option("--subset", ua_subset)->check(CLI::IsMember({"all", "high", "other"}))->capture_default_str();
  ua->add_flag("--chow", ua_chow, "Chow test across the income-group split");

  fs::path pl_cfg, pl_out;
  auto* pl = app.add_subcommand("pipeline", "Simulate, estimate, recover, cross-city analysis and report");
  pl->add_option("--config", pl_cfg)->required()->check(CLI::ExistingFile);
  pl->add_option("--seed", seed, "Override the configured seed");
  pl->add_option("--out", pl_out, "Override the configured output directory");

  fs::path rp_run;
  auto* rp = app.add_subcommand("report", "Summary tables and plot-ready CSVs of a run directory");
  rp->add_option("--run", rp_run)->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_cfg, sim_out, seed);
    if (*est) return cmd_estimate(est_cities, est_spec, est_method, est_target, est_times, est_out, est_min_obs);
    if (*rec) return cmd_recover(rec_results, rec_spec, rec_out);
    if (*ss) return cmd_second_step(ss_results, ss_features, ss_spec, ss_dep, ss_grad, ss_ref, ss_min);
    if (*ua) return cmd_urban_area(ua_features, ua_subset, ua_chow);
    if (*pl) return cmd_pipeline(pl_cfg, seed, pl_out);
    if (*rp) return cmd_report(rp_run);
  } catch (const ConfigError& e) {
    std::cerr << "configuration errors:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
