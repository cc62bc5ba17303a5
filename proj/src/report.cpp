#include "sumlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "sumlab/errors.hpp"

namespace sumlab::report {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return kMissing;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Distribution describe(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  Distribution d;
  d.n = values.size();
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  long double sum = 0.0L;
  for (double v : values) sum += v;
  d.mean = static_cast<double>(sum / static_cast<long double>(values.size()));
  d.min = values.front();
  d.q1 = quantile_sorted(values, 0.25);
  d.median = quantile_sorted(values, 0.5);
  d.q3 = quantile_sorted(values, 0.75);
  d.max = values.back();
  return d;
}

std::vector<Bin> histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return {};
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = *mn, hi = *mx;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<Bin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? (hi > lo ? hi : lo + width) : lo + width * static_cast<double>(b + 1);
  }
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

std::string format_fit(const econo::FitResult& fit, const std::string& title) {
  std::ostringstream s;
  s << title << "  [" << econo::to_string(fit.method) << ", n = " << fit.n_obs << "]\n";
  std::size_t w = 8;
  for (const auto& n : fit.names) w = std::max(w, n.size());
  s << std::left << std::setw(static_cast<int>(w)) << "term" << std::right << std::setw(14) << "coef"
    << std::setw(14) << "se" << std::setw(11) << "t" << std::setw(11) << "p" << '\n';
  for (std::size_t i = 0; i < fit.coef.size(); ++i)
    s << std::left << std::setw(static_cast<int>(w)) << fit.names[i] << std::right << std::setw(14)
      << io::format_fixed(fit.coef[i], 6) << std::setw(14) << io::format_fixed(fit.se[i], 6) << std::setw(11)
      << io::format_fixed(fit.t[i], 3) << std::setw(11) << io::format_fixed(fit.p[i], 4) << '\n';
  s << "R2 " << io::format_fixed(fit.r2, 4) << "  adj R2 " << io::format_fixed(fit.adj_r2, 4) << "  F "
    << io::format_fixed(fit.f_stat, 3) << " (p " << io::format_fixed(fit.f_p, 4) << ")";
  if (fit.method == econo::Method::TSLS) s << "  first-stage F " << io::format_fixed(fit.first_stage_f, 2);
  s << '\n';
  return s.str();
}

std::vector<std::string> coefficient_header(const std::vector<std::string>& label_columns) {
  auto h = label_columns;
  for (const char* c : {"term", "coef", "se", "t", "p", "n_obs", "r2", "adj_r2", "f_stat", "f_p"}) h.push_back(c);
  return h;
}

void append_coefficients(io::CsvWriter& w, const std::vector<std::string>& labels, const econo::FitResult& fit) {
  for (std::size_t i = 0; i < fit.coef.size(); ++i) {
    auto row = labels;
    for (const auto& v :
         {fit.names[i], io::format_number(fit.coef[i]), io::format_number(fit.se[i]), io::format_number(fit.t[i]),
          io::format_number(fit.p[i]), io::format_int(static_cast<std::int64_t>(fit.n_obs)),
          io::format_number(fit.r2), io::format_number(fit.adj_r2), io::format_number(fit.f_stat),
          io::format_number(fit.f_p)})
      row.push_back(v);
    w.row(row);
  }
}

namespace {

constexpr std::size_t kBins = 20;

struct Group {
  std::string spec_id, target, method;
  std::vector<const io::ResultRow*> rows;
};

std::vector<std::string> dist_fields(const Distribution& d) {
  return {io::format_int(static_cast<std::int64_t>(d.n)), io::format_number(d.mean), io::format_number(d.min),
          io::format_number(d.q1),  io::format_number(d.median), io::format_number(d.q3),
          io::format_number(d.max)};
}

std::string dist_line(const std::string& label, const Distribution& d, std::size_t w) {
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(w)) << label << std::right << std::setw(6) << d.n;
  for (double v : {d.mean, d.min, d.q1, d.median, d.q3, d.max}) s << std::setw(11) << io::format_fixed(v, 4);
  s << '\n';
  return s.str();
}

std::string dist_head(std::size_t w) {
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(w)) << "" << std::right << std::setw(6) << "n";
  for (const char* c : {"mean", "min", "Q1", "median", "Q3", "max"}) s << std::setw(11) << c;
  s << '\n';
  return s.str();
}

}  // namespace

std::vector<fs::path> write_report(const fs::path& run_dir) {
  const auto rows = io::read_results(run_dir / "results.csv");
  const auto dir = run_dir / "report";
  fs::create_directories(dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    io::write_file(dir / name, text);
    written.push_back(dir / name);
  };

  // Groups in order of first appearance.
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = r.spec_id + "|" + r.target;
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({r.spec_id, r.target, r.method, {}});
    }
    groups[it->second].rows.push_back(&r);
  }

  // Truth, when the run was simulated.
  std::map<std::string, std::pair<double, double>> truth;  // city -> (f, h)
  if (fs::exists(run_dir / "truth.csv")) {
    const auto t = io::read_csv(run_dir / "truth.csv");
    const auto ci = t.column("city_id"), fi = t.column("f_true"), hi = t.column("h_true");
    for (std::size_t i = 0; i < t.rows.size(); ++i) truth[t.rows[i][ci]] = {t.number(i, fi), t.number(i, hi)};
  }

  std::ostringstream summary_csv, hist_csv, r2_csv, skipped_csv, drops_csv, structural_csv;
  io::CsvWriter sw(summary_csv), hw(hist_csv), rw(r2_csv), kw(skipped_csv), dw(drops_csv), tw(structural_csv);
  sw.row({"spec_id", "target", "method", "quantity", "n", "mean", "min", "q1", "median", "q3", "max"});
  hw.row({"spec_id", "target", "quantity", "bin", "lo", "hi", "count"});
  rw.row({"spec_id", "target", "city_id", "r2", "ecdf"});
  kw.row({"city_id", "spec_id", "target", "skip_reason"});
  dw.row({"spec_id", "target", "reason", "cells"});
  tw.row({"spec_id", "quantity", "n", "mean", "min", "q1", "median", "q3", "max"});

  std::ostringstream text;
  text << "First-step gradients (ok fits)\n\n";
  const std::size_t w = 26;
  text << dist_head(w);
  std::size_t n_ok = 0, n_skipped = 0;
  for (const auto& g : groups) {
    std::vector<double> slope, r2, ratio;
    std::vector<std::pair<double, std::string>> r2_rows;
    std::map<std::string, std::size_t> drops;
    for (const auto* r : g.rows) {
      if (r->status == "ok") {
        ++n_ok;
        slope.push_back(r->slope);
        r2.push_back(r->r2);
        r2_rows.emplace_back(r->r2, r->city_id);
        const auto t = truth.find(r->city_id);
        if (t != truth.end()) ratio.push_back(r->slope / (g.target == "rent" ? t->second.first : t->second.second));
      } else {
        ++n_skipped;
        kw.row({r->city_id, r->spec_id, r->target, r->skip_reason});
      }
      std::stringstream reasons(r->drop_reasons);
      std::string item;
      while (std::getline(reasons, item, ';')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) continue;
        drops[item.substr(0, colon)] += std::stoull(item.substr(colon + 1));
      }
    }
    const auto ds = describe(slope), dr = describe(r2);
    auto line = std::vector<std::string>{g.spec_id, g.target, g.method, "slope"};
    for (const auto& f : dist_fields(ds)) line.push_back(f);
    sw.row(line);
    line = {g.spec_id, g.target, g.method, "r2"};
    for (const auto& f : dist_fields(dr)) line.push_back(f);
    sw.row(line);
    if (!ratio.empty()) {
      line = {g.spec_id, g.target, g.method, "slope_over_truth"};
      for (const auto& f : dist_fields(describe(ratio))) line.push_back(f);
      sw.row(line);
    }
    text << dist_line(g.spec_id + " " + g.target + " slope", ds, w);
    text << dist_line(g.spec_id + " " + g.target + " R2", dr, w);

    for (const auto& [name, values] : {std::pair{"slope", &slope}, std::pair{"r2", &r2}}) {
      const auto bins = histogram(*values, kBins);
      for (std::size_t b = 0; b < bins.size(); ++b)
        hw.row({g.spec_id, g.target, name, std::to_string(b), io::format_number(bins[b].lo),
                io::format_number(bins[b].hi), std::to_string(bins[b].count)});
    }
    std::sort(r2_rows.begin(), r2_rows.end());
    for (std::size_t i = 0; i < r2_rows.size(); ++i)
      rw.row({g.spec_id, g.target, r2_rows[i].second, io::format_number(r2_rows[i].first),
              io::format_number(static_cast<double>(i + 1) / static_cast<double>(r2_rows.size()))});
    for (const auto& [reason, cells] : drops) dw.row({g.spec_id, g.target, reason, std::to_string(cells)});
  }

  // Structural parameters, one value per city (taken from the rent row).
  text << "\nStructural parameters (valid recoveries)\n\n" << dist_head(w);
  for (const auto& g : groups) {
    if (g.target != "rent") continue;
    std::vector<double> b, a, k;
    for (const auto* r : g.rows)
      if (r->structural_valid && *r->structural_valid) {
        b.push_back(r->beta_hat);
        a.push_back(r->a_hat);
        k.push_back(r->b_hat);
      }
    if (b.empty()) continue;
    for (const auto& [name, values] : {std::pair{"beta_hat", &b}, std::pair{"a_hat", &a}, std::pair{"b_hat", &k}}) {
      const auto d = describe(*values);
      auto line = std::vector<std::string>{g.spec_id, name};
      for (const auto& f : dist_fields(d)) line.push_back(f);
      tw.row(line);
      text << dist_line(g.spec_id + " " + name, d, w);
    }
  }

  text << "\nRows: " << rows.size() << " (ok " << n_ok << ", skipped " << n_skipped << ")\n";
  if (fs::exists(run_dir / "checks.csv")) {
    const auto c = io::read_csv(run_dir / "checks.csv");
    text << "\nChecks\n\n";
    for (std::size_t i = 0; i < c.rows.size(); ++i)
      text << std::left << std::setw(22) << c.rows[i][0] << c.rows[i][1] << "  " << c.rows[i][2] << '\n';
  }

  emit("gradient_summary.csv", summary_csv.str());
  emit("structural_summary.csv", structural_csv.str());
  emit("histograms.csv", hist_csv.str());
  emit("r2_distribution.csv", r2_csv.str());
  emit("skipped.csv", skipped_csv.str());
  emit("drop_reasons.csv", drops_csv.str());
  emit("summary.txt", text.str());
  return written;
}

}  // namespace sumlab::report
