#pragma once

// Summary tables and plot-ready files of a run directory.

#include <filesystem>
#include <string>
#include <vector>

#include "sumlab/csvio.hpp"
#include "sumlab/econo.hpp"

namespace sumlab::report {

namespace fs = std::filesystem;

/// Linear-interpolation quantile of sorted data (h = (n − 1)p).
double quantile_sorted(const std::vector<double>& sorted, double p);

struct Distribution {
  std::size_t n = 0;
  double mean = kMissing;
  double min = kMissing;
  double q1 = kMissing;
  double median = kMissing;
  double q3 = kMissing;
  double max = kMissing;
};

/// Non-finite values are ignored.
Distribution describe(std::vector<double> values);

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max] of the finite values; the last bin is closed.
std::vector<Bin> histogram(const std::vector<double>& values, std::size_t bins);

/// Coefficient table of one fit as fixed-width text.
std::string format_fit(const econo::FitResult& fit, const std::string& title);

/// Header of coefficient CSVs; the leading label columns are supplied by the caller.
std::vector<std::string> coefficient_header(const std::vector<std::string>& label_columns);
/// One row per coefficient: labels, term, coef, se, t, p, n_obs, r2, adj_r2, f_stat, f_p.
void append_coefficients(io::CsvWriter& w, const std::vector<std::string>& labels, const econo::FitResult& fit);

/// Reads results.csv (and truth.csv, checks.csv when present) from `run_dir`
/// and writes the tables under run_dir/report. Returns the files written.
std::vector<fs::path> write_report(const fs::path& run_dir);

}  // namespace sumlab::report
