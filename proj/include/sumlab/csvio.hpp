#pragma once

// File schemas: grid, listing, meta sidecar, sampled travel times, city
// features and first-step results. Numbers use the shortest decimal that
// round-trips; missing values are empty fields.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sumlab/crosscity.hpp"
#include "sumlab/grid.hpp"
#include "sumlab/transport.hpp"

namespace sumlab::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal; empty for NaN.
std::string format_number(double v);
std::string format_fixed(double v, int decimals);
std::string format_int(std::int64_t v);

/// A parsed CSV file. `lines[i]` is the 1-based line where row i starts.
struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  /// Index of a header column; ParseError at line 1 when absent.
  std::size_t column(const std::string& name) const;
  /// Numeric field, NaN when empty; ParseError with the row's line otherwise.
  double number(std::size_t row, std::size_t col) const;
  std::int64_t integer(std::size_t row, std::size_t col) const;
};

/// RFC 4180 subset: comma separator, double-quoted fields, LF or CRLF endings.
CsvTable parse_csv(std::string_view text, const std::string& file_label);
CsvTable read_csv(const fs::path& path);
/// Checks the header equals `expected` exactly.
void require_header(const CsvTable& t, std::span<const std::string> expected);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) { row(std::span(fields.begin(), fields.size())); }

 private:
  std::ostream& out_;
};

/// Writes `text` to `path` through a temporary file and a rename.
void write_file(const fs::path& path, const std::string& text);
std::string read_file(const fs::path& path);

// ---- grids ----------------------------------------------------------------

extern const std::vector<std::string> kGridHeader;
extern const std::vector<std::string> kAdsHeader;
extern const std::vector<std::string> kTimeSampleHeader;

/// Paths of one city's files inside a directory.
struct CityFiles {
  fs::path grid;  // <id>.grid.csv
  fs::path meta;  // <id>.meta
  fs::path ads;   // <id>.ads.csv
  static CityFiles in(const fs::path& dir, const std::string& city_id);
  /// Sidecar paths next to a grid CSV.
  static CityFiles from_grid(const fs::path& grid_csv);
};

std::string grid_csv(const CityGrid& city);
std::string ads_csv(const CityGrid& city);
std::string meta_text(const CityGrid& city);

void write_city(const CityGrid& city, const fs::path& dir);
/// Reads a grid CSV with its meta sidecar and, when present, its listings.
CityGrid read_city(const fs::path& grid_csv_path);
CityGrid parse_city(const std::string& grid_text, const std::string& meta_text_, const std::string* ads_text,
                    const std::string& label);

// ---- sampled travel times -------------------------------------------------

struct TimeSample {
  std::int64_t cell_id = 0;
  transport::Mode mode = transport::Mode::Car;
  double hours = 0.0;
};

std::vector<TimeSample> read_time_samples(const fs::path& path);
std::vector<TimeSample> parse_time_samples(std::string_view text, const std::string& label);

/// Replaces the city's travel times by the samples, interpolated to every cell.
/// Throws DomainError for unknown cell ids.
void apply_time_samples(CityGrid& city, std::span<const TimeSample> samples,
                        transport::InterpolationScheme scheme = transport::InterpolationScheme::CloughTocher);

// ---- features -------------------------------------------------------------

extern const std::vector<std::string> kFeaturesHeader;

std::string features_csv(std::span<const cross::CityFeatures> rows);
std::vector<cross::CityFeatures> parse_features(std::string_view text, const std::string& label);
std::vector<cross::CityFeatures> read_features(const fs::path& path);

// ---- first-step results ---------------------------------------------------

extern const std::vector<std::string> kResultsHeader;

struct ResultRow {
  std::string city_id;
  std::string spec_id;
  std::string target;  // rent | density
  std::string method;  // OLS | 2SLS
  std::string status;  // ok | skipped
  double slope = kMissing;
  double se = kMissing;
  double t = kMissing;
  double p = kMissing;
  double r2 = kMissing;
  std::int64_t n_obs = 0;
  std::int64_t n_dropped = 0;
  std::string sign_class;
  double beta_hat = kMissing;
  double a_hat = kMissing;
  double b_hat = kMissing;
  std::optional<bool> structural_valid;
  double market_cover = kMissing;
  double spatial_cover = kMissing;
  std::string skip_reason;
  std::string drop_reasons;  // reason:count;...
};

std::string results_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> parse_results(std::string_view text, const std::string& label);
std::vector<ResultRow> read_results(const fs::path& path);

}  // namespace sumlab::io
