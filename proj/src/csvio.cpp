#include "sumlab/csvio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "sumlab/errors.hpp"

namespace sumlab::io {

namespace {

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return kMissing;
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

transport::Mode parse_mode(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "car") return transport::Mode::Car;
  if (s == "transit") return transport::Mode::Transit;
  throw ParseError(file, line, "unknown mode '" + s + "' (expected car or transit)");
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::pair<std::string, std::size_t>> parse_keyvalues(std::string_view text,
                                                                           const std::string& file) {
  std::map<std::string, std::pair<std::string, std::size_t>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(file, line_no, "expected key=value");
    const auto key = line.substr(0, eq);
    if (out.count(key)) throw ParseError(file, line_no, "duplicate key '" + key + "'");
    out[key] = {line.substr(eq + 1), line_no};
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 128> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
  std::string s(buf.data(), r.ptr);
  // "-0.000" reads as a sign that is not there.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_int(std::int64_t v) { return std::to_string(v); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw ParseError(file, 1, "missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const auto& s = rows[row][col];
  const auto v = to_double(s);
  if (!v) throw ParseError(file, lines[row], "column '" + header[col] + "': not a number: '" + s + "'");
  return *v;
}

std::int64_t CsvTable::integer(std::size_t row, std::size_t col) const {
  const auto& s = rows[row][col];
  const auto v = to_int(s);
  if (!v) throw ParseError(file, lines[row], "column '" + header[col] + "': not an integer: '" + s + "'");
  return *v;
}

CsvTable parse_csv(std::string_view text, const std::string& file_label) {
  CsvTable t;
  t.file = file_label;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1, record_line = 1;
  bool in_quotes = false, field_quoted = false, any = false;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    if (t.header.empty() && t.rows.empty() && t.lines.empty() && !any) {
      t.header = std::move(record);
      any = true;
    } else {
      if (record.size() != t.header.size())
        throw ParseError(file_label, record_line,
                         "expected " + std::to_string(t.header.size()) + " fields, found " +
                             std::to_string(record.size()));
      t.rows.push_back(std::move(record));
      t.lines.push_back(record_line);
    }
    record.clear();
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  bool at_record_start = true;
  while (i < n) {
    const char c = text[i];
    if (at_record_start) {
      record_line = line;
      at_record_start = false;
      // Blank lines are skipped.
      if (c == '\n' || (c == '\r' && i + 1 < n && text[i + 1] == '\n')) {
        i += c == '\r' ? 2 : 1;
        ++line;
        at_record_start = true;
        continue;
      }
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw ParseError(file_label, line, "unexpected character after closing quote");
        continue;
      }
      if (c == '\n') ++line;
      field += c;
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty() || field_quoted) throw ParseError(file_label, line, "quote inside an unquoted field");
      in_quotes = true;
      field_quoted = true;
      ++i;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_quoted = false;
      ++i;
    } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
      at_record_start = true;
    } else if (c == '\n') {
      end_record();
      ++i;
      ++line;
      at_record_start = true;
    } else {
      field += c;
      ++i;
    }
  }
  if (in_quotes) throw ParseError(file_label, record_line, "unterminated quoted field");
  if (!at_record_start) end_record();
  if (t.header.empty()) throw ParseError(file_label, 1, "empty file (no header)");
  return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

void require_header(const CsvTable& t, std::span<const std::string> expected) {
  bool same = t.header.size() == expected.size();
  for (std::size_t j = 0; same && j < expected.size(); ++j) same = t.header[j] == expected[j];
  if (same) return;
  std::string want;
  for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
  throw ParseError(t.file, 1, "header must be: " + want);
}

void CsvWriter::row(std::span<const std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out_ << ',';
    first = false;
    if (needs_quotes(f)) {
      out_ << '"';
      for (char c : f) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    } else {
      out_ << f;
    }
  }
  out_ << '\n';
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- grids ----------------------------------------------------------------

const std::vector<std::string> kGridHeader = {
    "city_id",    "cell_id",       "x_km",      "y_km",        "dist_km",       "land_share",    "population",
    "rent_m2",    "dwelling_m2",   "time_car_h", "time_transit_h", "dist_car_km", "n_ads"};
const std::vector<std::string> kAdsHeader = {"city_id", "cell_id", "total_rent", "size_m2"};
const std::vector<std::string> kTimeSampleHeader = {"cell_id", "mode", "hours"};

CityFiles CityFiles::in(const fs::path& dir, const std::string& city_id) {
  return {dir / (city_id + ".grid.csv"), dir / (city_id + ".meta"), dir / (city_id + ".ads.csv")};
}

CityFiles CityFiles::from_grid(const fs::path& grid_csv_path) {
  std::string name = grid_csv_path.filename().string();
  const std::string suffix = ".grid.csv";
  std::string stem = name.size() > suffix.size() && name.ends_with(suffix)
                         ? name.substr(0, name.size() - suffix.size())
                         : grid_csv_path.stem().string();
  const auto dir = grid_csv_path.parent_path();
  return {grid_csv_path, dir / (stem + ".meta"), dir / (stem + ".ads.csv")};
}

std::string grid_csv(const CityGrid& city) {
  std::ostringstream s;
  CsvWriter w(s);
  w.row(kGridHeader);
  for (const auto& c : city.cells)
    w.row({city.city_id, format_int(c.id), format_number(c.x), format_number(c.y), format_number(c.dist),
           format_number(c.land_share), format_number(c.population), format_number(c.rent),
           format_number(c.dwelling_size), format_number(c.time_car), format_number(c.time_transit),
           format_number(c.dist_car), format_int(c.n_ads)});
  return s.str();
}

std::string ads_csv(const CityGrid& city) {
  std::ostringstream s;
  CsvWriter w(s);
  w.row(kAdsHeader);
  for (const auto& a : city.ads)
    w.row({city.city_id, format_int(a.cell_id), format_number(a.total_rent), format_number(a.size)});
  return s.str();
}

std::string meta_text(const CityGrid& city) {
  const auto& m = city.cost_model;
  std::ostringstream s;
  s << "# city grid metadata\n";
  s << "city_id=" << city.city_id << '\n';
  s << "cell_size=" << format_number(city.spec.cell_size) << '\n';
  s << "radius=" << format_number(city.spec.radius) << '\n';
  s << "center_x=" << format_number(city.spec.center_x) << '\n';
  s << "center_y=" << format_number(city.spec.center_y) << '\n';
  s << "seed=" << city.spec.seed << '\n';
  s << "income=" << format_number(city.income) << '\n';
  s << "cost_model=" << (m.kind == transport::CostModel::Kind::Linear ? "linear" : "modal") << '\n';
  s << "t_per_km=" << format_number(m.t_per_km) << '\n';
  s << "wage=" << format_number(m.params.wage) << '\n';
  s << "fuel_price=" << format_number(m.params.fuel_price) << '\n';
  s << "fuel_efficiency=" << format_number(m.params.fuel_efficiency) << '\n';
  s << "transit_fare=" << format_number(m.params.transit_fare) << '\n';
  s << "trips_per_period=" << format_number(m.params.trips_per_period) << '\n';
  return s.str();
}

void write_city(const CityGrid& city, const fs::path& dir) {
  const auto files = CityFiles::in(dir, city.city_id);
  write_file(files.grid, grid_csv(city));
  write_file(files.meta, meta_text(city));
  write_file(files.ads, ads_csv(city));
}

CityGrid parse_city(const std::string& grid_text, const std::string& meta, const std::string* ads_text,
                    const std::string& label) {
  CityGrid city;
  const std::string meta_label = label + " (meta)";
  auto kv = parse_keyvalues(meta, meta_label);
  auto take = [&](const std::string& key) -> std::pair<std::string, std::size_t> {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(meta_label, 1, "missing key '" + key + "'");
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const std::string& key) {
    const auto [s, line] = take(key);
    const auto v = to_double(s);
    if (!v || s.empty()) throw ParseError(meta_label, line, "key '" + key + "': not a number: '" + s + "'");
    return *v;
  };
  city.city_id = take("city_id").first;
  city.spec.cell_size = num("cell_size");
  city.spec.radius = num("radius");
  city.spec.center_x = num("center_x");
  city.spec.center_y = num("center_y");
  {
    const auto [s, line] = take("seed");
    std::uint64_t seed = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw ParseError(meta_label, line, "key 'seed': not an unsigned integer");
    city.spec.seed = seed;
  }
  city.income = num("income");
  const auto [kind, kind_line] = take("cost_model");
  if (kind == "linear")
    city.cost_model.kind = transport::CostModel::Kind::Linear;
  else if (kind == "modal")
    city.cost_model.kind = transport::CostModel::Kind::Modal;
  else
    throw ParseError(meta_label, kind_line, "cost_model must be linear or modal");
  city.cost_model.t_per_km = num("t_per_km");
  city.cost_model.params.wage = num("wage");
  city.cost_model.params.fuel_price = num("fuel_price");
  city.cost_model.params.fuel_efficiency = num("fuel_efficiency");
  city.cost_model.params.transit_fare = num("transit_fare");
  city.cost_model.params.trips_per_period = num("trips_per_period");
  if (!kv.empty()) throw ParseError(meta_label, kv.begin()->second.second, "unknown key '" + kv.begin()->first + "'");
  try {
    city.spec.validate();
  } catch (const DomainError& e) {
    throw ParseError(meta_label, 1, e.what());
  }

  const auto t = parse_csv(grid_text, label);
  require_header(t, kGridHeader);
  const double h = city.spec.cell_size;
  const double area = city.cell_area();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0] != city.city_id)
      throw ParseError(label, t.lines[i], "city_id '" + t.rows[i][0] + "' does not match meta '" + city.city_id + "'");
    CellRecord c;
    c.id = t.integer(i, 1);
    c.x = t.number(i, 2);
    c.y = t.number(i, 3);
    c.dist = t.number(i, 4);
    c.land_share = t.number(i, 5);
    c.population = t.number(i, 6);
    c.rent = t.number(i, 7);
    c.dwelling_size = t.number(i, 8);
    c.time_car = t.number(i, 9);
    c.time_transit = t.number(i, 10);
    c.dist_car = t.number(i, 11);
    c.n_ads = t.integer(i, 12);
    for (double v : {c.x, c.y, c.dist, c.land_share, c.population})
      if (is_missing(v)) throw ParseError(label, t.lines[i], "x_km, y_km, dist_km, land_share and population are required");
    if (c.land_share < 0.0 || c.land_share > 1.0) throw ParseError(label, t.lines[i], "land_share must lie in [0, 1]");
    if (c.population < 0.0) throw ParseError(label, t.lines[i], "population must be >= 0");
    if (c.n_ads < 0) throw ParseError(label, t.lines[i], "n_ads must be >= 0");
    c.ix = static_cast<std::int64_t>(std::llround((c.x - city.spec.center_x) / h));
    c.iy = static_cast<std::int64_t>(std::llround((c.y - city.spec.center_y) / h));
    c.density = c.land_share > 0.0 ? c.population / (c.land_share * area) : kMissing;
    const auto cost = transport::cell_cost(city.cost_model, c.dist, c.dist_car, c.time_car, c.time_transit);
    c.gen_cost = cost ? cost->cost : kMissing;
    city.cells.push_back(c);
  }

  if (ads_text) {
    const std::string ads_label = label + " (ads)";
    const auto a = parse_csv(*ads_text, ads_label);
    require_header(a, kAdsHeader);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      if (a.rows[i][0] != city.city_id)
        throw ParseError(ads_label, a.lines[i], "city_id does not match meta '" + city.city_id + "'");
      RentAd ad{a.integer(i, 1), a.number(i, 2), a.number(i, 3)};
      if (!(ad.size > 0.0) || is_missing(ad.total_rent))
        throw ParseError(ads_label, a.lines[i], "listings need a rent and a positive size");
      city.ads.push_back(ad);
    }
  }
  return city;
}

CityGrid read_city(const fs::path& grid_csv_path) {
  const auto files = CityFiles::from_grid(grid_csv_path);
  const auto grid_text = read_file(files.grid);
  if (!fs::exists(files.meta))
    throw ParseError(files.meta.string(), 0, "meta sidecar not found next to " + files.grid.string());
  const auto meta = read_file(files.meta);
  std::optional<std::string> ads;
  if (fs::exists(files.ads)) ads = read_file(files.ads);
  return parse_city(grid_text, meta, ads ? &*ads : nullptr, files.grid.string());
}

// ---- sampled travel times -------------------------------------------------

std::vector<TimeSample> parse_time_samples(std::string_view text, const std::string& label) {
  const auto t = parse_csv(text, label);
  require_header(t, kTimeSampleHeader);
  std::vector<TimeSample> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    TimeSample s;
    s.cell_id = t.integer(i, 0);
    s.mode = parse_mode(t.rows[i][1], label, t.lines[i]);
    s.hours = t.number(i, 2);
    if (!(s.hours >= 0.0) || !std::isfinite(s.hours))
      throw ParseError(label, t.lines[i], "hours must be a finite value >= 0");
    out.push_back(s);
  }
  return out;
}

std::vector<TimeSample> read_time_samples(const fs::path& path) {
  return parse_time_samples(read_file(path), path.string());
}

void apply_time_samples(CityGrid& city, std::span<const TimeSample> samples,
                        transport::InterpolationScheme scheme) {
  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < city.cells.size(); ++i) index[city.cells[i].id] = i;
  const auto lattice = city.lattice();
  for (auto mode : {transport::Mode::Car, transport::Mode::Transit}) {
    std::map<std::size_t, double> by_cell;
    for (const auto& s : samples) {
      if (s.mode != mode) continue;
      const auto it = index.find(s.cell_id);
      if (it == index.end()) throw DomainError("time sample for unknown cell id " + std::to_string(s.cell_id));
      by_cell[it->second] = s.hours;
    }
    auto field = [mode](CellRecord& c) -> double& { return mode == transport::Mode::Car ? c.time_car : c.time_transit; };
    if (by_cell.empty()) {
      for (auto& c : city.cells) field(c) = kMissing;
      continue;
    }
    transport::SampledField sf;
    for (const auto& [i, v] : by_cell) {
      sf.cell_index.push_back(i);
      sf.points.push_back(lattice[i]);
      sf.values.push_back(v);
    }
    sf.coverage_fraction = static_cast<double>(by_cell.size()) / static_cast<double>(city.cells.size());
    const auto interp = transport::interpolate_field(sf, lattice, scheme);
    for (std::size_t i = 0; i < city.cells.size(); ++i) field(city.cells[i]) = std::max(0.0, interp.values[i]);
    for (const auto& [i, v] : by_cell) field(city.cells[i]) = v;
  }
  for (auto& c : city.cells) {
    const auto cost = transport::cell_cost(city.cost_model, c.dist, c.dist_car, c.time_car, c.time_transit);
    c.gen_cost = cost ? cost->cost : kMissing;
  }
}

// ---- features -------------------------------------------------------------

const std::vector<std::string> kFeaturesHeader = {
    "city_id",   "population", "income",       "farm_rent",  "fuel_price",   "commuting_speed",
    "monocentricity", "coastal", "gini",       "informal_pct", "regulatory", "continent",
    "income_group", "market_cover", "spatial_cover", "area_km2"};

std::string features_csv(std::span<const cross::CityFeatures> rows) {
  std::ostringstream s;
  CsvWriter w(s);
  w.row(kFeaturesHeader);
  for (const auto& f : rows)
    w.row({f.city_id, format_number(f.population), format_number(f.income), format_number(f.farm_rent),
           format_number(f.fuel_price), format_number(f.commuting_speed), format_number(f.monocentricity),
           format_number(f.coastal), format_number(f.gini), format_number(f.informal_pct),
           format_number(f.regulatory), cross::to_string(f.continent), cross::to_string(f.income_group),
           format_number(f.market_cover), format_number(f.spatial_cover), format_number(f.area_km2)});
  return s.str();
}

std::vector<cross::CityFeatures> parse_features(std::string_view text, const std::string& label) {
  const auto t = parse_csv(text, label);
  require_header(t, kFeaturesHeader);
  std::vector<cross::CityFeatures> out;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    cross::CityFeatures f;
    f.city_id = t.rows[i][0];
    if (f.city_id.empty()) throw ParseError(label, t.lines[i], "empty city_id");
    if (seen.count(f.city_id))
      throw ParseError(label, t.lines[i], "duplicate city_id '" + f.city_id + "' (first on line " +
                                              std::to_string(seen[f.city_id]) + ")");
    seen[f.city_id] = t.lines[i];
    f.population = t.number(i, 1);
    f.income = t.number(i, 2);
    f.farm_rent = t.number(i, 3);
    f.fuel_price = t.number(i, 4);
    f.commuting_speed = t.number(i, 5);
    f.monocentricity = t.number(i, 6);
    f.coastal = t.number(i, 7);
    f.gini = t.number(i, 8);
    f.informal_pct = t.number(i, 9);
    f.regulatory = t.number(i, 10);
    try {
      f.continent = cross::parse_continent(t.rows[i][11]);
      f.income_group = cross::parse_income_group(t.rows[i][12]);
      f.market_cover = t.number(i, 13);
      f.spatial_cover = t.number(i, 14);
      f.area_km2 = t.number(i, 15);
      f.validate();
    } catch (const DomainError& e) {
      throw ParseError(label, t.lines[i], e.what());
    }
    out.push_back(f);
  }
  return out;
}

std::vector<cross::CityFeatures> read_features(const fs::path& path) {
  return parse_features(read_file(path), path.string());
}

// ---- first-step results ---------------------------------------------------

const std::vector<std::string> kResultsHeader = {
    "city_id", "spec_id",  "target",   "method", "status", "slope",    "se",
    "t",       "p",        "r2",       "n_obs",  "n_dropped", "sign_class", "beta_hat",
    "a_hat",   "b_hat",    "structural_valid", "market_cover", "spatial_cover", "skip_reason", "drop_reasons"};

std::string results_csv(std::span<const ResultRow> rows) {
  std::ostringstream s;
  CsvWriter w(s);
  w.row(kResultsHeader);
  for (const auto& r : rows)
    w.row({r.city_id, r.spec_id, r.target, r.method, r.status, format_number(r.slope), format_number(r.se),
           format_number(r.t), format_number(r.p), format_number(r.r2), format_int(r.n_obs),
           format_int(r.n_dropped), r.sign_class, format_number(r.beta_hat), format_number(r.a_hat),
           format_number(r.b_hat), r.structural_valid ? (*r.structural_valid ? "1" : "0") : "",
           format_number(r.market_cover), format_number(r.spatial_cover), r.skip_reason, r.drop_reasons});
  return s.str();
}

std::vector<ResultRow> parse_results(std::string_view text, const std::string& label) {
  const auto t = parse_csv(text, label);
  require_header(t, kResultsHeader);
  std::vector<ResultRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    ResultRow r;
    r.city_id = f[0];
    r.spec_id = f[1];
    r.target = f[2];
    r.method = f[3];
    r.status = f[4];
    if (r.target != "rent" && r.target != "density")
      throw ParseError(label, t.lines[i], "target must be rent or density");
    if (r.method != "OLS" && r.method != "2SLS") throw ParseError(label, t.lines[i], "method must be OLS or 2SLS");
    if (r.status != "ok" && r.status != "skipped") throw ParseError(label, t.lines[i], "status must be ok or skipped");
    r.slope = t.number(i, 5);
    r.se = t.number(i, 6);
    r.t = t.number(i, 7);
    r.p = t.number(i, 8);
    r.r2 = t.number(i, 9);
    r.n_obs = t.integer(i, 10);
    r.n_dropped = t.integer(i, 11);
    r.sign_class = f[12];
    r.beta_hat = t.number(i, 13);
    r.a_hat = t.number(i, 14);
    r.b_hat = t.number(i, 15);
    if (f[16] == "1")
      r.structural_valid = true;
    else if (f[16] == "0")
      r.structural_valid = false;
    else if (!f[16].empty())
      throw ParseError(label, t.lines[i], "structural_valid must be 1, 0 or empty");
    r.market_cover = t.number(i, 17);
    r.spatial_cover = t.number(i, 18);
    r.skip_reason = f[19];
    r.drop_reasons = f[20];
    if (r.status == "ok" && is_missing(r.slope)) throw ParseError(label, t.lines[i], "fitted row without a slope");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRow> read_results(const fs::path& path) { return parse_results(read_file(path), path.string()); }

}  // namespace sumlab::io
