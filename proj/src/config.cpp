#include "sumlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "sumlab/csvio.hpp"
#include "sumlab/errors.hpp"
#include "sumlab/gradient.hpp"

namespace sumlab::config {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool to_double(const std::string& s, double& out) {
  const auto t = trim(s);
  if (t.empty()) return false;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  return r.ec == std::errc() && r.ptr == t.data() + t.size() && std::isfinite(out);
}

template <class Int>
bool to_integer(const std::string& s, Int& out) {
  const auto t = trim(s);
  if (t.empty()) return false;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Setter: returns an error message, or empty when the value was accepted.
using Setter = std::function<std::string(const std::string&)>;

Setter number(double& field) {
  return [&field](const std::string& v) -> std::string {
    return to_double(v, field) ? "" : "expected a number, got '" + trim(v) + "'";
  };
}

Setter range(Range& field) {
  return [&field](const std::string& v) -> std::string {
    const auto parts = split_list(v);
    Range r;
    if (parts.size() == 1 && to_double(parts[0], r.lo)) {
      r.hi = r.lo;
    } else if (parts.size() != 2 || !to_double(parts[0], r.lo) || !to_double(parts[1], r.hi)) {
      return "expected 'lo, hi' or a single number, got '" + trim(v) + "'";
    }
    field = r;
    return "";
  };
}

Setter boolean(bool& field) {
  return [&field](const std::string& v) -> std::string {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes") {
      field = true;
    } else if (t == "false" || t == "0" || t == "no") {
      field = false;
    } else {
      return "expected true or false, got '" + t + "'";
    }
    return "";
  };
}

template <class Int>
Setter integer(Int& field) {
  return [&field](const std::string& v) -> std::string {
    return to_integer(v, field) ? "" : "expected a non-negative integer, got '" + trim(v) + "'";
  };
}

std::map<std::string, std::map<std::string, Setter>> schema(RunConfig& c) {
  std::map<std::string, std::map<std::string, Setter>> s;
  s["run"] = {
      {"seed", integer(c.seed)},
      {"cities", integer(c.cities)},
      {"out", [&c](const std::string& v) -> std::string {
         c.out = trim(v);
         return c.out.empty() ? "expected a path" : "";
       }},
  };
  s["city"] = {
      {"beta", range(c.beta)},
      {"a_land", range(c.a_land)},
      {"income", range(c.income)},
      {"population", range(c.population)},
      {"farm_rent", range(c.farm_rent)},
      {"fuel_price", range(c.fuel_price)},
      {"commuting_speed", range(c.commuting_speed)},
      {"tfp", number(c.tfp)},
      {"high_income_threshold", number(c.high_income_threshold)},
  };
  s["grid"] = {{"fringe_cells", number(c.fringe_cells)}};
  s["noise"] = {
      {"sigma_rent", number(c.noise.sigma_rent)},
      {"sigma_density", number(c.noise.sigma_density)},
      {"ad_rate", number(c.noise.ad_rate)},
      {"mask_rate", number(c.noise.mask_rate)},
      {"full_rent_coverage", boolean(c.noise.full_rent_coverage)},
      {"congestion_sigma", number(c.noise.congestion_sigma)},
      {"congestion_rent_loading", number(c.noise.congestion_rent_loading)},
      {"ad_size_sigma", number(c.noise.ad_size_sigma)},
      {"ad_rent_sigma", number(c.noise.ad_rent_sigma)},
  };
  s["transport"] = {
      {"cost_model", [&c](const std::string& v) -> std::string {
         const auto t = trim(v);
         if (t == "modal") {
           c.cost_kind = CostKind::Modal;
         } else if (t == "linear") {
           c.cost_kind = CostKind::Linear;
         } else {
           return "expected modal or linear, got '" + t + "'";
         }
         return "";
       }},
      {"transit_speed_ratio", number(c.transit_speed_ratio)},
      {"transit_wait_h", number(c.transit_wait_h)},
      {"car_detour", number(c.car_detour)},
      {"fuel_efficiency", number(c.fuel_efficiency)},
      {"transit_fare", number(c.transit_fare)},
      {"trips_per_period", number(c.trips_per_period)},
      {"sample_fraction", number(c.sample_fraction)},
      {"interpolation", [&c](const std::string& v) -> std::string {
         const auto t = trim(v);
         if (t == "clough-tocher") {
           c.scheme = transport::InterpolationScheme::CloughTocher;
         } else if (t == "linear") {
           c.scheme = transport::InterpolationScheme::Linear;
         } else {
           return "expected clough-tocher or linear, got '" + t + "'";
         }
         return "";
       }},
  };
  s["estimation"] = {
      {"specs", [&c](const std::string& v) -> std::string {
         c.specs = split_list(v);
         return "";
       }},
      {"min_obs", integer(c.min_obs)},
      {"reference", [&c](const std::string& v) -> std::string {
         try {
           c.reference = cross::parse_continent(trim(v));
         } catch (const DomainError& e) {
           return e.what();
         }
         return "";
       }},
      {"min_cities", integer(c.min_cities)},
  };
  s["checks"] = {
      {"gradient_tolerance", number(c.gradient_tolerance)},
      {"structural_tolerance", number(c.structural_tolerance)},
  };
  return s;
}

void check_range(std::vector<std::string>& problems, const std::string& key, const Range& r, double min_lo,
                 bool strict_lo, double max_hi = INFINITY, bool strict_hi = false) {
  const bool lo_ok = strict_lo ? r.lo > min_lo : r.lo >= min_lo;
  const bool hi_ok = strict_hi ? r.hi < max_hi : r.hi <= max_hi;
  if (!(r.lo <= r.hi)) problems.push_back(key + ": lower bound exceeds upper bound");
  if (!lo_ok || !hi_ok) {
    std::ostringstream m;
    m << key << ": values must lie in " << (strict_lo ? "(" : "[") << min_lo << ", " << max_hi
      << (strict_hi ? ")" : "]");
    problems.push_back(m.str());
  }
}

std::string range_text(const Range& r) { return io::format_number(r.lo) + ", " + io::format_number(r.hi); }

}  // namespace

fs::path RunConfig::out_dir() const {
  if (out.is_absolute() || source.empty()) return out;
  return source.parent_path() / out;
}

void RunConfig::validate() const {
  std::vector<std::string> p;
  if (cities < 1) p.push_back("run.cities: must be >= 1");
  if (cities > 100000) p.push_back("run.cities: at most 100000");
  {
    const auto dir = out_dir();
    const auto parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
    std::error_code ec;
    if (fs::exists(dir, ec) && !fs::is_directory(dir, ec))
      p.push_back("run.out: '" + dir.string() + "' exists and is not a directory");
    else if (!parent.empty() && !fs::is_directory(parent, ec))
      p.push_back("run.out: parent directory '" + parent.string() + "' does not exist");
  }
  check_range(p, "city.beta", beta, 0.0, true, 1.0, true);
  check_range(p, "city.a_land", a_land, 0.0, true, 1.0, true);
  check_range(p, "city.income", income, 0.0, true);
  check_range(p, "city.population", population, 0.0, true);
  check_range(p, "city.farm_rent", farm_rent, 0.0, true);
  check_range(p, "city.fuel_price", fuel_price, 0.0, false);
  check_range(p, "city.commuting_speed", commuting_speed, 0.0, true);
  if (!(tfp > 0.0)) p.push_back("city.tfp: must be > 0");
  if (!(high_income_threshold > 0.0)) p.push_back("city.high_income_threshold: must be > 0");
  if (!(fringe_cells >= 2.0 && fringe_cells <= 200.0)) p.push_back("grid.fringe_cells: must lie in [2, 200]");
  auto nonneg = [&p](const std::string& key, double v) {
    if (!(v >= 0.0)) p.push_back(key + ": must be >= 0");
  };
  nonneg("noise.sigma_rent", noise.sigma_rent);
  nonneg("noise.sigma_density", noise.sigma_density);
  nonneg("noise.ad_rate", noise.ad_rate);
  if (!(noise.mask_rate >= 0.0 && noise.mask_rate < 1.0)) p.push_back("noise.mask_rate: must lie in [0, 1)");
  nonneg("noise.congestion_sigma", noise.congestion_sigma);
  nonneg("noise.congestion_rent_loading", noise.congestion_rent_loading);
  nonneg("noise.ad_size_sigma", noise.ad_size_sigma);
  nonneg("noise.ad_rent_sigma", noise.ad_rent_sigma);
  if (!(transit_speed_ratio > 0.0)) p.push_back("transport.transit_speed_ratio: must be > 0");
  nonneg("transport.transit_wait_h", transit_wait_h);
  if (!(car_detour >= 1.0)) p.push_back("transport.car_detour: must be >= 1");
  nonneg("transport.fuel_efficiency", fuel_efficiency);
  nonneg("transport.transit_fare", transit_fare);
  if (!(trips_per_period > 0.0)) p.push_back("transport.trips_per_period: must be > 0");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) p.push_back("transport.sample_fraction: must lie in (0, 1]");
  for (const auto& id : specs) {
    try {
      gradient::spec_by_id(id);
    } catch (const DomainError& e) {
      p.push_back(std::string("estimation.specs: ") + e.what());
    }
  }
  if (!specs.empty() && std::find(specs.begin(), specs.end(), "main") == specs.end())
    p.push_back("estimation.specs: must include main (the checks and the second step use it)");
  if (min_obs < 3) p.push_back("estimation.min_obs: must be >= 3");
  if (min_cities < 2) p.push_back("estimation.min_cities: must be >= 2");
  if (!(gradient_tolerance > 0.0)) p.push_back("checks.gradient_tolerance: must be > 0");
  if (!(structural_tolerance > 0.0)) p.push_back("checks.structural_tolerance: must be > 0");
  if (!p.empty()) throw ConfigError(p);
}

RunConfig parse(const std::string& text, const fs::path& source) {
  pt::ptree tree;
  const std::string label = source.empty() ? "<config>" : source.string();
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(label, e.line(), e.message());
  }

  RunConfig c;
  c.source = source;
  std::vector<std::string> problems;
  auto table = schema(c);
  for (const auto& [section, body] : tree) {
    const auto it = table.find(section);
    if (it == table.end()) {
      if (!body.data().empty())
        problems.push_back(section + ": keys must belong to a section");
      else
        problems.push_back("[" + section + "]: unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      const auto kt = it->second.find(key);
      if (kt == it->second.end()) {
        problems.push_back(section + "." + key + ": unknown key");
        continue;
      }
      const auto err = kt->second(value.data());
      if (!err.empty()) problems.push_back(section + "." + key + ": " + err);
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  c.validate();
  return c;
}

RunConfig load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError({"config file '" + path.string() + "' not found"});
  return parse(io::read_file(path), path);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream s;
  auto n = [](double v) { return io::format_number(v); };
  s << "[run]\nseed = " << c.seed << "\ncities = " << c.cities << "\nout = " << c.out.string() << "\n\n";
  s << "[city]\nbeta = " << range_text(c.beta) << "\na_land = " << range_text(c.a_land)
    << "\nincome = " << range_text(c.income) << "\npopulation = " << range_text(c.population)
    << "\nfarm_rent = " << range_text(c.farm_rent) << "\nfuel_price = " << range_text(c.fuel_price)
    << "\ncommuting_speed = " << range_text(c.commuting_speed) << "\ntfp = " << n(c.tfp)
    << "\nhigh_income_threshold = " << n(c.high_income_threshold) << "\n\n";
  s << "[grid]\nfringe_cells = " << n(c.fringe_cells) << "\n\n";
  s << "[noise]\nsigma_rent = " << n(c.noise.sigma_rent) << "\nsigma_density = " << n(c.noise.sigma_density)
    << "\nad_rate = " << n(c.noise.ad_rate) << "\nmask_rate = " << n(c.noise.mask_rate)
    << "\nfull_rent_coverage = " << (c.noise.full_rent_coverage ? "true" : "false")
    << "\ncongestion_sigma = " << n(c.noise.congestion_sigma)
    << "\ncongestion_rent_loading = " << n(c.noise.congestion_rent_loading)
    << "\nad_size_sigma = " << n(c.noise.ad_size_sigma) << "\nad_rent_sigma = " << n(c.noise.ad_rent_sigma)
    << "\n\n";
  s << "[transport]\ncost_model = " << (c.cost_kind == CostKind::Modal ? "modal" : "linear")
    << "\ntransit_speed_ratio = " << n(c.transit_speed_ratio) << "\ntransit_wait_h = " << n(c.transit_wait_h)
    << "\ncar_detour = " << n(c.car_detour) << "\nfuel_efficiency = " << n(c.fuel_efficiency)
    << "\ntransit_fare = " << n(c.transit_fare) << "\ntrips_per_period = " << n(c.trips_per_period)
    << "\nsample_fraction = " << n(c.sample_fraction) << "\ninterpolation = "
    << (c.scheme == transport::InterpolationScheme::CloughTocher ? "clough-tocher" : "linear") << "\n\n";
  s << "[estimation]\nspecs = ";
  for (std::size_t i = 0; i < c.specs.size(); ++i) s << (i ? ", " : "") << c.specs[i];
  s << "\nmin_obs = " << c.min_obs << "\nreference = " << cross::to_string(c.reference)
    << "\nmin_cities = " << c.min_cities << "\n\n";
  s << "[checks]\ngradient_tolerance = " << n(c.gradient_tolerance)
    << "\nstructural_tolerance = " << n(c.structural_tolerance) << "\n";
  return s.str();
}

}  // namespace sumlab::config
