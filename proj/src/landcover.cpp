#include "sumlab/landcover.hpp"

#include <algorithm>
#include <map>

#include "sumlab/errors.hpp"

namespace sumlab::landcover {

namespace {

struct Entry {
  std::string label;
  LandClass cls;
};

const std::map<int, Entry>& table() {
  using enum LandClass;
  static const std::map<int, Entry> t = {
      {10, {"Cropland, rainfed", Urbanizable}},
      {11, {"Herbaceous cover", Urbanizable}},
      {12, {"Tree or shrub cover", Urbanizable}},
      {20, {"Cropland, irrigated or post-flooding", Urbanizable}},
      {30, {"Mosaic cropland (>50%) / natural vegetation (<50%)", Urbanizable}},
      {40, {"Mosaic natural vegetation (>50%) / cropland (<50%)", Urbanizable}},
      {50, {"Tree cover, broadleaved, evergreen, closed to open (>15%)", Urbanizable}},
      {60, {"Tree cover, broadleaved, deciduous, closed to open (>15%)", Urbanizable}},
      {61, {"Tree cover, broadleaved, deciduous, closed (>40%)", Urbanizable}},
      {62, {"Tree cover, broadleaved, deciduous, open (15-40%)", Urbanizable}},
      {70, {"Tree cover, needleleaved, evergreen, closed to open (>15%)", Urbanizable}},
      {71, {"Tree cover, needleleaved, evergreen, closed (>40%)", Urbanizable}},
      {72, {"Tree cover, needleleaved, evergreen, open (15-40%)", Urbanizable}},
      {80, {"Tree cover, needleleaved, deciduous, closed to open (>15%)", Urbanizable}},
      {81, {"Tree cover, needleleaved, deciduous, closed (>40%)", Urbanizable}},
      {82, {"Tree cover, needleleaved, deciduous, open (15-40%)", Urbanizable}},
      {90, {"Tree cover, mixed leaf type", Urbanizable}},
      {100, {"Mosaic tree and shrub (>50%) / herbaceous cover (<50%)", Urbanizable}},
      {110, {"Mosaic herbaceous cover (>50%) / tree and shrub (<50%)", Urbanizable}},
      {120, {"Shrubland", Urbanizable}},
      {121, {"Evergreen shrubland", Urbanizable}},
      {122, {"Deciduous shrubland", Urbanizable}},
      {130, {"Grassland", Urbanizable}},
      {140, {"Lichens and mosses", Urbanizable}},
      {150, {"Sparse vegetation (<15%)", Urbanizable}},
      {160, {"Tree cover, flooded, fresh or brackish water", NonUrbanizable}},
      {170, {"Tree cover, flooded, saline water", NonUrbanizable}},
      {180, {"Shrub or herbaceous cover, flooded", NonUrbanizable}},
      {190, {"Urban areas", Urbanizable}},
      {200, {"Bare areas", Urbanizable}},
      {201, {"Consolidated bare areas", Urbanizable}},
      {202, {"Unconsolidated bare areas", Urbanizable}},
      {210, {"Water bodies", NonUrbanizable}},
      {220, {"Permanent snow and ice", NonUrbanizable}},
  };
  return t;
}

const Entry& lookup(int code) {
  const auto& t = table();
  const auto it = t.find(code);
  if (it != t.end()) return it->second;
  std::string valid;
  for (const auto& [c, e] : t) valid += (valid.empty() ? "" : ", ") + std::to_string(c);
  throw DomainError("unknown land-cover code " + std::to_string(code) + " (valid codes: " + valid + ")");
}

}  // namespace

std::string to_string(LandClass c) {
  return c == LandClass::Urbanizable ? "urbanizable" : "non-urbanizable";
}

LandClass reclassify(int code) { return lookup(code).cls; }

const std::string& label(int code) { return lookup(code).label; }

const std::vector<int>& codes() {
  static const std::vector<int> all = [] {
    std::vector<int> v;
    for (const auto& [c, e] : table()) v.push_back(c);
    return v;
  }();
  return all;
}

double urbanizable_share(std::span<const int> pixel_codes) {
  if (pixel_codes.empty()) return 0.0;
  const auto n = std::count_if(pixel_codes.begin(), pixel_codes.end(),
                               [](int c) { return reclassify(c) == LandClass::Urbanizable; });
  return static_cast<double>(n) / static_cast<double>(pixel_codes.size());
}

}  // namespace sumlab::landcover
