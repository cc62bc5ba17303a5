#include "sumlab/grid.hpp"

#include "sumlab/errors.hpp"

namespace sumlab {

void GridSpec::validate() const {
  if (!(std::isfinite(cell_size) && cell_size > 0.0))
    throw DomainError("grid cell_size must be positive");
  if (!(std::isfinite(radius) && radius > 0.0)) throw DomainError("grid radius must be positive");
  if (!std::isfinite(center_x) || !std::isfinite(center_y))
    throw DomainError("grid center must be finite");
}

std::vector<transport::LatticePoint> CityGrid::lattice() const {
  std::vector<transport::LatticePoint> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back({c.ix, c.iy});
  return out;
}

double CityGrid::total_population() const {
  double total = 0.0;
  for (const auto& c : cells) total += c.population;
  return total;
}

std::int64_t CityGrid::total_ads() const {
  std::int64_t total = 0;
  for (const auto& c : cells) total += c.n_ads;
  return total;
}

}  // namespace sumlab
