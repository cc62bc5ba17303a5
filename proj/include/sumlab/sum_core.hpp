#pragma once

// Closed forms of the monocentric Standard Urban Model with Cobb-Douglas
// preferences and housing production, and the closed-city equilibrium.
//
// Units are a convention, not enforced: income Y, transport cost T and the
// farm rent are per period; distances in km; densities are persons per km²
// of urbanizable land when distances are in km. Every formula is
// scale-covariant, so any consistent set works.

#include <string>
#include <string_view>
#include <vector>

namespace sumlab::sum {

struct CityParams {
  double alpha = 0.5;          // composite-good share
  double beta = 0.5;           // housing share, alpha + beta = 1
  double a_land = 0.5;         // land elasticity of housing production
  double b_capital = 0.5;      // capital elasticity, a + b = 1
  double tfp = 1.0;            // housing productivity A
  double capital_price = 1.0;  // rho
  double income = 100.0;       // Y
  double t_per_km = 10.0;      // linear transport cost per km
  double farm_rent = 25.0;     // Rbar
  double population = 1.0;     // N*

  /// Throws DomainError listing the first violated invariant.
  void validate() const;

  /// Convenience constructor enforcing the share identities.
  static CityParams from_shares(double beta, double a_land);
};

struct Equilibrium {
  double utility = 0.0;
  double fringe = 0.0;        // km
  double central_rent = 0.0;  // R0
  double closure_residual = 0.0;
};

/// Lower envelope of affine commuting-cost pieces, T(d) = min_k (c_k + s_k d).
/// A single piece through the origin is the textbook T = t·d.
class CommuteCost {
 public:
  struct Piece {
    double intercept;
    double slope;
  };

  static CommuteCost linear(double t_per_km);
  static CommuteCost envelope(std::vector<Piece> pieces);

  double operator()(double dist) const;
  /// Smallest distance whose cost reaches `cost` (the inverse of the envelope).
  double distance_at(double cost) const;
  double slope_at(double dist) const;
  /// Distances in (0, limit) where the active piece changes.
  std::vector<double> kinks(double limit) const;
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

 private:
  explicit CommuteCost(std::vector<Piece> pieces);
  std::vector<Piece> pieces_;
};

double dwelling_size(double income, double cost, double rent, double beta);
double composite_consumption(double income, double cost, double alpha);

/// R0·((Y−T)/Y)^{1/β}. Returns 0 at T = Y.
double bid_rent(double income, double cost, double beta, double central_rent);

/// (α^α β^β Y / u)^{1/β}.
double central_rent_from_utility(double alpha, double beta, double income, double utility);

/// Floor space per unit land chosen by a profit-maximizing developer,
/// A^{1/a} (bR/ρ)^{b/a}.
double housing_supply_per_land(double rent, double tfp, double a_land, double b_capital,
                               double capital_price);

/// Profit-maximizing capital per unit land, (A b R/ρ)^{1/a}.
double capital_intensity(double rent, double tfp, double a_land, double b_capital,
                         double capital_price);

/// Density from a rent level: housing supply over dwelling size.
double density_at_rent(double income, double cost, double rent, const CityParams& p);

/// Density in closed form as a function of net income and utility.
/// Returns 0 at T = Y (continuous limit).
double density(double income, double cost, const CityParams& p, double utility);

/// Natural log of `density`, finite for T < Y.
double log_density(double income, double cost, const CityParams& p, double utility);

/// Fringe distance for the linear cost p.t_per_km.
double fringe_distance(const CityParams& p, double central_rent);
double fringe_distance(const CityParams& p, double central_rent, const CommuteCost& cost);

/// ∫₀^{d̄} 2πx·λ·n(x) dx, adaptive Gauss–Kronrod at relative tolerance 1e−10.
double total_population(const CityParams& p, double utility, double land_share = 1.0);
double total_population(const CityParams& p, double utility, const CommuteCost& cost,
                        double land_share = 1.0);

/// Closed-city equilibrium: bisection on log u with a geometrically expanded
/// bracket, then at most five guarded Newton steps.
Equilibrium solve_equilibrium(const CityParams& p, double land_share = 1.0);
Equilibrium solve_equilibrium(const CityParams& p, const CommuteCost& cost,
                              double land_share = 1.0);

inline constexpr double kClosureTolerance = 1e-8;

enum class StaticsParameter { Population, Income, TransportCost, FarmRent };

std::string_view to_string(StaticsParameter which);

struct ComparativeStaticsReport {
  StaticsParameter parameter{};
  double baseline_fringe = 0.0;
  double perturbed_fringe = 0.0;
  int sign = 0;
  int expected_sign = 0;
  bool degenerate = false;  // change fell inside the solver dead-band
};

ComparativeStaticsReport comparative_statics(const CityParams& p, StaticsParameter which,
                                             double rel_step);

CityParams perturbed(const CityParams& p, StaticsParameter which, double factor);

}  // namespace sumlab::sum
