#pragma once

// Regression engine: OLS with intercept, just-identified 2SLS, significance
// classification and the Chow test. Classical homoskedastic standard errors,
// t-based p-values on n − k degrees of freedom.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sumlab::econo {

enum class Method { OLS, TSLS };

std::string to_string(Method m);

/// One named regressor column.
struct Regressor {
  std::string name;
  std::vector<double> values;
};

struct FitResult {
  Method method = Method::OLS;
  std::vector<std::string> names;  // "const" first
  std::vector<double> coef;
  std::vector<double> se;
  std::vector<double> t;
  std::vector<double> p;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;  // joint test of the slopes (Wald for 2SLS); NaN without slopes
  double f_p = 0.0;
  double ssr = 0.0;
  double sst = 0.0;
  std::size_t n_obs = 0;
  double first_stage_f = 0.0;  // 2SLS only; NaN for OLS

  std::size_t df_resid() const { return n_obs - coef.size(); }
  /// Position of a coefficient; throws DomainError for unknown names.
  std::size_t index_of(const std::string& name) const;
  double coefficient(const std::string& name) const { return coef[index_of(name)]; }
};

inline constexpr const char* kIntercept = "const";

/// OLS of y on an intercept plus the given columns, solved by column-pivoted QR.
/// Rank deficiency raises SingularityError naming the first dependent column.
FitResult ols(std::span<const double> y, const std::vector<Regressor>& regressors);

/// Just-identified 2SLS of y on (1, x) with instruments (1, z).
FitResult tsls(std::span<const double> y, std::span<const double> x, std::span<const double> z,
               const std::string& name = "x");

enum class SignClass { PositiveSignificant, NegativeSignificant, NonSignificant };

std::string to_string(SignClass c);

inline constexpr double kSignificanceLevel = 0.10;

/// Two-sided t-test on a named coefficient.
SignClass classify_sign(const FitResult& fit, const std::string& regressor,
                        double level = kSignificanceLevel);

struct ChowResult {
  double f = 0.0;
  double p = 1.0;
  std::size_t k = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Equality of all coefficients (intercept included) across the two groups
/// marked by `first`.
ChowResult chow_test(std::span<const double> y, const std::vector<Regressor>& regressors,
                     const std::vector<bool>& first);

/// Upper-tail probabilities.
double student_t_two_sided_p(double t, double df);
double fisher_f_upper_p(double f, double df1, double df2);

}  // namespace sumlab::econo
