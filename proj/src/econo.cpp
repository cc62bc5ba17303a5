#include "sumlab/econo.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sumlab/errors.hpp"

namespace sumlab::econo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRankTolerance = 1e-10;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double centered_ss(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

// t statistic tolerant of exact fits.
double t_stat(double coef, double se) {
  if (se > 0.0) return coef / se;
  if (coef == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), coef);
}

void fill_inference(FitResult& r, double df) {
  r.t.resize(r.coef.size());
  r.p.resize(r.coef.size());
  for (std::size_t j = 0; j < r.coef.size(); ++j) {
    r.t[j] = t_stat(r.coef[j], r.se[j]);
    r.p[j] = student_t_two_sided_p(r.t[j], df);
  }
}

void check_finite(std::span<const double> v, const std::string& what) {
  for (double x : v) require(std::isfinite(x), what + " contains a non-finite value");
}

}  // namespace

std::string to_string(Method m) { return m == Method::OLS ? "OLS" : "2SLS"; }

std::string to_string(SignClass c) {
  switch (c) {
    case SignClass::PositiveSignificant: return "positive-significant";
    case SignClass::NegativeSignificant: return "negative-significant";
    case SignClass::NonSignificant: return "non-significant";
  }
  return "unknown";
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return kNaN;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double fisher_f_upper_p(double f, double df1, double df2) {
  if (std::isnan(f)) return kNaN;
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

std::size_t FitResult::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return j;
  throw DomainError("unknown regressor '" + name + "'");
}

FitResult ols(std::span<const double> y, const std::vector<Regressor>& regressors) {
  const std::size_t n = y.size();
  const std::size_t k = regressors.size() + 1;
  require(n > k, "OLS needs more observations (" + std::to_string(n) + ") than coefficients (" +
                     std::to_string(k) + ")");
  check_finite(y, "dependent variable");

  Eigen::MatrixXd X(n, k);
  X.col(0).setOnes();
  std::vector<std::string> names{kIntercept};
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    const auto& r = regressors[j];
    require(r.values.size() == n, "regressor '" + r.name + "' has the wrong length");
    check_finite(r.values, "regressor '" + r.name + "'");
    X.col(j + 1) = Eigen::Map<const Eigen::VectorXd>(r.values.data(), static_cast<Eigen::Index>(n));
    names.push_back(r.name);
  }
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));

  // Unit-norm columns make the rank threshold scale-free.
  Eigen::VectorXd scale = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) throw SingularityError(names[j], "regressor '" + names[j] + "' is all zero");
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < static_cast<Eigen::Index>(k)) {
    // Name the first column that adds nothing to the span of its predecessors.
    for (std::size_t j = 1; j < k; ++j) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> part(Xs.leftCols(static_cast<Eigen::Index>(j + 1)));
      part.setThreshold(kRankTolerance);
      if (part.rank() < static_cast<Eigen::Index>(j + 1))
        throw SingularityError(names[j], "design matrix is rank deficient at column '" + names[j] + "'");
    }
    throw SingularityError(names.back(), "design matrix is rank deficient");
  }

  const Eigen::VectorXd bs = qr.solve(Y);
  const Eigen::VectorXd resid = Y - Xs * bs;

  // (XsᵀXs)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * inner * perm.transpose();

  FitResult r;
  r.method = Method::OLS;
  r.names = std::move(names);
  r.n_obs = n;
  r.ssr = resid.squaredNorm();
  r.sst = centered_ss(y);
  const double df = static_cast<double>(n - k);
  const double sigma2 = r.ssr / df;
  r.coef.resize(k);
  r.se.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    r.coef[j] = bs[j] / scale[j];
    r.se[j] = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j))) / scale[j];
  }
  fill_inference(r, df);
  r.r2 = r.sst > 0.0 ? std::max(0.0, 1.0 - r.ssr / r.sst) : 0.0;
  r.adj_r2 = 1.0 - (1.0 - r.r2) * static_cast<double>(n - 1) / df;
  if (k == 1) {
    r.f_stat = kNaN;
    r.f_p = kNaN;
  } else {
    const double explained = std::max(0.0, r.sst - r.ssr);
    if (r.ssr > 0.0)
      r.f_stat = (explained / static_cast<double>(k - 1)) / sigma2;
    else
      r.f_stat = explained > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.f_p = fisher_f_upper_p(r.f_stat, static_cast<double>(k - 1), df);
  }
  r.first_stage_f = kNaN;
  return r;
}

FitResult tsls(std::span<const double> y, std::span<const double> x, std::span<const double> z,
               const std::string& name) {
  const std::size_t n = y.size();
  require(x.size() == n && z.size() == n, "2SLS inputs must have equal length");
  require(n > 2, "2SLS needs at least three observations");
  check_finite(y, "dependent variable");
  check_finite(x, "endogenous regressor");
  check_finite(z, "instrument");

  const double my = mean(y), mx = mean(x), mz = mean(z);
  double szx = 0.0, szy = 0.0, szz = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    szx += (z[i] - mz) * (x[i] - mx);
    szy += (z[i] - mz) * (y[i] - my);
    szz += (z[i] - mz) * (z[i] - mz);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double denom = std::sqrt(szz * sxx);
  if (!(denom > 0.0) || std::abs(szx) / denom < 1e-8)
    throw WeakInstrumentError("instrument is uncorrelated with the regressor (|corr| < 1e-8)");

  const double slope = szy / szx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = y[i] - intercept - slope * x[i];
    ssr += u * u;
  }
  const double df = static_cast<double>(n - 2);
  const double sigma2 = ssr / df;

  // V = σ² (ZᵀX)⁻¹ ZᵀZ (XᵀZ)⁻¹ with Z = [1 z], X = [1 x].
  Eigen::Matrix2d ztx, ztz;
  double sum_x = 0.0, sum_z = 0.0, sum_zx = 0.0, sum_zz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_x += x[i];
    sum_z += z[i];
    sum_zx += z[i] * x[i];
    sum_zz += z[i] * z[i];
  }
  const double nn = static_cast<double>(n);
  ztx << nn, sum_x, sum_z, sum_zx;
  ztz << nn, sum_z, sum_z, sum_zz;
  const Eigen::Matrix2d a = ztx.inverse();
  const Eigen::Matrix2d V = sigma2 * a * ztz * a.transpose();

  FitResult r;
  r.method = Method::TSLS;
  r.names = {kIntercept, name};
  r.n_obs = n;
  r.coef = {intercept, slope};
  r.se = {std::sqrt(std::max(0.0, V(0, 0))), std::sqrt(std::max(0.0, V(1, 1)))};
  fill_inference(r, df);
  r.ssr = ssr;
  r.sst = centered_ss(y);
  r.r2 = r.sst > 0.0 ? 1.0 - ssr / r.sst : 0.0;
  r.adj_r2 = 1.0 - (1.0 - r.r2) * (nn - 1.0) / df;
  r.f_stat = r.t[1] * r.t[1];
  r.f_p = fisher_f_upper_p(r.f_stat, 1.0, df);

  // First stage: x on (1, z).
  const double b1 = szx / szz;
  const double first_ssr = std::max(0.0, sxx - b1 * szx);
  const double explained = sxx - first_ssr;
  r.first_stage_f = first_ssr > 0.0 ? explained / (first_ssr / df)
                                    : std::numeric_limits<double>::infinity();
  return r;
}

SignClass classify_sign(const FitResult& fit, const std::string& regressor, double level) {
  require(level > 0.0 && level < 1.0, "significance level must lie in (0, 1)");
  const std::size_t j = fit.index_of(regressor);
  const double p = fit.p[j];
  if (std::isnan(p) || p >= level) return SignClass::NonSignificant;
  return fit.coef[j] > 0.0 ? SignClass::PositiveSignificant : SignClass::NegativeSignificant;
}

ChowResult chow_test(std::span<const double> y, const std::vector<Regressor>& regressors,
                     const std::vector<bool>& first) {
  const std::size_t n = y.size();
  require(first.size() == n, "group flags must have one entry per observation");
  const std::size_t k = regressors.size() + 1;

  std::vector<double> y1, y2;
  std::vector<Regressor> x1, x2;
  for (const auto& r : regressors) {
    require(r.values.size() == n, "regressor '" + r.name + "' has the wrong length");
    x1.push_back({r.name, {}});
    x2.push_back({r.name, {}});
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& yy = first[i] ? y1 : y2;
    auto& xx = first[i] ? x1 : x2;
    yy.push_back(y[i]);
    for (std::size_t j = 0; j < regressors.size(); ++j) xx[j].values.push_back(regressors[j].values[i]);
  }
  require(y1.size() > k && y2.size() > k,
          "each Chow subsample needs more than " + std::to_string(k) + " observations (got " +
              std::to_string(y1.size()) + " and " + std::to_string(y2.size()) + ")");

  const auto pooled_fit = ols(y, regressors);
  const double pooled = pooled_fit.ssr;
  const double s1 = ols(y1, x1).ssr;
  const double s2 = ols(y2, x2).ssr;

  ChowResult out;
  out.k = k;
  out.n1 = y1.size();
  out.n2 = y2.size();
  const double df2 = static_cast<double>(n - 2 * k);
  const double num = std::max(0.0, pooled - s1 - s2) / static_cast<double>(k);
  const double den = (s1 + s2) / df2;
  // Dead-band relative to the spread of y, so exact fits report F = 0 rather
  // than rounding noise.
  if (num * static_cast<double>(k) <= 1e-20 * pooled_fit.sst) {
    out.f = 0.0;
    out.p = 1.0;
  } else if (den <= 0.0) {
    out.f = std::numeric_limits<double>::infinity();
    out.p = 0.0;
  } else {
    out.f = num / den;
    out.p = fisher_f_upper_p(out.f, static_cast<double>(k), df2);
  }
  return out;
}

}  // namespace sumlab::econo
