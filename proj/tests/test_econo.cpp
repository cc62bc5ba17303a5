#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sumlab/econo.hpp"
#include "sumlab/errors.hpp"

using namespace sumlab;
using namespace sumlab::econo;

namespace {

// Brute-force normal equations: Gaussian elimination with partial pivoting on
// XᵀX b = Xᵀy in long double.
std::vector<double> normal_equations(const std::vector<double>& y, const std::vector<Regressor>& xs) {
  const std::size_t n = y.size(), k = xs.size() + 1;
  auto col = [&](std::size_t j, std::size_t i) -> long double {
    return j == 0 ? 1.0L : static_cast<long double>(xs[j - 1].values[i]);
  };
  std::vector<std::vector<long double>> a(k, std::vector<long double>(k + 1, 0.0L));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < n; ++i) a[r][c] += col(r, i) * col(c, i);
    for (std::size_t i = 0; i < n; ++i) a[r][k] += col(r, i) * y[i];
  }
  for (std::size_t p = 0; p < k; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < k; ++r)
      if (std::fabs(a[r][p]) > std::fabs(a[best][p])) best = r;
    std::swap(a[p], a[best]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == p) continue;
      const long double f = a[r][p] / a[p][p];
      for (std::size_t c = p; c <= k; ++c) a[r][c] -= f * a[p][c];
    }
  }
  std::vector<double> b(k);
  for (std::size_t r = 0; r < k; ++r) b[r] = static_cast<double>(a[r][k] / a[r][r]);
  return b;
}

double ssr_of_line(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  const double b = sxy / sxx, a = my - b * mx;
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (y[i] - a - b * x[i]) * (y[i] - a - b * x[i]);
  return s;
}

}  // namespace

TEST_CASE("ols exact line") {
  const auto fit = ols(std::vector<double>{1, 3, 5}, {{"x", {0, 1, 2}}});
  CHECK(fit.coefficient("x") == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.coefficient(kIntercept) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.n_obs == 3);
  CHECK(fit.method == Method::OLS);
  CHECK(std::isnan(fit.first_stage_f));
}

TEST_CASE("ols constant dependent") {
  const auto fit = ols(std::vector<double>{4, 4, 4, 4}, {{"x", {0, 1, 2, 5}}});
  CHECK(std::abs(fit.coefficient("x")) < 1e-14);
  CHECK(fit.r2 == 0.0);
  CHECK(classify_sign(fit, "x") == SignClass::NonSignificant);
}

TEST_CASE("ols matches normal equations on random 50-observation data") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> y(50);
    std::vector<Regressor> xs{{"a", {}}, {"b", {}}, {"c", {}}};
    for (int i = 0; i < 50; ++i) {
      const double a = g(rng), b = 3.0 * g(rng) + 1.0, c = g(rng) + 0.5 * a;
      xs[0].values.push_back(a);
      xs[1].values.push_back(b);
      xs[2].values.push_back(c);
      y[i] = 0.7 + 1.5 * a - 0.3 * b + 2.0 * c + g(rng);
    }
    const auto fit = ols(y, xs);
    const auto oracle = normal_equations(y, xs);
    for (std::size_t j = 0; j < oracle.size(); ++j) CHECK(std::abs(fit.coef[j] - oracle[j]) <= 1e-10);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 <= 1.0);
  }
}

TEST_CASE("ols standard errors for a simple line") {
  // se(slope) = sqrt(σ²/Sxx) with σ² = SSR/(n−2).
  const std::vector<double> x{1, 2, 3, 4, 5, 6}, y{1.2, 1.9, 3.2, 3.8, 5.3, 5.9};
  const auto fit = ols(y, {{"x", x}});
  const double ssr = ssr_of_line(x, y);
  const double sxx = 17.5;
  CHECK(fit.ssr == doctest::Approx(ssr).epsilon(1e-12));
  CHECK(fit.se[1] == doctest::Approx(std::sqrt(ssr / 4.0 / sxx)).epsilon(1e-12));
  CHECK(fit.t[1] == doctest::Approx(fit.coef[1] / fit.se[1]).epsilon(1e-12));
  // One slope: the F statistic is t².
  CHECK(fit.f_stat == doctest::Approx(fit.t[1] * fit.t[1]).epsilon(1e-10));
  CHECK(fit.f_p == doctest::Approx(fit.p[1]).epsilon(1e-9));
}

TEST_CASE("ols residuals are orthogonal to the regressors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 30 + rep;
    std::vector<double> y(n);
    std::vector<Regressor> xs{{"a", {}}, {"b", {}}};
    for (int i = 0; i < n; ++i) {
      xs[0].values.push_back(100.0 * g(rng));
      xs[1].values.push_back(std::exp(g(rng)));
      y[i] = 3.0 + 0.01 * xs[0].values[i] + g(rng);
    }
    const auto fit = ols(y, xs);
    std::vector<double> e(n);
    for (int i = 0; i < n; ++i) e[i] = y[i] - fit.coef[0] - fit.coef[1] * xs[0].values[i] - fit.coef[2] * xs[1].values[i];
    double en = 0;
    for (double v : e) en += v * v;
    en = std::sqrt(en);
    double s0 = 0;
    for (double v : e) s0 += v;
    CHECK(std::abs(s0) / (en * std::sqrt(n)) <= 1e-8);
    for (const auto& x : xs) {
      double dot = 0, xn = 0;
      for (int i = 0; i < n; ++i) dot += e[i] * x.values[i], xn += x.values[i] * x.values[i];
      CHECK(std::abs(dot) / (en * std::sqrt(xn)) <= 1e-8);
    }
  }
}

TEST_CASE("ols singularity names the column") {
  const std::vector<double> y{1, 2, 3, 4, 5};
  const std::vector<double> a{1, 2, 3, 4, 6};
  std::vector<double> twice(a);
  for (double& v : twice) v *= 2.0;
  try {
    ols(y, {{"a", a}, {"twice_a", twice}});
    FAIL("expected singularity");
  } catch (const SingularityError& e) {
    CHECK(e.column() == "twice_a");
  }
  try {
    ols(y, {{"flat", {3, 3, 3, 3, 3}}});
    FAIL("expected singularity");
  } catch (const SingularityError& e) {
    CHECK(e.column() == "flat");
  }
  CHECK_THROWS_AS(ols(std::vector<double>{1, 2}, {{"x", {0, 1}}}), DomainError);
}

TEST_CASE("tsls covariance-ratio example") {
  const auto fit = tsls(std::vector<double>{1, 5, 7}, std::vector<double>{0, 2, 3}, std::vector<double>{0, 1, 2});
  CHECK(fit.coefficient("x") == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.coefficient(kIntercept) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.method == Method::TSLS);
}

TEST_CASE("tsls with the regressor as its own instrument equals ols") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) x[i] = g(rng), y[i] = 1.0 - 0.5 * x[i] + g(rng);
  const auto iv = tsls(y, x, x);
  const auto o = ols(y, {{"x", x}});
  for (int j = 0; j < 2; ++j) {
    CHECK(iv.coef[j] == doctest::Approx(o.coef[j]).epsilon(1e-12));
    CHECK(iv.se[j] == doctest::Approx(o.se[j]).epsilon(1e-10));
  }
  CHECK(iv.r2 == doctest::Approx(o.r2).epsilon(1e-12));
  CHECK(iv.first_stage_f == std::numeric_limits<double>::infinity());
}

TEST_CASE("tsls residuals are orthogonal to the instrument") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 500;
  std::vector<double> x(n), y(n), z(n);
  for (int i = 0; i < n; ++i) {
    const double u = g(rng);
    z[i] = g(rng);
    x[i] = z[i] + u + 0.3 * g(rng);
    y[i] = 2.0 + 1.0 * x[i] + u;
  }
  const auto fit = tsls(y, x, z);
  double dz = 0, dx = 0, ee = 0, zz = 0, xx = 0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - fit.coef[0] - fit.coef[1] * x[i];
    dz += e * z[i], dx += e * x[i], ee += e * e, zz += z[i] * z[i], xx += x[i] * x[i];
  }
  CHECK(std::abs(dz) / std::sqrt(ee * zz) <= 1e-8);
  CHECK(std::abs(dx) / std::sqrt(ee * xx) > 1e-3);
  CHECK(fit.first_stage_f > 10.0);
}

TEST_CASE("tsls r-squared may be negative") {
  // Covariance-ratio oracle: slope -0.4, intercept 4, SSR 21.6 against SST 10.
  const auto fit = tsls(std::vector<double>{1, 3, 2, 4, 3, 5}, std::vector<double>{0, 1, 2, 3, 4, 5},
                        std::vector<double>{0, 1, 0, 0, 0, 0.2});
  CHECK(fit.coefficient("x") == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(fit.coefficient(kIntercept) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(-1.16).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0 - fit.ssr / fit.sst).epsilon(1e-14));
}

TEST_CASE("tsls weak instrument") {
  CHECK_THROWS_AS(tsls(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4},
                       std::vector<double>{1, 1, 1, 1}),
                  WeakInstrumentError);
  // z orthogonal to x exactly.
  CHECK_THROWS_AS(tsls(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, -1, 1, -1},
                       std::vector<double>{1, 1, -1, -1}),
                  WeakInstrumentError);
}

TEST_CASE("tsls beats ols under endogeneity") {
  const double truth = 1.5;
  double ols_err = 0.0, iv_err = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const int n = 1000;
    std::vector<double> x(n), y(n), z(n);
    for (int i = 0; i < n; ++i) {
      const double u = g(rng);
      z[i] = g(rng);
      x[i] = 0.8 * z[i] + 0.6 * u + 0.5 * g(rng);
      y[i] = 0.5 + truth * x[i] + u;
    }
    ols_err += std::abs(ols(y, {{"x", x}}).coef[1] - truth);
    iv_err += std::abs(tsls(y, x, z).coef[1] - truth);
  }
  CHECK(iv_err / 100.0 < ols_err / 100.0);
}

TEST_CASE("noise-free data: ols and tsls recover the generating slope") {
  std::vector<double> x, y, z;
  for (int i = 1; i <= 25; ++i) {
    z.push_back(std::log(i));
    x.push_back(3.0 - 0.2 * i + 0.01 * i * i);
    y.push_back(-4.0 + 2.5 * x.back());
  }
  CHECK(std::abs(ols(y, {{"x", x}}).coef[1] - 2.5) <= 1e-8);
  CHECK(std::abs(tsls(y, x, z).coef[1] - 2.5) <= 1e-8);
}

TEST_CASE("classify_sign") {
  auto make = [](double coef, double se) {
    FitResult f;
    f.names = {kIntercept, "x"};
    f.coef = {0.0, coef};
    f.se = {1.0, se};
    f.t = {0.0, coef / se};
    f.n_obs = 3;
    f.p = {1.0, student_t_two_sided_p(coef / se, 1.0)};
    return f;
  };
  // n = 3 leaves one degree of freedom; 0.5 is far below 6.31.
  CHECK(classify_sign(make(0.5, 1.0), "x") == SignClass::NonSignificant);
  auto big = [](double t) {
    FitResult f;
    f.names = {kIntercept, "x"};
    f.coef = {0.0, t};
    f.se = {1.0, 1.0};
    f.t = {0.0, t};
    f.n_obs = 100;
    f.p = {1.0, student_t_two_sided_p(t, 98.0)};
    return f;
  };
  CHECK(classify_sign(big(5.0), "x") == SignClass::PositiveSignificant);
  CHECK(classify_sign(big(-5.0), "x") == SignClass::NegativeSignificant);
  CHECK(classify_sign(big(0.5), "x") == SignClass::NonSignificant);
  CHECK_THROWS_AS(classify_sign(big(5.0), "nope"), DomainError);
  CHECK(to_string(SignClass::PositiveSignificant) == "positive-significant");
}

TEST_CASE("classify_sign is invariant to positive rescaling of y") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> x(20), y(20), y2(20);
    const double slope = 0.3 * g(rng);
    for (int i = 0; i < 20; ++i) x[i] = g(rng), y[i] = slope * x[i] + g(rng), y2[i] = 137.0 * y[i];
    const auto a = ols(y, {{"x", x}}), b = ols(y2, {{"x", x}});
    CHECK(a.t[1] == doctest::Approx(b.t[1]).epsilon(1e-9));
    CHECK(classify_sign(a, "x") == classify_sign(b, "x"));
  }
}

TEST_CASE("student t critical values") {
  CHECK(student_t_two_sided_p(6.313751514675, 1.0) == doctest::Approx(0.10).epsilon(1e-9));
  CHECK(student_t_two_sided_p(1.959963984540, 1e9) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(student_t_two_sided_p(0.0, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("chow hand-computed twelve-observation example") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1, 12.0, 20.5, 23.8, 27.1, 29.9, 33.2, 35.8};
  std::vector<bool> first(12, false);
  for (int i = 0; i < 6; ++i) first[i] = true;
  // SSRs from the closed-form simple-regression formulas.
  const double pooled = ssr_of_line(x, y);
  const double s1 = ssr_of_line({1, 2, 3, 4, 5, 6}, {2.1, 3.9, 6.2, 7.8, 10.1, 12.0});
  const double s2 = ssr_of_line({7, 8, 9, 10, 11, 12}, {20.5, 23.8, 27.1, 29.9, 33.2, 35.8});
  CHECK(pooled == doctest::Approx(38.55818181818182).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(0.10704761904761916).epsilon(1e-10));
  CHECK(s2 == doctest::Approx(0.21904761904762352).epsilon(1e-10));
  const auto r = chow_test(y, {{"x", x}}, first);
  CHECK(r.k == 2);
  CHECK(r.n1 == 6);
  CHECK(r.n2 == 6);
  CHECK(r.f == doctest::Approx(((pooled - s1 - s2) / 2.0) / ((s1 + s2) / 8.0)).epsilon(1e-10));
  CHECK(r.f == doctest::Approx(468.9683517417097).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(5.1157774140453e-09).epsilon(1e-6));
}

TEST_CASE("chow: identical exact lines give F = 0") {
  std::vector<double> x, y;
  std::vector<bool> first;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i % 10 + 0.5 * (i / 10));
    y.push_back(1.0 + 2.0 * x.back());
    first.push_back(i < 10);
  }
  const auto r = chow_test(y, {{"x", x}}, first);
  CHECK(r.f == 0.0);
  CHECK(r.p == 1.0);
}

TEST_CASE("chow detects different slopes") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<double> x, y;
  std::vector<bool> first;
  for (int i = 0; i < 40; ++i) {
    const double xi = 0.25 * (i % 20);
    const bool a = i < 20;
    x.push_back(xi);
    y.push_back((a ? 1.0 : 3.0) * xi + g(rng));
    first.push_back(a);
  }
  CHECK(chow_test(y, {{"x", x}}, first).p < 0.01);
}

TEST_CASE("chow subsample too small") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  const std::vector<double> x{1, 2, 3, 4, 5, 7};
  CHECK_THROWS_AS(chow_test(y, {{"x", x}}, {true, true, false, false, false, false}), DomainError);
}
