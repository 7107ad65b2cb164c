#include <algorithm>
#include <cmath>
#include <vector>

#include "bayespa/numerics.hpp"
#include "doctest.h"

using namespace bayespa;

namespace {

// Trapezoid quadrature of an unnormalized density on [lo, hi]; returns the
// CDF evaluated at the sample points of `grid`.
std::vector<double> quadrature_cdf(const std::vector<double>& grid,
                                   double (*logpdf)(double, double), double param) {
  std::vector<double> cdf(grid.size(), 0.0);
  double total = 0.0;
  for (size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], b = grid[i];
    const double fa = std::exp(logpdf(a, param)), fb = std::exp(logpdf(b, param));
    total += 0.5 * (fa + fb) * (b - a);
    cdf[i] = total;
  }
  for (auto& x : cdf) x /= total;
  return cdf;
}

double ig_logpdf(double x, double mean) {
  // IG(mean, shape=1)
  if (x <= 0) return -1e300;
  return -0.5 * std::log(2 * M_PI * x * x * x) - (x - mean) * (x - mean) / (2 * mean * mean * x);
}

double gig_half_logpdf(double x, double chi) {
  // GIG(1/2, psi=1, chi): f(x) ~ x^{-1/2} exp(-(x + chi/x)/2)
  if (x <= 0) return -1e300;
  return -0.5 * std::log(x) - 0.5 * (x + chi / x);
}

double ks_statistic(std::vector<double> samples, const std::vector<double>& grid,
                    const std::vector<double>& cdf) {
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  size_t si = 0;
  for (size_t g = 0; g < grid.size(); ++g) {
    while (si < samples.size() && samples[si] <= grid[g]) ++si;
    const double emp = double(si) / double(samples.size());
    ks = std::max(ks, std::abs(emp - cdf[g]));
  }
  return ks;
}

}  // namespace

TEST_CASE("chol_solve identity and diagonal") {
  SymMatrix eye = SymMatrix::identity(3);
  Vec x = chol_solve(eye, {1.0, 2.0, 3.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(x[2] == doctest::Approx(3.0));

  SymMatrix d(2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  Vec y = chol_solve(d, {2.0, 4.0});
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("chol_solve recovers a constructed solution") {
  RngStream rng(42);
  const int n = 5;
  // A = B B' + I is PSD by construction.
  SymMatrix a(n);
  std::vector<Vec> b(n, Vec(n));
  for (auto& row : b)
    for (auto& v : row) v = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = (i == j) ? 1.0 : 0.0;
      for (int k = 0; k < n; ++k) s += b[i][k] * b[j][k];
      a(i, j) = s;
    }
  Vec x_true(n);
  for (auto& v : x_true) v = rng.normal();
  Vec rhs = a.mat_vec(x_true);
  Vec x = chol_solve(a, rhs);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-9));

  // Residual check against the contract.
  Vec res = a.mat_vec(x);
  double rnorm = 0.0, bnorm = 0.0;
  for (int i = 0; i < n; ++i) {
    rnorm += (res[i] - rhs[i]) * (res[i] - rhs[i]);
    bnorm += rhs[i] * rhs[i];
  }
  CHECK(std::sqrt(rnorm / bnorm) <= 1e-10);
}

TEST_CASE("chol reports the failing pivot") {
  SymMatrix a(3);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;  // indefinite
  a(2, 2) = 1.0;
  try {
    chol_solve(a, {1.0, 1.0, 1.0});
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot == 1);
  }
}

TEST_CASE("digamma reference values") {
  // Psi(1) = -EulerGamma; Psi(1/2) = -EulerGamma - 2 ln 2
  const double euler = 0.5772156649015328606;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  // recurrence at x = 3.7
  CHECK(digamma(4.7) - digamma(3.7) == doctest::Approx(1.0 / 3.7).epsilon(1e-12));
  CHECK_THROWS_AS(digamma(0.0), NumericError);
  CHECK_THROWS_AS(digamma(-1.0), NumericError);
}

TEST_CASE("inverse gaussian moments") {
  RngStream rng(7);
  const long n = 1000000;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) sum += sample_inverse_gaussian(rng, 1.0, 1.0);
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));

  // Var[IG(m, L)] = m^3 / L
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double x = sample_inverse_gaussian(rng, 2.0, 4.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(var == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("inverse gaussian KS against quadrature") {
  RngStream rng(11);
  // X ~ IG(m, L) scales: X/L ~ IG(m/L, 1), so draws from IG(1.5, 2)
  // divided by 2 follow the shape-1 density with mean 0.75.
  std::vector<double> samples(100000);
  for (auto& s : samples) s = sample_inverse_gaussian(rng, 1.5, 2.0) / 2.0;
  std::vector<double> grid;
  for (double x = 1e-4; x < 20.0; x += 0.002) grid.push_back(x);
  auto cdf = quadrature_cdf(grid, ig_logpdf, 0.75);
  CHECK(ks_statistic(samples, grid, cdf) < 0.01);
}

TEST_CASE("gig half: reciprocal mean and support") {
  RngStream rng(13);
  const double chi = 4.0;
  const long n = 1000000;
  double recip = 0.0;
  double minv = 1e300;
  for (long i = 0; i < n; ++i) {
    double x = sample_gig_half(rng, chi);
    minv = std::min(minv, x);
    recip += 1.0 / x;
  }
  // lambda^{-1} ~ IG(1/sqrt(chi), 1): mean 1/2 for chi = 4.
  CHECK(recip / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(minv > 0.0);
}

TEST_CASE("gig half KS against quadrature") {
  RngStream rng(17);
  std::vector<double> grid;
  for (double x = 1e-4; x < 40.0; x += 0.004) grid.push_back(x);
  auto cdf = quadrature_cdf(grid, gig_half_logpdf, 1.0);
  std::vector<double> samples(100000);
  for (auto& s : samples) s = sample_gig_half(rng, 1.0);
  CHECK(ks_statistic(samples, grid, cdf) < 0.01);
}

TEST_CASE("log stirling table values") {
  LogStirlingTable t(10);
  CHECK(std::exp(t(1, 1)) == doctest::Approx(1.0));
  CHECK(std::exp(t(3, 2)) == doctest::Approx(3.0));
  CHECK(std::exp(t(4, 2)) == doctest::Approx(11.0));
  CHECK(std::isinf(t(3, 0)));
  CHECK(t(0, 0) == doctest::Approx(0.0));
  // brute recurrence oracle in plain integers up to n = 12
  std::vector<std::vector<unsigned long long>> s(13);
  s[0] = {1};
  for (int n = 0; n < 12; ++n) {
    s[n + 1].assign(n + 2, 0);
    for (int m = 1; m <= n + 1; ++m) {
      unsigned long long a = (m <= n) ? s[n][m] : 0;
      unsigned long long b = s[n][m - 1];
      s[n + 1][m] = (unsigned long long)(n)*a + b;
    }
  }
  LogStirlingTable big(12);
  for (int n = 1; n <= 12; ++n)
    for (int m = 1; m <= n; ++m)
      CHECK(std::exp(big(n, m)) == doctest::Approx(double(s[n][m])).epsilon(1e-9));
}

TEST_CASE("log stirling rows are log-concave") {
  LogStirlingTable t(50);
  for (int n = 3; n <= 50; ++n)
    for (int m = 2; m < n; ++m)
      CHECK(2.0 * t(n, m) >= t(n, m - 1) + t(n, m + 1) - 1e-9);
}

TEST_CASE("log stirling rejects beyond the document bound") {
  LogStirlingTable t(5, 100);
  CHECK_THROWS_AS(t.extend_to(101), NumericError);
}

TEST_CASE("categorical logits sampler") {
  RngStream rng(19);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i)
    CHECK(sample_categorical_logits(rng, {0.0, neg_inf}) == 0);
  CHECK_THROWS_AS(sample_categorical_logits(rng, {neg_inf, neg_inf}), NumericError);

  // symmetric
  std::vector<long> counts(3, 0);
  const long n = 100000;
  for (long i = 0; i < n; ++i) ++counts[sample_categorical_logits(rng, {5.0, 5.0, 5.0})];
  for (int k = 0; k < 3; ++k)
    CHECK(double(counts[k]) / n == doctest::Approx(1.0 / 3).epsilon(0.03));

  // ln 1 : ln 2 : ln 3
  std::fill(counts.begin(), counts.end(), 0);
  const Vec logits{std::log(1.0), std::log(2.0), std::log(3.0)};
  for (long i = 0; i < n; ++i) ++counts[sample_categorical_logits(rng, logits)];
  CHECK(double(counts[0]) / n == doctest::Approx(1.0 / 6).epsilon(0.05));
  CHECK(double(counts[1]) / n == doctest::Approx(2.0 / 6).epsilon(0.04));
  CHECK(double(counts[2]) / n == doctest::Approx(3.0 / 6).epsilon(0.03));
}

TEST_CASE("beta and gamma moments") {
  RngStream rng(23);
  const long n = 1000000;
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += sample_beta(rng, 3.0, 5.0);
  CHECK(s / n == doctest::Approx(3.0 / 8.0).epsilon(0.01));

  s = 0.0;
  double s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double x = sample_gamma(rng, 2.5, 2.0);
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(5.0).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(10.0).epsilon(0.03));

  // shape < 1 branch
  s = 0.0;
  for (long i = 0; i < n / 10; ++i) s += sample_gamma(rng, 0.4, 1.0);
  CHECK(s / (n / 10) == doctest::Approx(0.4).epsilon(0.03));
}

TEST_CASE("gaussian vector sampling matches mean and covariance") {
  RngStream rng(29);
  SymMatrix cov(2);
  cov(0, 0) = 2.0;
  cov(1, 1) = 1.0;
  cov(0, 1) = cov(1, 0) = 0.8;
  const Vec mean{1.0, -2.0};
  const long n = 200000;
  double m0 = 0, m1 = 0, c00 = 0, c01 = 0, c11 = 0;
  for (long i = 0; i < n; ++i) {
    Vec x = sample_gaussian_vector(rng, mean, cov);
    m0 += x[0];
    m1 += x[1];
    c00 += (x[0] - 1.0) * (x[0] - 1.0);
    c01 += (x[0] - 1.0) * (x[1] + 2.0);
    c11 += (x[1] + 2.0) * (x[1] + 2.0);
  }
  CHECK(m0 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m1 / n == doctest::Approx(-2.0).epsilon(0.02));
  CHECK(c00 / n == doctest::Approx(2.0).epsilon(0.03));
  CHECK(c01 / n == doctest::Approx(0.8).epsilon(0.05));
  CHECK(c11 / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("samplers are deterministic given equal stream state") {
  RngStream a(31), b(31);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_inverse_gaussian(a, 1.3, 2.1) == sample_inverse_gaussian(b, 1.3, 2.1));
    CHECK(sample_gig_half(a, 0.7) == sample_gig_half(b, 0.7));
    CHECK(sample_gamma(a, 1.9) == sample_gamma(b, 1.9));
    CHECK(sample_categorical_logits(a, {0.1, 0.4, -1.0}) ==
          sample_categorical_logits(b, {0.1, 0.4, -1.0}));
  }
  // forked streams differ from the parent and from each other
  RngStream p(99);
  RngStream f1 = p.fork(1), f2 = p.fork(2);
  CHECK(f1.uniform() != f2.uniform());
}

TEST_CASE("domain errors") {
  RngStream rng(1);
  CHECK_THROWS_AS(sample_inverse_gaussian(rng, -1.0, 1.0), NumericError);
  CHECK_THROWS_AS(sample_inverse_gaussian(rng, 1.0, 0.0), NumericError);
  CHECK_THROWS_AS(sample_gig_half(rng, 0.0), NumericError);
  CHECK_THROWS_AS(sample_gig_half(rng, std::numeric_limits<double>::infinity()), NumericError);
}
