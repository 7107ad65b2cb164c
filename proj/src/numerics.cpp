#include "bayespa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bayespa {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CholeskyFactor::CholeskyFactor(const SymMatrix& a) : l_(a.dim()) {
  const int n = a.dim();
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(j);
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / ljj;
    }
  }
}

Vec CholeskyFactor::solve(const Vec& b) const {
  const int n = l_.dim();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
    y[i] = s / l_(i, i);
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
    x[i] = s / l_(i, i);
  }
  return x;
}

SymMatrix CholeskyFactor::inverse() const {
  const int n = l_.dim();
  SymMatrix inv(n);
  Vec e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = solve(e);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // Symmetrize away round-off.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double m = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = inv(j, i) = m;
    }
  return inv;
}

double CholeskyFactor::log_det() const {
  double s = 0.0;
  for (int i = 0; i < l_.dim(); ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

Vec CholeskyFactor::lower_times(const Vec& z) const {
  const int n = l_.dim();
  Vec y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k <= i; ++k) s += l_(i, k) * z[k];
    y[i] = s;
  }
  return y;
}

Vec chol_solve(const SymMatrix& a, const Vec& b) {
  return CholeskyFactor(a).solve(b);
}

double digamma(double x) {
  if (!(x > 0.0)) throw NumericError("digamma: x must be > 0");
  double acc = 0.0;
  // Recurrence Psi(x) = Psi(x+1) - 1/x up into the asymptotic regime.
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series with Bernoulli coefficients.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv -
                  inv2 * (1.0 / 12.0 -
                          inv2 * (1.0 / 120.0 -
                                  inv2 * (1.0 / 252.0 -
                                          inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return acc + series;
}

double log_sum_exp(const Vec& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

LogStirlingTable::LogStirlingTable(int n_max, int hard_cap) : n_max_(0), hard_cap_(hard_cap) {
  if (n_max < 1) throw NumericError("LogStirlingTable: n_max must be >= 1");
  rows_.push_back({0.0});  // S(0,0) = 1
  extend_to(n_max);
}

void LogStirlingTable::extend_to(int n_max) {
  if (n_max > hard_cap_)
    throw NumericError("LogStirlingTable: n_max " + std::to_string(n_max) +
                       " exceeds document-length bound " + std::to_string(hard_cap_));
  for (int n = int(rows_.size()) - 1; n < n_max; ++n) {
    const auto& prev = rows_[n];
    std::vector<double> row(size_t(n) + 2, kNegInf);
    // S(n+1, m) = n S(n, m) + S(n, m-1)
    for (int m = 1; m <= n + 1; ++m) {
      double a = (m <= n && n > 0) ? std::log(double(n)) + prev[m] : kNegInf;
      double b = (m - 1 <= n) ? prev[m - 1] : kNegInf;
      double hi = std::max(a, b);
      row[m] = (hi == kNegInf) ? kNegInf : hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
    rows_.push_back(std::move(row));
  }
  n_max_ = std::max(n_max_, n_max);
}

double sample_inverse_gaussian(RngStream& rng, double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) || !std::isfinite(shape))
    throw NumericError("sample_inverse_gaussian: mean and shape must be finite positive");
  const double nu = rng.normal();
  const double y = nu * nu;
  const double mu2 = mean * mean;
  double x = mean + mu2 * y / (2.0 * shape) -
             (mean / (2.0 * shape)) * std::sqrt(4.0 * mean * shape * y + mu2 * y * y);
  if (x <= 0.0) x = std::numeric_limits<double>::min();
  const double u = rng.uniform();
  if (u <= mean / (mean + x)) return x;
  return mu2 / x;
}

double sample_gig_half(RngStream& rng, double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi))
    throw NumericError("sample_gig_half: chi must be finite positive");
  const double inv = sample_inverse_gaussian(rng, 1.0 / std::sqrt(chi), 1.0);
  return std::clamp(1.0 / inv, kLambdaFloor, kLambdaCap);
}

double sample_gamma(RngStream& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw NumericError("sample_gamma: shape and scale must be > 0");
  // Marsaglia-Tsang; shape < 1 boosted via the U^{1/shape} trick.
  if (shape < 1.0) {
    double u = rng.uniform_pos();
    return sample_gamma(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
  }
}

double sample_beta(RngStream& rng, double a, double b) {
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  double r = x / (x + y);
  // Keep strictly inside (0,1); stick products and Beta updates take logs.
  return std::clamp(r, 1e-15, 1.0 - 1e-15);
}

int sample_categorical_logits(RngStream& rng, const Vec& logits) {
  double m = kNegInf;
  for (double l : logits) m = std::max(m, l);
  if (m == kNegInf || !std::isfinite(m))
    throw NumericError("sample_categorical_logits: no finite logit");
  double total = 0.0;
  Vec w(logits.size());
  for (size_t k = 0; k < logits.size(); ++k) {
    w[k] = std::exp(logits[k] - m);
    total += w[k];
  }
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (size_t k = 0; k < w.size(); ++k) {
    cum += w[k];
    if (u < cum) return int(k);
  }
  return int(w.size()) - 1;
}

Vec sample_gaussian_vector(RngStream& rng, const Vec& mean, const SymMatrix& cov) {
  CholeskyFactor chol(cov);
  Vec z(mean.size());
  for (auto& zi : z) zi = rng.normal();
  Vec lz = chol.lower_times(z);
  for (size_t i = 0; i < mean.size(); ++i) lz[i] += mean[i];
  return lz;
}

}  // namespace bayespa
