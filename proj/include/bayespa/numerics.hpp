#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bayespa/rng.hpp"

namespace bayespa {

using Vec = std::vector<double>;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cholesky failed: the matrix is not positive definite at `pivot`.
struct NotPositiveDefinite : NumericError {
  int pivot;
  explicit NotPositiveDefinite(int p)
      : NumericError("matrix not positive definite at pivot " + std::to_string(p)),
        pivot(p) {}
};

// Dense symmetric K x K matrix, row-major full storage.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double diag = 0.0) : dim_(dim), a_(size_t(dim) * dim, 0.0) {
    for (int i = 0; i < dim; ++i) (*this)(i, i) = diag;
  }

  int dim() const { return dim_; }
  double& operator()(int i, int j) { return a_[size_t(i) * dim_ + j]; }
  double operator()(int i, int j) const { return a_[size_t(i) * dim_ + j]; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  static SymMatrix identity(int dim) { return SymMatrix(dim, 1.0); }

  // Extends to (dim+1) x (dim+1); new row/col zero except diagonal.
  void grow(double new_diag) {
    SymMatrix g(dim_ + 1);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) g(i, j) = (*this)(i, j);
    g(dim_, dim_) = new_diag;
    *this = g;
  }

  // x' A x
  double quad_form(const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += (*this)(i, j) * x[j];
      s += x[i] * row;
    }
    return s;
  }

  Vec mat_vec(const Vec& x) const {
    Vec y(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += (*this)(i, j) * x[j];
      y[i] = row;
    }
    return y;
  }

 private:
  int dim_ = 0;
  std::vector<double> a_;
};

// Lower-triangular Cholesky factor L with A = L L'.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SymMatrix& a);

  int dim() const { return l_.dim(); }
  const SymMatrix& lower() const { return l_; }

  Vec solve(const Vec& b) const;       // A x = b
  SymMatrix inverse() const;           // A^{-1}
  double log_det() const;              // log |A|
  Vec lower_times(const Vec& z) const; // L z (for Gaussian sampling)

 private:
  SymMatrix l_;
};

// chol_solve: x with A x = b; throws NotPositiveDefinite when A is not PD.
Vec chol_solve(const SymMatrix& a, const Vec& b);

// Digamma, absolute error <= 1e-10 for x > 0 (recurrence + asymptotic series).
double digamma(double x);

double log_sum_exp(const Vec& v);

// Triangular table of log S(n, m), unsigned Stirling numbers of the first
// kind, built with the recurrence S(n+1,m) = n S(n,m) + S(n,m-1) in log
// space. S(n,m) overflows 64-bit integers past n ~ 20, hence logs.
class LogStirlingTable {
 public:
  explicit LogStirlingTable(int n_max, int hard_cap = 10000);

  int n_max() const { return n_max_; }

  // log S(n, m); -inf for the structural zeros (m == 0 with n >= 1, m > n).
  double operator()(int n, int m) const { return rows_[n][m]; }

  void extend_to(int n_max);

 private:
  int n_max_;
  int hard_cap_;
  std::vector<std::vector<double>> rows_;
};

// --- samplers -------------------------------------------------------------

// Inverse Gaussian IG(mean, shape) via the Michael-Schucany-Haas
// transformation-with-rejection method.
double sample_inverse_gaussian(RngStream& rng, double mean, double shape);

// GIG(1/2, 1, chi): draws lambda with lambda^{-1} ~ IG(1/sqrt(chi), 1) and
// inverts. Result clamped to [1e-12, 1e12]; downstream updates divide by
// lambda and the GIG tails are heavy.
double sample_gig_half(RngStream& rng, double chi);

constexpr double kLambdaFloor = 1e-12;
constexpr double kLambdaCap = 1e12;

double sample_gamma(RngStream& rng, double shape, double scale = 1.0);
double sample_beta(RngStream& rng, double a, double b);

// Index k with probability softmax(logits)_k; max-subtracted before exp.
// Ties in the cumulative scan resolve to the lowest index.
int sample_categorical_logits(RngStream& rng, const Vec& logits);

// Draw from N(mean, cov) through the Cholesky factor of cov.
Vec sample_gaussian_vector(RngStream& rng, const Vec& mean, const SymMatrix& cov);

// Weight posterior N(mu, Sigma) over a classifier.
struct GaussianPosterior {
  Vec mu;
  SymMatrix sigma;

  int dim() const { return int(mu.size()); }

  static GaussianPosterior isotropic(int k, double var) {
    return GaussianPosterior{Vec(k, 0.0), SymMatrix(k, var)};
  }
};

}  // namespace bayespa
