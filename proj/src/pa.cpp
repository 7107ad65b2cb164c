#include "bayespa/pa.hpp"

#include <algorithm>
#include <cmath>

namespace bayespa {

namespace {
double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

double hinge_loss(const Vec& mu, const Vec& x, int y, double epsilon) {
  return std::max(0.0, epsilon - y * dot(mu, x));
}

PaState pa_update(const PaState& state, const PaConfig& cfg, const Vec& x, int y) {
  const double xx = dot(x, x);
  if (xx <= 0.0) throw NumericError("pa_update: zero input vector");
  const double margin = cfg.epsilon - y * dot(state.mu, x);
  const double tau = std::clamp(margin / xx, 0.0, cfg.c);
  PaState next{state.mu, state.t + 1};
  if (margin > 0.0) {
    for (size_t i = 0; i < x.size(); ++i) next.mu[i] += tau * y * x[i];
  }
  return next;
}

BayesPaAvgResult bayespa_avg_update(const PaState& state, const PaConfig& cfg, const Vec& x,
                                    int y) {
  // KKT of the dual: maximize tau*eps - tau^2 x.x / 2 - tau y mu.x on
  // [0, c], whose argmax is the same clamped tau as the PA-I step.
  PaState next = pa_update(state, cfg, x, y);
  BayesPaAvgResult r;
  r.posterior = GaussianPosterior{next.mu, SymMatrix::identity(int(next.mu.size()))};
  r.state = std::move(next);
  return r;
}

double gibbs_hinge_mc(const GaussianPosterior& posterior, const Vec& x, int y, double epsilon,
                      long n_samples, RngStream& rng) {
  if (n_samples < 1) throw NumericError("gibbs_hinge_mc: n_samples must be >= 1");
  if (posterior.dim() != int(x.size())) throw NumericError("gibbs_hinge_mc: dimension mismatch");
  const double m = dot(posterior.mu, x);
  const double var = std::max(0.0, posterior.sigma.quad_form(x));
  const double sd = std::sqrt(var);
  double acc = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const double s = m + sd * rng.normal();
    acc += std::max(0.0, epsilon - y * s);
  }
  return acc / double(n_samples);
}

}  // namespace bayespa
