#pragma once

#include "bayespa/numerics.hpp"

namespace bayespa {

// Point-estimate PA state; doubles as the mean of the N(mu, I) posterior
// kept by the averaging-classifier BayesPA.
struct PaState {
  Vec mu;
  long t = 0;

  static PaState zeros(int dim) { return PaState{Vec(dim, 0.0), 0}; }
};

struct PaConfig {
  double epsilon = 1.0;  // margin, >= 0
  double c = 1.0;        // aggressiveness, > 0
};

double hinge_loss(const Vec& mu, const Vec& x, int y, double epsilon);

// Soft-margin PA-I step: tau = clamp((eps - y mu.x)/x.x, 0, c),
// mu' = mu + tau y x. Passive when the hinge loss at mu is zero.
PaState pa_update(const PaState& state, const PaConfig& cfg, const Vec& x, int y);

// Averaging-classifier BayesPA with q_t(w) = N(mu_t, I). The posterior
// mean moves exactly like pa_update's weight; covariance stays I forever.
struct BayesPaAvgResult {
  PaState state;
  GaussianPosterior posterior;  // N(mu', I)
};
BayesPaAvgResult bayespa_avg_update(const PaState& state, const PaConfig& cfg, const Vec& x,
                                    int y);

// Monte Carlo estimate of the Gibbs-classifier expected hinge loss
// E_q[(eps - y w.x)_+] under N(mu, Sigma). Only w.x matters, so the scalar
// projection N(mu.x, x'Sigma x) is sampled directly.
double gibbs_hinge_mc(const GaussianPosterior& posterior, const Vec& x, int y, double epsilon,
                      long n_samples, RngStream& rng);

}  // namespace bayespa
