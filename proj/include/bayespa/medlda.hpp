#pragma once

#include <optional>

#include "bayespa/corpus.hpp"
#include "bayespa/numerics.hpp"

namespace bayespa {

// Per-topic Dirichlet pseudo-counts Delta (K x W) with the cached digamma
// expectations Lambda_kw = Psi(Delta_kw) - Psi(sum_w Delta_kw).
class TopicPosterior {
 public:
  TopicPosterior() = default;
  TopicPosterior(int K, int W, double prior);

  int K() const { return K_; }
  int W() const { return W_; }

  double delta(int k, int w) const { return delta_[size_t(k) * W_ + w]; }
  double& delta(int k, int w) { return delta_[size_t(k) * W_ + w]; }
  double row_sum(int k) const { return row_sum_[k]; }
  double lambda(int k, int w) const { return lambda_[size_t(k) * W_ + w]; }

  const std::vector<double>& delta_flat() const { return delta_; }
  std::vector<double>& delta_flat() { return delta_; }

  // Refreshes row sums and the Lambda cache after edits to delta.
  void recompute();

  // Appends one topic row filled with `prior`.
  void grow(double prior);

  // E[Phi]_kw = Delta_kw / row_sum_k
  double mean_phi(int k, int w) const { return delta(k, w) / row_sum_[k]; }

 private:
  int K_ = 0, W_ = 0;
  std::vector<double> delta_;
  std::vector<double> lambda_;
  std::vector<double> row_sum_;
};

struct LdaHyper {
  double alpha = 0.025;       // symmetric doc-topic prior (1/K is the usual choice)
  double gamma_prior = 0.5;   // symmetric topic Dirichlet prior
  double c = 1.0;             // aggressiveness; c == 0 turns supervision off
  double epsilon = 164.0;     // margin
  double v = 1.0;             // prior weight std
  int iters = 1;              // outer iterations I
  int samples = 2;            // Gibbs samples J per iteration
  int burn = 0;               // discarded burn-in samples (< J)
  bool diag_cov = false;      // keep only diag(Sigma); labeled approximation
  bool reinit_z_per_iter = false;  // default: persist Z across outer iters

  void check() const;
};

// One max-margin head: weight posterior for a single task plus the batch
// caches the samplers read. `second_moment` is mu mu' + Sigma.
struct WeightHead {
  GaussianPosterior post;
  SymMatrix second_moment;

  void refresh_cache();
  void grow(double prior_var);
};

// Expanded per-document sampling state for one mini-batch.
struct BatchDoc {
  size_t corpus_index = 0;
  std::vector<int> words;        // one entry per token occurrence
  std::vector<int> z;            // topic id per token occurrence
  std::vector<int> topic_count;  // C_d, length K
  std::vector<double> lambda;    // one augmentation variable per task
  std::vector<int> y;            // label per task; 0 = missing
  int n_d = 0;

  std::vector<double> zbar() const;
};

// Supervision exponent of the z conditional for one (token, topic) under a
// single head; shared verbatim by the HDP sampler.
double supervision_logit(const WeightHead& head, const std::vector<int>& topic_count_no_i,
                         int k, int y, double lambda_d, int n_d, double c, double epsilon);

// chi parameter of the GIG conditional for lambda_d.
double lambda_chi(const Vec& zbar, const GaussianPosterior& post, int y, double c,
                  double epsilon);

// Sufficient statistics accumulated over kept Gibbs samples.
struct BatchStats {
  int kept = 0;
  std::vector<double> topic_word;               // K x W gamma-hat counts
  std::vector<SymMatrix> precision_add;         // per task: sum lambda^-1 zbar zbar'
  std::vector<Vec> linear_add;                  // per task: sum y (1 + c eps / lambda) zbar
  int K = 0, W = 0;

  void init(int K, int W, int tasks);
  void merge_doc_weights(const BatchDoc& doc, double c, double epsilon);
};

// Online MedLDA (single- or multi-task: tasks share the topic model, each
// task owns its weight posterior and per-doc augmentation variable).
class OnlineMedLda {
 public:
  OnlineMedLda() = default;
  OnlineMedLda(int K, int W, const LdaHyper& hyper, int n_tasks = 1);

  const TopicPosterior& topics() const { return topics_; }
  TopicPosterior& topics() { return topics_; }
  const WeightHead& head(int task = 0) const { return heads_[task]; }
  std::vector<WeightHead>& heads() { return heads_; }
  const std::vector<WeightHead>& heads() const { return heads_; }
  const LdaHyper& hyper() const { return hyper_; }
  int n_tasks() const { return int(heads_.size()); }
  long round() const { return round_; }
  long& round() { return round_; }

  void set_threads(int n) { threads_ = n; }

  // One BayesPA round over the mini-batch (Gibbs local sweeps + closed-form
  // global updates). Docs without a label for a task are excluded from that
  // task's loss terms; supervision is off entirely when hyper.c == 0.
  void process_minibatch(const Corpus& corpus, const MiniBatch& batch, RngStream& rng);

  // --- pieces exposed for direct testing ---
  BatchDoc make_batch_doc(const SparseDoc& doc, size_t corpus_index) const;
  void init_doc_state(BatchDoc& doc, RngStream& rng) const;
  int sample_z_token(BatchDoc& doc, size_t i, RngStream& rng) const;
  void sample_doc_lambdas(BatchDoc& doc, RngStream& rng) const;
  void sweep_doc(BatchDoc& doc, RngStream& rng) const;

  void apply_global_updates(const BatchStats& stats);

 protected:
  // Round-start anchors: global updates add batch expectations to the round-t
  // posterior, so outer iterations are re-anchored, not compounded.
  struct RoundAnchor {
    std::vector<double> delta;
    std::vector<SymMatrix> prior_precision;
    std::vector<Vec> prior_precision_mu;
  };
  void capture_anchor();

  TopicPosterior topics_;
  std::vector<WeightHead> heads_;
  LdaHyper hyper_;
  long round_ = 0;
  int threads_ = 1;
  RoundAnchor anchor_;
};

}  // namespace bayespa
