#pragma once

#include <memory>

#include "bayespa/medlda.hpp"

namespace bayespa {

// Beta(u_k, v_k) posterior per represented stick; new topics start at
// Beta(1, gamma_hdp).
struct StickPosterior {
  Vec u, v;

  int K_rep() const { return int(u.size()); }
  void grow(double gamma_hdp) {
    u.push_back(1.0);
    v.push_back(gamma_hdp);
  }
};

struct HdpHyper {
  double alpha = 5.0;      // document-level concentration
  double gamma_hdp = 1.0;  // top-level concentration
  double eta = 0.45;       // symmetric topic prior
  double c = 1.0;
  double epsilon = 164.0;
  double v = 1.0;
  int iters = 1;
  int samples = 2;
  int burn = 0;
  bool diag_cov = false;
  int k_cap = 512;        // hard topic cap; hitting it degrades to truncated
  int prune_window = 0;   // batches of zero growth before pruning; 0 = off

  LdaHyper shared() const;
};

// Sampled global sticks for one batch sweep: pi from the stick-breaking
// product, plus the unrepresented remainder mass.
struct SampledSticks {
  Vec pi_bar;
  Vec pi;
  double remainder = 1.0;
};

// Draw pi_bar_k ~ Beta(u_k + sum_d s_dk, v_k + sum_d sum_{j>k} s_dj);
// s_total / s_tail may be empty (prior draw).
SampledSticks sample_sticks(const StickPosterior& sticks, const Vec& s_total, const Vec& s_tail,
                            RngStream& rng);

// Per-document table counts: s_dk in {1..C_dk} with prob ~ S(C_dk, s)(alpha
// pi_k)^s, s_dk = 0 iff C_dk = 0.
void sample_tables(const std::vector<int>& topic_count, const SampledSticks& sticks,
                   double alpha, const LogStirlingTable& table, RngStream& rng,
                   std::vector<int>& s_out);

class OnlineMedHdp : public OnlineMedLda {
 public:
  OnlineMedHdp() = default;
  OnlineMedHdp(int W, const HdpHyper& hyper, int n_tasks = 1, int initial_topics = 1);

  const HdpHyper& hdp_hyper() const { return hdp_; }
  const StickPosterior& sticks() const { return sticks_; }
  StickPosterior& sticks_mutable() { return sticks_; }
  int K_rep() const { return topics_.K(); }
  const std::vector<long>& growth_log() const { return growth_log_; }
  std::vector<long>& growth_log_mutable() { return growth_log_; }
  bool cap_hit() const { return cap_hit_; }

  void process_minibatch(const Corpus& corpus, const MiniBatch& batch, RngStream& rng);

  // Extends every global structure by one topic (Dirichlet row eta, stick
  // Beta(1, gamma), weight coordinate N(0, v^2)); existing entries untouched.
  void grow_topics();

  // --- exposed for tests ---
  // Batch word-topic counts live here during a round (the z conditional is
  // collapsed over the batch, unlike the LDA path).
  struct HdpBatchState {
    std::vector<long> ckw;      // K x W, current batch assignments
    std::vector<long> ck_total; // K
    SampledSticks sticks;
  };
  // Samples token i. Returns k < K after assigning it; returns K (token
  // left unassigned, z[i] = -1) when the new-topic event fires, in which
  // case the caller grows the model and calls finish_new_topic_assignment.
  int sample_z_token_hdp(BatchDoc& doc, size_t i, HdpBatchState& bs, RngStream& rng,
                         bool allow_growth);
  void finish_new_topic_assignment(BatchDoc& doc, size_t i, HdpBatchState& bs, RngStream& rng);

 private:
  HdpHyper hdp_;
  StickPosterior sticks_;
  std::shared_ptr<LogStirlingTable> stirling_;
  Vec stick_u_anchor_, stick_v_anchor_;
  std::vector<long> growth_log_;  // round at which each topic was created
  std::vector<int> stale_rounds_; // per topic, consecutive no-growth batches
  bool cap_hit_ = false;

  void prune_stale_topics();
};

}  // namespace bayespa
