#include "bayespa/medhdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace bayespa {

LdaHyper HdpHyper::shared() const {
  LdaHyper h;
  h.alpha = alpha;  // enters the z conditional as alpha * pi_k
  h.gamma_prior = eta;
  h.c = c;
  h.epsilon = epsilon;
  h.v = v;
  h.iters = iters;
  h.samples = samples;
  h.burn = burn;
  h.diag_cov = diag_cov;
  return h;
}

SampledSticks sample_sticks(const StickPosterior& sticks, const Vec& s_total, const Vec& s_tail,
                            RngStream& rng) {
  const int K = sticks.K_rep();
  SampledSticks out;
  out.pi_bar.resize(K);
  out.pi.resize(K);
  double stick_left = 1.0;
  for (int k = 0; k < K; ++k) {
    const double a = sticks.u[k] + (s_total.empty() ? 0.0 : s_total[k]);
    const double b = sticks.v[k] + (s_tail.empty() ? 0.0 : s_tail[k]);
    out.pi_bar[k] = sample_beta(rng, a, b);
    out.pi[k] = out.pi_bar[k] * stick_left;
    stick_left *= 1.0 - out.pi_bar[k];
  }
  out.remainder = std::max(stick_left, 0.0);
  return out;
}

void sample_tables(const std::vector<int>& topic_count, const SampledSticks& sticks,
                   double alpha, const LogStirlingTable& table, RngStream& rng,
                   std::vector<int>& s_out) {
  const int K = int(topic_count.size());
  s_out.assign(K, 0);
  for (int k = 0; k < K; ++k) {
    const int n = topic_count[k];
    if (n == 0) continue;
    if (n == 1) {
      s_out[k] = 1;
      continue;
    }
    const double log_api = std::log(alpha * sticks.pi[k]);
    Vec logits(n);
    for (int s = 1; s <= n; ++s) logits[s - 1] = table(n, s) + s * log_api;
    s_out[k] = 1 + sample_categorical_logits(rng, logits);
  }
}

OnlineMedHdp::OnlineMedHdp(int W, const HdpHyper& hyper, int n_tasks, int initial_topics)
    : OnlineMedLda(initial_topics, W, hyper.shared(), n_tasks), hdp_(hyper) {
  if (initial_topics < 1 || initial_topics > hyper.k_cap)
    throw NumericError("OnlineMedHdp: initial topic count out of range");
  for (int k = 0; k < initial_topics; ++k) {
    sticks_.grow(hdp_.gamma_hdp);
    growth_log_.push_back(0);
  }
  stale_rounds_.assign(initial_topics, 0);
}

void OnlineMedHdp::grow_topics() {
  if (topics_.K() >= hdp_.k_cap) throw NumericError("grow_topics: topic cap reached");
  topics_.grow(hdp_.eta);
  for (auto& h : heads_) h.grow(hyper_.v * hyper_.v);
  sticks_.grow(hdp_.gamma_hdp);
  growth_log_.push_back(round_);
  stale_rounds_.push_back(0);
}

int OnlineMedHdp::sample_z_token_hdp(BatchDoc& doc, size_t i, HdpBatchState& bs, RngStream& rng,
                                     bool allow_growth) {
  const int K = topics_.K();
  const int W = topics_.W();
  const int w = doc.words[i];
  const int old_k = doc.z[i];
  if (old_k >= 0) {
    --doc.topic_count[old_k];
    --bs.ckw[size_t(old_k) * W + w];
    --bs.ck_total[old_k];
  }

  const double rem = std::max(bs.sticks.remainder, 0.0);
  const bool growth = allow_growth && K < hdp_.k_cap && rem > 0.0;
  Vec logits(K + (growth ? 1 : 0));
  for (int k = 0; k < K; ++k) {
    logits[k] = std::log(hdp_.alpha * bs.sticks.pi[k] + doc.topic_count[k]) +
                std::log(bs.ckw[size_t(k) * W + w] + topics_.delta(k, w)) -
                std::log(bs.ck_total[k] + topics_.row_sum(k));
  }
  if (hyper_.c > 0.0) {
    for (size_t task = 0; task < heads_.size(); ++task) {
      if (doc.y[task] == 0) continue;
      for (int k = 0; k < K; ++k)
        logits[k] += supervision_logit(heads_[task], doc.topic_count, k, doc.y[task],
                                       doc.lambda[task], doc.n_d, hyper_.c, hyper_.epsilon);
    }
  }
  if (growth) logits[K] = std::log(hdp_.alpha * rem / W);

  const int k = sample_categorical_logits(rng, logits);
  if (k == K) {
    doc.z[i] = -1;
    return K;
  }
  doc.z[i] = k;
  ++doc.topic_count[k];
  ++bs.ckw[size_t(k) * W + w];
  ++bs.ck_total[k];
  return k;
}

void OnlineMedHdp::finish_new_topic_assignment(BatchDoc& doc, size_t i, HdpBatchState& bs,
                                               RngStream& rng) {
  const int W = topics_.W();
  // Split the remainder stick for the newborn topic with a prior draw.
  const double pb = sample_beta(rng, 1.0, hdp_.gamma_hdp);
  bs.sticks.pi_bar.push_back(pb);
  bs.sticks.pi.push_back(pb * bs.sticks.remainder);
  bs.sticks.remainder *= 1.0 - pb;
  bs.ckw.resize(size_t(topics_.K()) * W, 0);
  bs.ck_total.resize(topics_.K(), 0);

  const int k = topics_.K() - 1;
  doc.z[i] = k;
  ++doc.topic_count[k];
  ++bs.ckw[size_t(k) * W + doc.words[i]];
  ++bs.ck_total[k];
}

void OnlineMedHdp::process_minibatch(const Corpus& corpus, const MiniBatch& batch,
                                     RngStream& rng) {
  const int W = topics_.W();

  std::vector<BatchDoc> docs;
  docs.reserve(batch.indices.size());
  int max_len = 1;
  for (size_t idx : batch.indices) {
    if (idx >= corpus.size()) throw DataError("mini-batch index out of range");
    docs.push_back(make_batch_doc(corpus.docs[idx], idx));
    max_len = std::max(max_len, docs.back().n_d);
  }
  // Lazily sized to the longest document seen so far.
  if (!stirling_) stirling_ = std::make_shared<LogStirlingTable>(max_len);
  stirling_->extend_to(max_len);

  HdpBatchState bs;
  bs.ckw.assign(size_t(topics_.K()) * W, 0);
  bs.ck_total.assign(topics_.K(), 0);

  for (auto& doc : docs) {
    init_doc_state(doc, rng);
    for (size_t i = 0; i < doc.z.size(); ++i) {
      ++bs.ckw[size_t(doc.z[i]) * W + doc.words[i]];
      ++bs.ck_total[doc.z[i]];
    }
  }
  std::vector<std::vector<int>> tables(docs.size());
  for (auto& t : tables) t.assign(topics_.K(), 0);

  capture_anchor();
  stick_u_anchor_ = sticks_.u;
  stick_v_anchor_ = sticks_.v;
  const int kept_per_iter = hyper_.samples - hyper_.burn;
  const size_t old_k_start = size_t(topics_.K());

  for (int iter = 0; iter < hyper_.iters; ++iter) {
    BatchStats stats;
    stats.init(topics_.K(), W, n_tasks());
    stats.kept = kept_per_iter;
    Vec s_mean_total, s_mean_tail;  // summed over docs and kept samples

    for (int j = 0; j < hyper_.samples; ++j) {
      // One pi_bar draw per full-batch sweep, conditioned on all current
      // table counts.
      Vec s_total(topics_.K(), 0.0), s_tail(topics_.K(), 0.0);
      bool have_tables = false;
      for (const auto& t : tables)
        for (size_t k = 0; k < t.size(); ++k)
          if (t[k] > 0) {
            have_tables = true;
            s_total[k] += t[k];
          }
      if (have_tables) {
        for (size_t k = 0; k < s_total.size(); ++k) {
          double tail = 0.0;
          for (size_t jj = k + 1; jj < s_total.size(); ++jj) tail += s_total[jj];
          s_tail[k] = tail;
        }
        bs.sticks = bayespa::sample_sticks(sticks_, s_total, s_tail, rng);
      } else {
        bs.sticks = bayespa::sample_sticks(sticks_, {}, {}, rng);
      }

      if (topics_.K() >= hdp_.k_cap && !cap_hit_) {
        cap_hit_ = true;
        std::cerr << "warning: topic cap " << hdp_.k_cap << " reached; continuing truncated\n";
      }
      for (size_t d = 0; d < docs.size(); ++d) {
        BatchDoc& doc = docs[d];
        for (size_t i = 0; i < doc.z.size(); ++i) {
          const int k = sample_z_token_hdp(doc, i, bs, rng, /*allow_growth=*/true);
          if (k == topics_.K()) {
            grow_topics();
            // Stop-the-world extension of every K-sized batch structure.
            anchor_.delta.insert(anchor_.delta.end(), size_t(W), hdp_.eta);
            for (size_t task = 0; task < heads_.size(); ++task) {
              anchor_.prior_precision[task].grow(1.0 / (hyper_.v * hyper_.v));
              anchor_.prior_precision_mu[task].push_back(0.0);
            }
            stick_u_anchor_.push_back(1.0);
            stick_v_anchor_.push_back(hdp_.gamma_hdp);
            for (auto& dd : docs) dd.topic_count.push_back(0);
            for (auto& t : tables) t.push_back(0);
            stats.topic_word.resize(size_t(topics_.K()) * W, 0.0);
            for (int task = 0; task < n_tasks(); ++task) {
              stats.precision_add[task].grow(0.0);
              stats.linear_add[task].push_back(0.0);
            }
            stats.K = topics_.K();
            if (!s_mean_total.empty()) {
              s_mean_total.push_back(0.0);
              s_mean_tail.push_back(0.0);
            }
            finish_new_topic_assignment(doc, i, bs, rng);
          }
        }
        sample_tables(doc.topic_count, bs.sticks, hdp_.alpha, *stirling_, rng, tables[d]);
        sample_doc_lambdas(doc, rng);
      }

      if (j < hyper_.burn) continue;
      if (s_mean_total.empty()) {
        s_mean_total.assign(topics_.K(), 0.0);
        s_mean_tail.assign(topics_.K(), 0.0);
      }
      for (size_t d = 0; d < docs.size(); ++d) {
        const BatchDoc& doc = docs[d];
        for (size_t i = 0; i < doc.z.size(); ++i)
          stats.topic_word[size_t(doc.z[i]) * W + doc.words[i]] += 1.0;
        if (hyper_.c > 0.0) stats.merge_doc_weights(doc, hyper_.c, hyper_.epsilon);
        double tail = 0.0;
        for (int k = topics_.K() - 1; k >= 0; --k) {
          s_mean_total[k] += tables[d][k];
          s_mean_tail[k] += tail;
          tail += tables[d][k];
        }
      }
    }

    apply_global_updates(stats);
    const double inv_kept = 1.0 / double(kept_per_iter);
    sticks_.u = stick_u_anchor_;
    sticks_.v = stick_v_anchor_;
    for (size_t k = 0; k < sticks_.u.size(); ++k) {
      if (k < s_mean_total.size()) {
        sticks_.u[k] += s_mean_total[k] * inv_kept;
        sticks_.v[k] += s_mean_tail[k] * inv_kept;
      }
    }
  }

  // Track per-topic staleness for optional pruning. A topic that gains
  // less than half a token of expected mass in a round counts as inactive.
  for (int k = 0; k < topics_.K(); ++k) {
    const bool grew =
        size_t(k) >= old_k_start ||
        topics_.row_sum(k) >
            std::accumulate(anchor_.delta.begin() + size_t(k) * W,
                            anchor_.delta.begin() + size_t(k + 1) * W, 0.0) + 0.5;
    stale_rounds_[k] = grew ? 0 : stale_rounds_[k] + 1;
  }
  ++round_;
  if (hdp_.prune_window > 0) prune_stale_topics();
}

void OnlineMedHdp::prune_stale_topics() {
  std::vector<int> keep;
  for (int k = 0; k < topics_.K(); ++k)
    if (stale_rounds_[k] < hdp_.prune_window) keep.push_back(k);
  if (int(keep.size()) == topics_.K() || keep.empty()) return;

  const int W = topics_.W();
  TopicPosterior pruned(int(keep.size()), W, hdp_.eta);
  StickPosterior new_sticks;
  std::vector<long> new_log;
  std::vector<int> new_stale;
  for (size_t nk = 0; nk < keep.size(); ++nk) {
    for (int w = 0; w < W; ++w) pruned.delta(int(nk), w) = topics_.delta(keep[nk], w);
    new_sticks.u.push_back(sticks_.u[keep[nk]]);
    new_sticks.v.push_back(sticks_.v[keep[nk]]);
    new_log.push_back(growth_log_[keep[nk]]);
    new_stale.push_back(stale_rounds_[keep[nk]]);
  }
  pruned.recompute();
  topics_ = std::move(pruned);
  sticks_ = std::move(new_sticks);
  growth_log_ = std::move(new_log);
  stale_rounds_ = std::move(new_stale);
  for (auto& h : heads_) {
    GaussianPosterior np;
    np.mu.resize(keep.size());
    np.sigma = SymMatrix(int(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) {
      np.mu[i] = h.post.mu[keep[i]];
      for (size_t j = 0; j < keep.size(); ++j) np.sigma(int(i), int(j)) = h.post.sigma(keep[i], keep[j]);
    }
    h.post = std::move(np);
    h.refresh_cache();
  }
}

}  // namespace bayespa
