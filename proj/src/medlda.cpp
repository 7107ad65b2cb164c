#include "bayespa/medlda.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace bayespa {

TopicPosterior::TopicPosterior(int K, int W, double prior)
    : K_(K), W_(W), delta_(size_t(K) * W, prior), lambda_(size_t(K) * W, 0.0), row_sum_(K, 0.0) {
  if (K < 1 || W < 1) throw NumericError("TopicPosterior: K and W must be >= 1");
  if (!(prior > 0.0)) throw NumericError("TopicPosterior: prior must be > 0");
  recompute();
}

void TopicPosterior::recompute() {
  for (int k = 0; k < K_; ++k) {
    double s = 0.0;
    for (int w = 0; w < W_; ++w) s += delta(k, w);
    row_sum_[k] = s;
    const double psi_sum = digamma(s);
    for (int w = 0; w < W_; ++w) lambda_[size_t(k) * W_ + w] = digamma(delta(k, w)) - psi_sum;
  }
}

void TopicPosterior::grow(double prior) {
  delta_.insert(delta_.end(), size_t(W_), prior);
  lambda_.insert(lambda_.end(), size_t(W_), 0.0);
  row_sum_.push_back(0.0);
  ++K_;
  // Refresh only the new row; old rows are untouched by growth.
  const int k = K_ - 1;
  row_sum_[k] = prior * W_;
  const double lam = digamma(prior) - digamma(row_sum_[k]);
  for (int w = 0; w < W_; ++w) lambda_[size_t(k) * W_ + w] = lam;
}

void LdaHyper::check() const {
  if (!(alpha > 0.0) || !(gamma_prior > 0.0) || !(v > 0.0) || !(epsilon > 0.0) || c < 0.0)
    throw NumericError("LdaHyper: hyperparameters out of domain");
  if (iters < 1 || samples < 1 || burn < 0 || burn >= samples)
    throw NumericError("LdaHyper: need iters >= 1, samples >= 1, 0 <= burn < samples");
}

void WeightHead::refresh_cache() {
  const int k = post.dim();
  second_moment = post.sigma;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) second_moment(i, j) += post.mu[i] * post.mu[j];
}

void WeightHead::grow(double prior_var) {
  post.mu.push_back(0.0);
  post.sigma.grow(prior_var);
  refresh_cache();
}

std::vector<double> BatchDoc::zbar() const {
  std::vector<double> zb(topic_count.size());
  for (size_t k = 0; k < zb.size(); ++k) zb[k] = double(topic_count[k]) / double(n_d);
  return zb;
}

double supervision_logit(const WeightHead& head, const std::vector<int>& topic_count_no_i,
                         int k, int y, double lambda_d, int n_d, double c, double epsilon) {
  const SymMatrix& m = head.second_moment;
  double dot_mc = 0.0;
  for (size_t j = 0; j < topic_count_no_i.size(); ++j)
    if (topic_count_no_i[j] != 0) dot_mc += m(k, int(j)) * topic_count_no_i[j];
  const double n = double(n_d);
  return c * y * (c * epsilon + lambda_d) * head.post.mu[k] / (n * lambda_d) -
         c * c * (m(k, k) + 2.0 * dot_mc) / (2.0 * n * n * lambda_d);
}

double lambda_chi(const Vec& zbar, const GaussianPosterior& post, int y, double c,
                  double epsilon) {
  double zeta = epsilon;
  for (size_t k = 0; k < zbar.size(); ++k) zeta -= y * zbar[k] * post.mu[k];
  const double quad = post.sigma.quad_form(zbar);
  const double chi = c * c * (zeta * zeta + quad);
  if (!(chi > 0.0)) throw NumericError("lambda_chi: chi <= 0 (degenerate posterior)");
  return chi;
}

void BatchStats::init(int K_, int W_, int tasks) {
  K = K_;
  W = W_;
  kept = 0;
  topic_word.assign(size_t(K) * W, 0.0);
  precision_add.assign(tasks, SymMatrix(K));
  linear_add.assign(tasks, Vec(K, 0.0));
}

void BatchStats::merge_doc_weights(const BatchDoc& doc, double c, double epsilon) {
  const Vec zb = doc.zbar();
  for (size_t task = 0; task < doc.y.size(); ++task) {
    if (doc.y[task] == 0) continue;
    const double inv_lambda = 1.0 / doc.lambda[task];
    SymMatrix& p = precision_add[task];
    for (int i = 0; i < K; ++i) {
      if (zb[i] == 0.0) continue;
      const double zi = inv_lambda * zb[i];
      for (int j = 0; j < K; ++j) p(i, j) += zi * zb[j];
    }
    Vec& l = linear_add[task];
    const double coef = doc.y[task] * (1.0 + c * epsilon * inv_lambda);
    for (int i = 0; i < K; ++i) l[i] += coef * zb[i];
  }
}

OnlineMedLda::OnlineMedLda(int K, int W, const LdaHyper& hyper, int n_tasks) : hyper_(hyper) {
  hyper.check();
  if (n_tasks < 1) throw NumericError("OnlineMedLda: need at least one task");
  topics_ = TopicPosterior(K, W, hyper.gamma_prior);
  heads_.resize(n_tasks);
  for (auto& h : heads_) {
    h.post = GaussianPosterior::isotropic(K, hyper.v * hyper.v);
    h.refresh_cache();
  }
}

BatchDoc OnlineMedLda::make_batch_doc(const SparseDoc& doc, size_t corpus_index) const {
  BatchDoc b;
  b.corpus_index = corpus_index;
  b.n_d = doc.n_d;
  b.words.reserve(doc.n_d);
  for (auto [w, c] : doc.tokens)
    for (int r = 0; r < c; ++r) b.words.push_back(w);
  b.z.assign(b.words.size(), 0);
  b.topic_count.assign(topics_.K(), 0);
  b.lambda.assign(heads_.size(), 1.0);
  b.y.assign(heads_.size(), 0);
  for (size_t task = 0; task < heads_.size(); ++task)
    if (auto l = doc.label(int(task))) b.y[task] = *l;
  return b;
}

void OnlineMedLda::init_doc_state(BatchDoc& doc, RngStream& rng) const {
  std::fill(doc.topic_count.begin(), doc.topic_count.end(), 0);
  const int K = topics_.K();
  for (size_t i = 0; i < doc.z.size(); ++i) {
    doc.z[i] = int(rng.next_u64() % K);
    ++doc.topic_count[doc.z[i]];
  }
  std::fill(doc.lambda.begin(), doc.lambda.end(), 1.0);
}

int OnlineMedLda::sample_z_token(BatchDoc& doc, size_t i, RngStream& rng) const {
  const int K = topics_.K();
  const int w = doc.words[i];
  --doc.topic_count[doc.z[i]];

  Vec logits(K);
  for (int k = 0; k < K; ++k)
    logits[k] = std::log(hyper_.alpha + doc.topic_count[k]) + topics_.lambda(k, w);
  if (hyper_.c > 0.0) {
    for (size_t task = 0; task < heads_.size(); ++task) {
      if (doc.y[task] == 0) continue;
      for (int k = 0; k < K; ++k)
        logits[k] += supervision_logit(heads_[task], doc.topic_count, k, doc.y[task],
                                       doc.lambda[task], doc.n_d, hyper_.c, hyper_.epsilon);
    }
  }
  const int k = sample_categorical_logits(rng, logits);
  doc.z[i] = k;
  ++doc.topic_count[k];
  return k;
}

void OnlineMedLda::sample_doc_lambdas(BatchDoc& doc, RngStream& rng) const {
  if (hyper_.c == 0.0) return;
  const Vec zb = doc.zbar();
  for (size_t task = 0; task < heads_.size(); ++task) {
    if (doc.y[task] == 0) continue;
    const double chi =
        lambda_chi(zb, heads_[task].post, doc.y[task], hyper_.c, hyper_.epsilon);
    doc.lambda[task] = sample_gig_half(rng, chi);
  }
}

void OnlineMedLda::sweep_doc(BatchDoc& doc, RngStream& rng) const {
  for (size_t i = 0; i < doc.z.size(); ++i) sample_z_token(doc, i, rng);
  sample_doc_lambdas(doc, rng);
}

void OnlineMedLda::capture_anchor() {
  anchor_.delta = topics_.delta_flat();
  anchor_.prior_precision.clear();
  anchor_.prior_precision_mu.clear();
  for (const auto& h : heads_) {
    SymMatrix prec;
    if (hyper_.diag_cov) {
      prec = SymMatrix(h.post.dim());
      for (int i = 0; i < h.post.dim(); ++i) prec(i, i) = 1.0 / h.post.sigma(i, i);
    } else {
      prec = CholeskyFactor(h.post.sigma).inverse();
    }
    anchor_.prior_precision_mu.push_back(prec.mat_vec(h.post.mu));
    anchor_.prior_precision.push_back(std::move(prec));
  }
}

void OnlineMedLda::apply_global_updates(const BatchStats& stats) {
  const double inv_kept = stats.kept > 0 ? 1.0 / double(stats.kept) : 0.0;
  const int K = topics_.K();

  auto& delta = topics_.delta_flat();
  delta = anchor_.delta;
  for (size_t i = 0; i < delta.size(); ++i) delta[i] += stats.topic_word[i] * inv_kept;
  topics_.recompute();

  if (hyper_.c > 0.0) {
    const double c2 = hyper_.c * hyper_.c;
    for (size_t task = 0; task < heads_.size(); ++task) {
      SymMatrix prec = anchor_.prior_precision[task];
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          prec(i, j) += c2 * inv_kept * stats.precision_add[task](i, j);
      Vec b = anchor_.prior_precision_mu[task];
      for (int i = 0; i < K; ++i) b[i] += hyper_.c * inv_kept * stats.linear_add[task][i];
      if (hyper_.diag_cov) {
        GaussianPosterior& post = heads_[task].post;
        SymMatrix sigma(K);
        for (int i = 0; i < K; ++i) {
          if (!(prec(i, i) > 0.0)) throw NotPositiveDefinite(i);
          sigma(i, i) = 1.0 / prec(i, i);
          post.mu[i] = sigma(i, i) * b[i];
        }
        post.sigma = std::move(sigma);
      } else {
        CholeskyFactor chol(prec);  // throws NotPositiveDefinite on NaN contamination
        heads_[task].post.sigma = chol.inverse();
        heads_[task].post.mu = chol.solve(b);
      }
      heads_[task].refresh_cache();
    }
  }
}

void OnlineMedLda::process_minibatch(const Corpus& corpus, const MiniBatch& batch,
                                     RngStream& rng) {
  const int K = topics_.K();
  const int W = topics_.W();

  std::vector<BatchDoc> docs;
  std::vector<RngStream> doc_rngs;
  docs.reserve(batch.indices.size());
  for (size_t idx : batch.indices) {
    if (idx >= corpus.size()) throw DataError("mini-batch index out of range");
    docs.push_back(make_batch_doc(corpus.docs[idx], idx));
    doc_rngs.emplace_back(rng.next_u64());
  }
  for (size_t d = 0; d < docs.size(); ++d) init_doc_state(docs[d], doc_rngs[d]);

  capture_anchor();
  const int kept_per_iter = hyper_.samples - hyper_.burn;

  for (int iter = 0; iter < hyper_.iters; ++iter) {
    if (hyper_.reinit_z_per_iter && iter > 0)
      for (size_t d = 0; d < docs.size(); ++d) init_doc_state(docs[d], doc_rngs[d]);

    BatchStats stats;
    stats.init(K, W, n_tasks());
    stats.kept = kept_per_iter;

    // Token-level gamma-hat counts per doc, merged after sampling.
    std::vector<std::vector<int>> token_topic(docs.size());
    std::vector<BatchStats> doc_weight_stats(docs.size());

    auto run_doc = [&](size_t d) {
      BatchDoc& doc = docs[d];
      token_topic[d].assign(doc.z.size() * size_t(K), 0);
      doc_weight_stats[d].init(K, 0, n_tasks());
      for (int j = 0; j < hyper_.samples; ++j) {
        sweep_doc(doc, doc_rngs[d]);
        if (j < hyper_.burn) continue;
        for (size_t i = 0; i < doc.z.size(); ++i) ++token_topic[d][i * K + doc.z[i]];
        if (hyper_.c > 0.0) doc_weight_stats[d].merge_doc_weights(doc, hyper_.c, hyper_.epsilon);
      }
    };

    if (threads_ > 1 && docs.size() > 1) {
      const size_t n_threads = std::min<size_t>(threads_, docs.size());
      std::vector<std::thread> pool;
      for (size_t tix = 0; tix < n_threads; ++tix)
        pool.emplace_back([&, tix] {
          for (size_t d = tix; d < docs.size(); d += n_threads) run_doc(d);
        });
      for (auto& th : pool) th.join();
    } else {
      for (size_t d = 0; d < docs.size(); ++d) run_doc(d);
    }

    for (size_t d = 0; d < docs.size(); ++d) {
      const BatchDoc& doc = docs[d];
      for (size_t i = 0; i < doc.z.size(); ++i) {
        const int w = doc.words[i];
        for (int k = 0; k < K; ++k)
          stats.topic_word[size_t(k) * W + w] += token_topic[d][i * K + k];
      }
      if (hyper_.c > 0.0) {
        for (int task = 0; task < n_tasks(); ++task) {
          for (int i = 0; i < K; ++i) {
            stats.linear_add[task][i] += doc_weight_stats[d].linear_add[task][i];
            for (int j = 0; j < K; ++j)
              stats.precision_add[task](i, j) += doc_weight_stats[d].precision_add[task](i, j);
          }
        }
      }
    }

    apply_global_updates(stats);
  }
  ++round_;
}

}  // namespace bayespa
