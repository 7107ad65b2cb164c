#include "bayespa/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace bayespa {

Vec infer_zbar_test(const SparseDoc& doc, const TopicPosterior& topics, const InferConfig& cfg,
                    RngStream& rng, long* oov_count) {
  const int K = topics.K();
  std::vector<int> words;
  long oov = 0;
  for (auto [w, c] : doc.tokens) {
    if (w < 0 || w >= topics.W()) {
      oov += c;
      continue;
    }
    for (int r = 0; r < c; ++r) words.push_back(w);
  }
  if (oov_count) *oov_count = oov;
  if (words.empty()) return Vec(K, 1.0 / K);

  std::vector<int> z(words.size());
  std::vector<int> count(K, 0);
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = int(rng.next_u64() % K);
    ++count[z[i]];
  }

  Vec zbar_acc(K, 0.0);
  Vec logits(K);
  const int sweeps = cfg.burn + cfg.keep;
  for (int s = 0; s < sweeps; ++s) {
    for (size_t i = 0; i < z.size(); ++i) {
      --count[z[i]];
      for (int k = 0; k < K; ++k)
        logits[k] = std::log(cfg.alpha + count[k]) + std::log(topics.mean_phi(k, words[i]));
      z[i] = sample_categorical_logits(rng, logits);
      ++count[z[i]];
    }
    if (s >= cfg.burn)
      for (int k = 0; k < K; ++k) zbar_acc[k] += double(count[k]) / double(words.size());
  }
  for (auto& v : zbar_acc) v /= double(cfg.keep);
  return zbar_acc;
}

Prediction predict_binary(const GaussianPosterior& head, const Vec& zbar, PredictMode mode,
                          RngStream* rng) {
  if (head.dim() != int(zbar.size())) throw NumericError("predict_binary: dimension mismatch");
  Vec w = head.mu;
  if (mode == PredictMode::Sampled) {
    if (!rng) throw NumericError("predict_binary: sampled mode needs an rng");
    // Degenerate (zero) covariance falls back to the mean.
    bool zero = true;
    for (int i = 0; i < head.dim() && zero; ++i)
      for (int j = 0; j < head.dim(); ++j)
        if (head.sigma(i, j) != 0.0) {
          zero = false;
          break;
        }
    if (!zero) w = sample_gaussian_vector(*rng, head.mu, head.sigma);
  }
  double score = 0.0;
  for (size_t i = 0; i < zbar.size(); ++i) score += w[i] * zbar[i];
  return Prediction{score >= 0.0 ? 1 : -1, score};
}

double Metrics::macro_f1() const {
  if (per_task.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : per_task) s += t.f1;
  return s / double(per_task.size());
}

static TaskMetrics finish_task(TaskMetrics t) {
  const long pp = t.tp + t.fp;
  const long ap = t.tp + t.fn;
  t.precision = pp > 0 ? double(t.tp) / double(pp) : 0.0;
  t.recall = ap > 0 ? double(t.tp) / double(ap) : 0.0;
  t.f1 = (t.precision + t.recall) > 0.0 ? 2.0 * t.precision * t.recall / (t.precision + t.recall)
                                        : 0.0;
  return t;
}

Metrics evaluate(const std::vector<std::vector<int>>& predictions,
                 const std::vector<std::vector<int>>& gold) {
  if (predictions.size() != gold.size()) throw DataError("evaluate: length mismatch");
  Metrics m;
  if (predictions.empty()) return m;
  const size_t tasks = gold[0].size();
  std::vector<TaskMetrics> acc(tasks);
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != tasks || gold[i].size() != tasks)
      throw DataError("evaluate: ragged task lists");
    bool all_match = true;
    for (size_t t = 0; t < tasks; ++t) {
      const int p = predictions[i][t], g = gold[i][t];
      if (p != g) all_match = false;
      if (g > 0)
        (p > 0 ? acc[t].tp : acc[t].fn) += 1;
      else
        (p > 0 ? acc[t].fp : acc[t].tn) += 1;
    }
    m.correct += all_match ? 1 : 0;
  }
  m.total = long(predictions.size());
  m.accuracy = double(m.correct) / double(m.total);
  for (auto& t : acc) m.per_task.push_back(finish_task(t));
  return m;
}

Metrics evaluate_binary(const std::vector<int>& predictions, const std::vector<int>& gold) {
  std::vector<std::vector<int>> p, g;
  for (size_t i = 0; i < predictions.size(); ++i) p.push_back({predictions[i]});
  for (size_t i = 0; i < gold.size(); ++i) g.push_back({gold[i]});
  return evaluate(p, g);
}

std::vector<int> OneVsAllModel::predict_classes(const Corpus& test, const InferConfig& infer,
                                                PredictMode mode, std::uint64_t seed) const {
  std::vector<int> out(test.size());
  RngStream rng(seed);
  for (size_t d = 0; d < test.size(); ++d) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (size_t cls = 0; cls < models.size(); ++cls) {
      RngStream doc_rng(RngStream::splitmix64(seed ^ (d * 1315423911ULL) ^ cls));
      Vec zbar = infer_zbar_test(test.docs[d], models[cls].topics(), infer, doc_rng);
      Prediction p = predict_binary(models[cls].head().post, zbar, mode,
                                    mode == PredictMode::Sampled ? &doc_rng : nullptr);
      if (p.score > best_score) {
        best_score = p.score;
        best = int(cls);
      }
    }
    out[d] = best;
  }
  return out;
}

OneVsAllModel train_one_vs_all(const Corpus& corpus, const OvaConfig& cfg) {
  const int n_classes = corpus.num_tasks();
  if (n_classes < 2) throw DataError("train_one_vs_all: need multi-class labels");
  OneVsAllModel ova;
  for (int cls = 0; cls < n_classes; ++cls) {
    // Relabel: this class positive, everything else negative.
    Corpus view = corpus;
    long positives = 0;
    for (auto& doc : view.docs) {
      int y = doc.labels.count(cls) && doc.labels.at(cls) > 0 ? 1 : -1;
      doc.labels.clear();
      doc.labels[0] = y;
      positives += y > 0 ? 1 : 0;
    }
    view.task_names = {"task0"};
    if (positives == 0)
      std::fprintf(stderr, "warning: class %d has no positive documents\n", cls);
    OnlineMedLda model(cfg.K, corpus.W, cfg.hyper, 1);
    RngStream rng(cfg.seed + std::uint64_t(cls) * 0x9e3779b97f4a7c15ULL);
    MiniBatchStream stream(view, cfg.batch_size, cfg.epochs, rng.next_u64());
    while (auto batch = stream.next()) model.process_minibatch(view, *batch, rng);
    ova.models.push_back(std::move(model));
  }
  return ova;
}

OnlineMedLda train_multitask(const Corpus& corpus, const OvaConfig& cfg) {
  const int tasks = std::max(1, corpus.num_tasks());
  OnlineMedLda model(cfg.K, corpus.W, cfg.hyper, tasks);
  RngStream rng(cfg.seed);
  MiniBatchStream stream(corpus, cfg.batch_size, cfg.epochs, rng.next_u64());
  while (auto batch = stream.next()) model.process_minibatch(corpus, *batch, rng);
  return model;
}

}  // namespace bayespa
