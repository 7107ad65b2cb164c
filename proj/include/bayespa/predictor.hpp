#pragma once

#include "bayespa/corpus.hpp"
#include "bayespa/medlda.hpp"

namespace bayespa {

struct InferConfig {
  int burn = 20;
  int keep = 20;
  double alpha = 0.025;  // doc prior used at test time
};

// Unsupervised collapsed Gibbs on a held-out document against the point
// estimate E[Phi] (row-normalized Delta); zbar averaged over kept sweeps.
// Out-of-vocabulary words are skipped; *oov_count reports how many.
Vec infer_zbar_test(const SparseDoc& doc, const TopicPosterior& topics, const InferConfig& cfg,
                    RngStream& rng, long* oov_count = nullptr);

enum class PredictMode { Mean, Sampled };

struct Prediction {
  int label = 1;
  double score = 0.0;
};

// score = w.zbar with w the posterior mean (Mean) or one posterior draw
// (Sampled, the Gibbs-classifier rule). Zero score predicts +1.
Prediction predict_binary(const GaussianPosterior& head, const Vec& zbar, PredictMode mode,
                          RngStream* rng = nullptr);

struct TaskMetrics {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct Metrics {
  double accuracy = 0.0;
  long correct = 0, total = 0;
  std::vector<TaskMetrics> per_task;

  double macro_f1() const;
};

// predictions[i][task] vs gold[i][task]; 0/0 conventions map to 0.
Metrics evaluate(const std::vector<std::vector<int>>& predictions,
                 const std::vector<std::vector<int>>& gold);

// Accuracy for single-task aligned label lists.
Metrics evaluate_binary(const std::vector<int>& predictions, const std::vector<int>& gold);

struct OvaConfig {
  LdaHyper hyper;
  int K = 40;
  size_t batch_size = 64;
  int epochs = 1;
  std::uint64_t seed = 0;
};

// One independent binary model per class (class = +1, rest = -1);
// prediction is the argmax of per-class scores, ties to the lowest index.
struct OneVsAllModel {
  std::vector<OnlineMedLda> models;  // one per class/task

  std::vector<int> predict_classes(const Corpus& test, const InferConfig& infer,
                                   PredictMode mode, std::uint64_t seed) const;
};

OneVsAllModel train_one_vs_all(const Corpus& corpus, const OvaConfig& cfg);

// Multi-task trainer: one shared topic model, one head and one per-doc
// augmentation variable per task (OnlineMedLda already factorizes the weight update
// over tasks).
OnlineMedLda train_multitask(const Corpus& corpus, const OvaConfig& cfg);

}  // namespace bayespa
