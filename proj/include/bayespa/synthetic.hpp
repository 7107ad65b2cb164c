#pragma once

#include "bayespa/corpus.hpp"

namespace bayespa {

// Two-topic corpus with labels linear in the true topic mix. theta is
// rejected inside the margin band around 1/2, so a linear rule on the true
// zbar is near-perfect (Bayes-optimal >= 99%).
struct TwoTopicSpec {
  size_t n_docs = 2000;
  int vocab = 50;
  int min_len = 60;
  int max_len = 120;
  double margin = 0.15;
  std::uint64_t seed = 1;
};
Corpus make_two_topic_corpus(const TwoTopicSpec& spec);

// Desk-scale stand-in for a binary newsgroup task: two sparse class word
// distributions plus a shared background distribution, mixed per token.
struct NewsgroupLikeSpec {
  size_t n_docs = 1100;
  int vocab = 2000;
  int min_len = 40;
  int max_len = 200;
  double background_weight = 0.5;
  std::uint64_t seed = 7;
};
Corpus make_newsgroup_like_corpus(const NewsgroupLikeSpec& spec);

// Multi-label corpus: documents from a K_true-topic LDA, each task labeled
// by the sign of its own linear functional of the true zbar.
struct MultiLabelSpec {
  size_t n_docs = 20000;
  int vocab = 500;
  int k_true = 6;
  int tasks = 2;
  int min_len = 40;
  int max_len = 100;
  std::uint64_t seed = 11;
};
Corpus make_multilabel_corpus(const MultiLabelSpec& spec);

}  // namespace bayespa
