#include "bayespa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bayespa/numerics.hpp"

namespace bayespa {

namespace {

int draw_from(const Vec& probs, RngStream& rng) {
  double u = rng.uniform();
  double cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return int(i);
  }
  return int(probs.size()) - 1;
}

Vec dirichlet(RngStream& rng, int dim, double conc) {
  Vec p(dim);
  double s = 0.0;
  for (auto& x : p) {
    x = sample_gamma(rng, conc);
    s += x;
  }
  for (auto& x : p) x /= s;
  return p;
}

SparseDoc doc_from_word_draws(const std::vector<int>& words) {
  std::map<int, int> counts;
  for (int w : words) ++counts[w];
  SparseDoc doc;
  for (auto [w, c] : counts) {
    doc.tokens.emplace_back(w, c);
    doc.n_d += c;
  }
  return doc;
}

}  // namespace

Corpus make_two_topic_corpus(const TwoTopicSpec& spec) {
  RngStream rng(spec.seed);
  const int w_half = spec.vocab / 2;
  // Topic 0 concentrated on the first half of the vocabulary, topic 1 on
  // the second half, with a little smoothing mass everywhere.
  Vec phi0(spec.vocab), phi1(spec.vocab);
  for (int w = 0; w < spec.vocab; ++w) {
    phi0[w] = (w < w_half) ? 1.0 : 0.05;
    phi1[w] = (w < w_half) ? 0.05 : 1.0;
  }
  double s0 = 0.0, s1 = 0.0;
  for (int w = 0; w < spec.vocab; ++w) {
    s0 += phi0[w];
    s1 += phi1[w];
  }
  for (int w = 0; w < spec.vocab; ++w) {
    phi0[w] /= s0;
    phi1[w] /= s1;
  }

  Corpus corpus;
  corpus.W = spec.vocab;
  corpus.task_names = {"task0"};
  while (corpus.docs.size() < spec.n_docs) {
    double theta;
    do {
      theta = rng.uniform();
    } while (std::abs(theta - 0.5) < spec.margin);
    const int len = spec.min_len + int(rng.next_u64() % (spec.max_len - spec.min_len + 1));
    std::vector<int> words;
    words.reserve(len);
    for (int i = 0; i < len; ++i) {
      const bool topic1 = rng.uniform() < theta;
      words.push_back(draw_from(topic1 ? phi1 : phi0, rng));
    }
    SparseDoc doc = doc_from_word_draws(words);
    doc.labels[0] = theta > 0.5 ? 1 : -1;
    corpus.docs.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

Corpus make_newsgroup_like_corpus(const NewsgroupLikeSpec& spec) {
  RngStream rng(spec.seed);
  Vec class_a = dirichlet(rng, spec.vocab, 0.05);
  Vec class_b = dirichlet(rng, spec.vocab, 0.05);
  Vec background = dirichlet(rng, spec.vocab, 0.2);

  Corpus corpus;
  corpus.W = spec.vocab;
  corpus.task_names = {"task0"};
  while (corpus.docs.size() < spec.n_docs) {
    const int y = (corpus.docs.size() % 2 == 0) ? 1 : -1;
    const Vec& cls = y > 0 ? class_a : class_b;
    const int len = spec.min_len + int(rng.next_u64() % (spec.max_len - spec.min_len + 1));
    std::vector<int> words;
    words.reserve(len);
    for (int i = 0; i < len; ++i) {
      const bool bg = rng.uniform() < spec.background_weight;
      words.push_back(draw_from(bg ? background : cls, rng));
    }
    SparseDoc doc = doc_from_word_draws(words);
    doc.labels[0] = y;
    corpus.docs.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

Corpus make_multilabel_corpus(const MultiLabelSpec& spec) {
  RngStream rng(spec.seed);
  std::vector<Vec> phi;
  for (int k = 0; k < spec.k_true; ++k) phi.push_back(dirichlet(rng, spec.vocab, 0.1));
  std::vector<Vec> task_w;
  for (int t = 0; t < spec.tasks; ++t) {
    Vec w(spec.k_true);
    for (auto& x : w) x = rng.normal();
    task_w.push_back(w);
  }

  Corpus corpus;
  corpus.W = spec.vocab;
  for (int t = 0; t < spec.tasks; ++t) corpus.task_names.push_back("task" + std::to_string(t));
  std::vector<Vec> scores(spec.tasks);
  while (corpus.docs.size() < spec.n_docs) {
    Vec theta = dirichlet(rng, spec.k_true, 0.3);
    const int len = spec.min_len + int(rng.next_u64() % (spec.max_len - spec.min_len + 1));
    std::vector<int> words;
    Vec zbar(spec.k_true, 0.0);
    words.reserve(len);
    for (int i = 0; i < len; ++i) {
      const int k = draw_from(theta, rng);
      zbar[k] += 1.0 / len;
      words.push_back(draw_from(phi[k], rng));
    }
    SparseDoc doc = doc_from_word_draws(words);
    for (int t = 0; t < spec.tasks; ++t) {
      double s = 0.0;
      for (int k = 0; k < spec.k_true; ++k) s += task_w[t][k] * zbar[k];
      scores[t].push_back(s);
    }
    corpus.docs.push_back(std::move(doc));
  }
  // Threshold each task at its median score so labels are balanced.
  for (int t = 0; t < spec.tasks; ++t) {
    Vec sorted = scores[t];
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (size_t d = 0; d < corpus.docs.size(); ++d)
      corpus.docs[d].labels[t] = scores[t][d] >= median ? 1 : -1;
  }
  corpus.validate();
  return corpus;
}

}  // namespace bayespa
