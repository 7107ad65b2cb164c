#include <cmath>
#include <map>

#include "bayespa/medhdp.hpp"
#include "bayespa/synthetic.hpp"
#include "doctest.h"

using namespace bayespa;

namespace {

SparseDoc doc_from_words(const std::vector<int>& words, int y) {
  SparseDoc d;
  std::map<int, int> counts;
  for (int w : words) ++counts[w];
  for (auto [w, c] : counts) {
    d.tokens.emplace_back(w, c);
    d.n_d += c;
  }
  if (y != 0) d.labels[0] = y;
  return d;
}

double total_variation(const Vec& p, const Vec& q) {
  double tv = 0.0;
  for (size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("stick draws: prior moments and mass identity") {
  StickPosterior sticks;
  sticks.u = {2.0, 1.0, 4.0};
  sticks.v = {3.0, 1.0, 2.0};
  RngStream rng(501);
  Vec mean(3, 0.0);
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    SampledSticks out = sample_sticks(sticks, {}, {}, rng);
    REQUIRE(out.pi.size() == 3);
    double mass = out.remainder;
    for (int k = 0; k < 3; ++k) {
      CHECK(out.pi_bar[k] > 0.0);
      CHECK(out.pi_bar[k] < 1.0);
      mass += out.pi[k];
      mean[k] += out.pi_bar[k];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(mean[0] / n == doctest::Approx(2.0 / 5.0).epsilon(0.01));
  CHECK(mean[1] / n == doctest::Approx(1.0 / 2.0).epsilon(0.01));
  CHECK(mean[2] / n == doctest::Approx(4.0 / 6.0).epsilon(0.01));
}

TEST_CASE("stick draws condition on table counts") {
  StickPosterior sticks;
  sticks.u = {1.0, 1.0};
  sticks.v = {1.0, 1.0};
  Vec s_total = {5.0, 3.0};
  Vec s_tail = {3.0, 0.0};
  RngStream rng(502);
  double mean0 = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) mean0 += sample_sticks(sticks, s_total, s_tail, rng).pi_bar[0];
  // Beta(1 + 5, 1 + 3) mean = 6/10.
  CHECK(mean0 / n == doctest::Approx(0.6).epsilon(0.01));
}

TEST_CASE("table counts: closed-form small cases") {
  LogStirlingTable table(5);
  RngStream rng(503);
  SampledSticks st;
  st.pi_bar = {0.5};
  st.pi = {0.5};

  SUBCASE("zero and one customers are deterministic") {
    std::vector<int> s;
    sample_tables({0}, st, 2.0, table, rng, s);
    CHECK(s[0] == 0);
    sample_tables({1}, st, 2.0, table, rng, s);
    CHECK(s[0] == 1);
  }

  SUBCASE("three customers, alpha pi = 1") {
    // p(s) ~ S(3,s): (2, 3, 1)/6.
    st.pi = {0.5};
    const double alpha = 2.0;  // alpha * pi = 1
    Vec freq(3, 0.0);
    std::vector<int> s;
    const int n = 200000;
    for (int t = 0; t < n; ++t) {
      sample_tables({3}, st, alpha, table, rng, s);
      REQUIRE(s[0] >= 1);
      REQUIRE(s[0] <= 3);
      freq[s[0] - 1] += 1.0;
    }
    CHECK(freq[0] / n == doctest::Approx(2.0 / 6.0).epsilon(0.02));
    CHECK(freq[1] / n == doctest::Approx(3.0 / 6.0).epsilon(0.02));
    CHECK(freq[2] / n == doctest::Approx(1.0 / 6.0).epsilon(0.02));
  }

  SUBCASE("large alpha pi forces one table per customer") {
    st.pi = {1.0};
    std::vector<int> s;
    int all = 0;
    for (int t = 0; t < 2000; ++t) {
      sample_tables({4}, st, 1e6, table, rng, s);
      if (s[0] == 4) ++all;
    }
    CHECK(all > 1990);
  }
}

TEST_CASE("topic growth extends every structure and touches nothing else") {
  HdpHyper h;
  h.eta = 0.45;
  h.gamma_hdp = 1.5;
  h.v = 2.0;
  OnlineMedHdp m(6, h, 1, 2);
  auto& delta = m.topics().delta_flat();
  delta[0] = 3.0;
  delta[7] = 2.5;
  m.topics().recompute();
  m.heads()[0].post.mu = {1.0, -1.0};
  m.heads()[0].refresh_cache();

  std::vector<double> old_delta = delta;
  std::vector<double> old_mu = m.head().post.mu;
  m.grow_topics();

  REQUIRE(m.K_rep() == 3);
  REQUIRE(m.sticks().K_rep() == 3);
  REQUIRE(m.growth_log().size() == 3);
  for (int w = 0; w < 6; ++w) {
    CHECK(m.topics().delta(2, w) == 0.45);
    CHECK(m.topics().lambda(2, w) == doctest::Approx(digamma(0.45) - digamma(6 * 0.45)));
  }
  for (int k = 0; k < 2; ++k)
    for (int w = 0; w < 6; ++w)
      CHECK(m.topics().delta(k, w) == old_delta[size_t(k) * 6 + w]);
  CHECK(m.head().post.mu[0] == old_mu[0]);
  CHECK(m.head().post.mu[1] == old_mu[1]);
  CHECK(m.head().post.mu[2] == 0.0);
  CHECK(m.head().post.sigma(2, 2) == 4.0);
  CHECK(m.head().post.sigma(2, 0) == 0.0);
  CHECK(m.head().second_moment(2, 2) == 4.0);
  CHECK(m.sticks().u[2] == 1.0);
  CHECK(m.sticks().v[2] == 1.5);
}

TEST_CASE("new-topic event fires at the predicted rate") {
  HdpHyper h;
  h.c = 0.0;
  h.alpha = 2.0;
  OnlineMedHdp m(4, h, 1, 1);

  SparseDoc sd = doc_from_words({2}, 0);
  OnlineMedHdp::HdpBatchState bs;
  bs.ckw.assign(4, 0);
  bs.ck_total.assign(1, 0);
  bs.sticks.pi_bar = {0.6};
  bs.sticks.pi = {0.6};
  bs.sticks.remainder = 0.4;

  // One unassigned token: p(new) = (alpha r / W) / (alpha pi delta/rowsum + alpha r / W).
  const double p_old = h.alpha * 0.6 * m.topics().delta(0, 2) / m.topics().row_sum(0);
  const double p_new = h.alpha * 0.4 / 4.0;
  const double expect = p_new / (p_old + p_new);

  RngStream rng(504);
  int grew = 0;
  const int n = 200000;
  for (int t = 0; t < n; ++t) {
    BatchDoc doc = m.make_batch_doc(sd, 0);
    doc.z[0] = -1;
    OnlineMedHdp::HdpBatchState bs_copy = bs;
    int k = m.sample_z_token_hdp(doc, 0, bs_copy, rng, true);
    if (k == 1) {
      CHECK(doc.z[0] == -1);
      ++grew;
    } else {
      CHECK(doc.z[0] == 0);
      CHECK(bs_copy.ck_total[0] == 1);
    }
  }
  CHECK(double(grew) / n == doctest::Approx(expect).epsilon(0.02));

  SUBCASE("growth disabled never proposes a new topic") {
    BatchDoc doc = m.make_batch_doc(sd, 0);
    doc.z[0] = -1;
    OnlineMedHdp::HdpBatchState bs_copy = bs;
    for (int t = 0; t < 1000; ++t) CHECK(m.sample_z_token_hdp(doc, 0, bs_copy, rng, false) == 0);
  }
}

TEST_CASE("finishing a new-topic assignment splits the remainder stick") {
  HdpHyper h;
  h.c = 0.0;
  h.gamma_hdp = 1.0;
  OnlineMedHdp m(4, h, 1, 1);
  SparseDoc sd = doc_from_words({1, 3}, 0);
  BatchDoc doc = m.make_batch_doc(sd, 0);
  doc.z = {-1, -1};
  OnlineMedHdp::HdpBatchState bs;
  bs.ckw.assign(4, 0);
  bs.ck_total.assign(1, 0);
  bs.sticks.pi_bar = {0.5};
  bs.sticks.pi = {0.5};
  bs.sticks.remainder = 0.5;

  m.grow_topics();
  doc.topic_count.push_back(0);  // caller extends per-doc counts on growth
  RngStream rng(505);
  m.finish_new_topic_assignment(doc, 0, bs, rng);

  REQUIRE(bs.sticks.pi.size() == 2);
  CHECK(doc.z[0] == 1);
  CHECK(doc.topic_count[1] == 1);
  CHECK(bs.ckw[size_t(1) * 4 + 1] == 1);
  CHECK(bs.ck_total[1] == 1);
  CHECK(bs.sticks.pi[1] + bs.sticks.remainder == doctest::Approx(0.5));
  CHECK(bs.sticks.remainder < 0.5);
  CHECK(bs.sticks.remainder > 0.0);
}

TEST_CASE("token conditional matches the collapsed batch joint, fixed sticks") {
  HdpHyper h;
  h.c = 0.0;
  h.alpha = 2.0;
  h.eta = 0.45;
  OnlineMedHdp m(3, h, 1, 2);
  auto& delta = m.topics().delta_flat();
  delta = {1.0, 2.0, 0.5, 0.7, 0.3, 1.5};
  m.topics().recompute();

  SampledSticks st;
  st.pi_bar = {0.55, 0.5};
  st.pi = {0.55, 0.225};
  st.remainder = 0.225;

  SparseDoc sd = doc_from_words({0, 1, 2, 1}, 0);
  BatchDoc proto = m.make_batch_doc(sd, 0);
  const auto& words = proto.words;
  const int n_tok = int(words.size());
  const int K = 2, W = 3;

  // Exact joint for one doc (the batch is this doc): product over topics of
  // rising factorials in alpha pi_k, times the word-count factor collapsed
  // against the frozen Dirichlet pseudo-counts.
  auto joint_logweight = [&](const std::vector<int>& z) {
    std::vector<int> cdk(K, 0);
    std::vector<std::vector<int>> ckw(K, std::vector<int>(W, 0));
    double lw = 0.0;
    for (int i = 0; i < n_tok; ++i) {
      ++cdk[z[i]];
      ++ckw[z[i]][words[i]];
    }
    for (int k = 0; k < K; ++k) {
      lw += std::lgamma(h.alpha * st.pi[k] + cdk[k]) - std::lgamma(h.alpha * st.pi[k]);
      double row = 0.0;
      for (int w = 0; w < W; ++w) {
        lw += std::lgamma(m.topics().delta(k, w) + ckw[k][w]) - std::lgamma(m.topics().delta(k, w));
        row += m.topics().delta(k, w);
      }
      lw -= std::lgamma(row + cdk[k]) - std::lgamma(row);
    }
    return lw;
  };

  size_t total = 1;
  for (int i = 0; i < n_tok; ++i) total *= K;
  Vec logw(total);
  for (size_t code = 0; code < total; ++code) {
    std::vector<int> z(n_tok);
    size_t c = code;
    for (int i = 0; i < n_tok; ++i) {
      z[i] = int(c % K);
      c /= K;
    }
    logw[code] = joint_logweight(z);
  }
  const double lz = log_sum_exp(logw);
  Vec exact(total);
  for (size_t i = 0; i < total; ++i) exact[i] = std::exp(logw[i] - lz);

  RngStream rng(506);
  BatchDoc doc = proto;
  OnlineMedHdp::HdpBatchState bs;
  bs.ckw.assign(size_t(K) * W, 0);
  bs.ck_total.assign(K, 0);
  bs.sticks = st;
  for (int i = 0; i < n_tok; ++i) {
    doc.z[i] = 0;
    ++doc.topic_count[0];
    ++bs.ckw[size_t(0) * W + words[i]];
    ++bs.ck_total[0];
  }

  const int sweeps = 150000, burn = 2000;
  Vec freq(total, 0.0);
  for (int s = 0; s < sweeps; ++s) {
    for (int i = 0; i < n_tok; ++i) m.sample_z_token_hdp(doc, i, bs, rng, false);
    if (s >= burn) {
      size_t code = 0;
      for (int i = n_tok - 1; i >= 0; --i) code = code * K + doc.z[i];
      freq[code] += 1.0;
    }
  }
  for (auto& f : freq) f /= double(sweeps - burn);
  CHECK(total_variation(freq, exact) < 0.015);
}

TEST_CASE("minibatch training grows topics and keeps global invariants") {
  TwoTopicSpec spec;
  spec.n_docs = 120;
  spec.vocab = 25;
  spec.min_len = 15;
  spec.max_len = 40;
  Corpus corpus = make_two_topic_corpus(spec);

  HdpHyper h;
  h.alpha = 2.0;
  h.gamma_hdp = 1.0;
  h.eta = 0.45;
  h.epsilon = 1.0;
  h.samples = 3;
  h.burn = 1;
  OnlineMedHdp m(corpus.W, h);
  RngStream rng(507);

  MiniBatchStream stream(corpus, 30, 2, 13);
  long seen = 0;
  double prev_mass = 0.0;
  for (int k = 0; k < m.K_rep(); ++k) prev_mass += m.topics().row_sum(k);
  double prior_mass_per_topic = 0.45 * corpus.W;
  while (auto b = stream.next()) {
    long batch_tokens = 0;
    for (size_t i : b->indices) batch_tokens += corpus.docs[i].n_d;
    int k_before = m.K_rep();
    m.process_minibatch(corpus, *b, rng);
    // Mass accounting: batch token mass plus eta*W per newborn topic.
    double mass = 0.0;
    for (int k = 0; k < m.K_rep(); ++k) mass += m.topics().row_sum(k);
    const int born = m.K_rep() - k_before;
    CHECK(mass == doctest::Approx(prev_mass + batch_tokens + born * prior_mass_per_topic)
                      .epsilon(1e-9));
    prev_mass = mass;
    seen += batch_tokens;
  }

  CHECK(m.K_rep() > 1);
  CHECK(m.K_rep() <= h.k_cap);
  REQUIRE(int(m.growth_log().size()) == m.K_rep());
  REQUIRE(m.sticks().K_rep() == m.K_rep());
  REQUIRE(m.head().post.dim() == m.K_rep());
  for (size_t k = 1; k < m.growth_log().size(); ++k)
    CHECK(m.growth_log()[k] >= m.growth_log()[k - 1]);
  for (int k = 0; k < m.K_rep(); ++k) {
    CHECK(m.sticks().u[k] >= 1.0);
    CHECK(m.sticks().v[k] >= 0.0);
  }
  CHECK(m.round() == 8);
  CHECK_FALSE(m.cap_hit());
}

TEST_CASE("hdp training is seed-deterministic") {
  TwoTopicSpec spec;
  spec.n_docs = 40;
  spec.vocab = 20;
  spec.min_len = 10;
  spec.max_len = 20;
  Corpus corpus = make_two_topic_corpus(spec);
  HdpHyper h;
  h.epsilon = 1.0;
  auto run = [&] {
    OnlineMedHdp m(corpus.W, h);
    RngStream rng(508);
    MiniBatchStream stream(corpus, 10, 2, 14);
    while (auto b = stream.next()) m.process_minibatch(corpus, *b, rng);
    return m;
  };
  OnlineMedHdp a = run(), b = run();
  CHECK(a.K_rep() == b.K_rep());
  CHECK(a.topics().delta_flat() == b.topics().delta_flat());
  CHECK(a.head().post.mu == b.head().post.mu);
  CHECK(a.sticks().u == b.sticks().u);
  CHECK(a.sticks().v == b.sticks().v);
}

TEST_CASE("topic cap truncates growth with a warning flag") {
  TwoTopicSpec spec;
  spec.n_docs = 60;
  spec.vocab = 25;
  Corpus corpus = make_two_topic_corpus(spec);
  HdpHyper h;
  h.epsilon = 1.0;
  h.k_cap = 2;
  OnlineMedHdp m(corpus.W, h);
  RngStream rng(509);
  MiniBatchStream stream(corpus, 20, 2, 15);
  while (auto b = stream.next()) m.process_minibatch(corpus, *b, rng);
  CHECK(m.K_rep() <= 2);
  CHECK(m.cap_hit());
  CHECK_THROWS_AS([&] {
    while (true) m.grow_topics();
  }(), NumericError);
}

TEST_CASE("pruning is off by default and bounded when enabled") {
  TwoTopicSpec spec;
  spec.n_docs = 80;
  spec.vocab = 25;
  Corpus corpus = make_two_topic_corpus(spec);
  HdpHyper h;
  h.epsilon = 1.0;
  HdpHyper hp = h;
  hp.prune_window = 2;

  OnlineMedHdp keep_all(corpus.W, h), pruned(corpus.W, hp);
  RngStream r1(510), r2(510);
  MiniBatchStream s1(corpus, 20, 3, 16), s2(corpus, 20, 3, 16);
  while (auto b = s1.next()) keep_all.process_minibatch(corpus, *b, r1);
  while (auto b = s2.next()) pruned.process_minibatch(corpus, *b, r2);

  CHECK(pruned.K_rep() <= keep_all.K_rep());
  REQUIRE(int(pruned.growth_log().size()) == pruned.K_rep());
  REQUIRE(pruned.sticks().K_rep() == pruned.K_rep());
  REQUIRE(pruned.head().post.dim() == pruned.K_rep());
}
