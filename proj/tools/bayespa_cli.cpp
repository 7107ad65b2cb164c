// Command-line front end: train / eval / sensitivity / pa-baseline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bayespa/medhdp.hpp"
#include "bayespa/medlda.hpp"
#include "bayespa/pa.hpp"
#include "bayespa/predictor.hpp"
#include "bayespa/snapshot.hpp"
#include "json.hpp"

using namespace bayespa;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Logging, gated by BAYESPA_LOG (debug < info < warn < error; default warn).

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel log_threshold() {
  static LogLevel lvl = [] {
    const char* env = std::getenv("BAYESPA_LOG");
    std::string s = env ? env : "warn";
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    if (s == "error") return LogLevel::Error;
    return LogLevel::Warn;
  }();
  return lvl;
}

void log(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (lvl >= log_threshold())
    std::fprintf(stderr, "[%s] %s\n", names[int(lvl)], msg.c_str());
}

// ---------------------------------------------------------------------------
// Flat key=value run configuration; command-line overrides win.

struct RunConfig {
  std::string model = "pamedlda";
  int K = 40;
  size_t batch_size = 64;
  int epochs = 1;
  double alpha = -1.0;  // default 1/K, resolved late
  double gamma_prior = 0.5;
  double gamma_hdp = 1.0;
  double eta = 0.45;
  double c = 1.0;
  double epsilon = 164.0;
  double v = 1.0;
  int iters = 1;
  int samples = 2;
  int burn = 0;
  int k_cap = 512;
  int initial_topics = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  long eval_every = 0;  // batches between held-out evaluations; 0 = final only
  int infer_burn = 20;
  int infer_keep = 20;
  std::string train_path, test_path, snapshot_out, metrics_out;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 1.0 / double(K); }
  bool is_hdp() const { return model == "pamedhdp" || model == "pamedhdp-mt"; }
  bool is_multitask() const { return model == "pamedlda-mt" || model == "pamedhdp-mt"; }
};

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_double = [&] {
    try {
      size_t pos = 0;
      double d = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
  };
  auto as_long = [&] {
    double d = as_double();
    if (d != std::floor(d)) throw ConfigError("key '" + key + "': expected an integer");
    return (long long)d;
  };

  if (key == "model") {
    static const std::vector<std::string> known = {"pa", "pamedlda", "pamedhdp", "pamedlda-mt",
                                                   "pamedhdp-mt"};
    if (std::find(known.begin(), known.end(), value) == known.end())
      throw ConfigError("unknown model '" + value + "'");
    cfg.model = value;
  } else if (key == "K") {
    cfg.K = int(as_long());
  } else if (key == "batch_size") {
    cfg.batch_size = size_t(as_long());
  } else if (key == "epochs") {
    cfg.epochs = int(as_long());
  } else if (key == "alpha") {
    cfg.alpha = as_double();
  } else if (key == "gamma_prior") {
    cfg.gamma_prior = as_double();
  } else if (key == "gamma_hdp") {
    cfg.gamma_hdp = as_double();
  } else if (key == "eta") {
    cfg.eta = as_double();
  } else if (key == "c") {
    cfg.c = as_double();
  } else if (key == "epsilon") {
    cfg.epsilon = as_double();
  } else if (key == "v") {
    cfg.v = as_double();
  } else if (key == "I" || key == "iters") {
    cfg.iters = int(as_long());
  } else if (key == "J" || key == "samples") {
    cfg.samples = int(as_long());
  } else if (key == "beta_burn" || key == "burn") {
    cfg.burn = int(as_long());
  } else if (key == "k_cap") {
    cfg.k_cap = int(as_long());
  } else if (key == "initial_topics") {
    cfg.initial_topics = int(as_long());
  } else if (key == "seed") {
    cfg.seed = std::uint64_t(as_long());
  } else if (key == "threads") {
    cfg.threads = int(as_long());
  } else if (key == "eval_every") {
    cfg.eval_every = long(as_long());
  } else if (key == "infer_burn") {
    cfg.infer_burn = int(as_long());
  } else if (key == "infer_keep") {
    cfg.infer_keep = int(as_long());
  } else if (key == "train") {
    cfg.train_path = value;
  } else if (key == "test") {
    cfg.test_path = value;
  } else if (key == "snapshot_out") {
    cfg.snapshot_out = value;
  } else if (key == "metrics_out") {
    cfg.metrics_out = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  RunConfig cfg;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      apply_key(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.train_path.empty()) throw ConfigError("config needs a 'train' path");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.burn >= cfg.samples) throw ConfigError("beta_burn must be < J");
  if (cfg.K < 1) throw ConfigError("K must be >= 1");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.eval_every < 0) throw ConfigError("eval_every must be >= 0");
}

LdaHyper lda_hyper(const RunConfig& cfg) {
  LdaHyper h;
  h.alpha = cfg.resolved_alpha();
  h.gamma_prior = cfg.gamma_prior;
  h.c = cfg.c;
  h.epsilon = cfg.epsilon;
  h.v = cfg.v;
  h.iters = cfg.iters;
  h.samples = cfg.samples;
  h.burn = cfg.burn;
  return h;
}

HdpHyper hdp_hyper(const RunConfig& cfg) {
  HdpHyper h;
  h.alpha = cfg.alpha > 0.0 ? cfg.alpha : 5.0;
  h.gamma_hdp = cfg.gamma_hdp;
  h.eta = cfg.eta;
  h.c = cfg.c;
  h.epsilon = cfg.epsilon;
  h.v = cfg.v;
  h.iters = cfg.iters;
  h.samples = cfg.samples;
  h.burn = cfg.burn;
  h.k_cap = cfg.k_cap;
  return h;
}

// ---------------------------------------------------------------------------
// Evaluation shared by train/eval paths.

struct EvalResult {
  Metrics metrics;
  std::vector<std::vector<int>> predictions;
};

EvalResult eval_topic_model(const OnlineMedLda& model, const Corpus& test, double alpha,
                            int infer_burn, int infer_keep, PredictMode mode,
                            std::uint64_t seed) {
  InferConfig infer;
  infer.alpha = alpha;
  infer.burn = infer_burn;
  infer.keep = infer_keep;
  EvalResult out;
  std::vector<std::vector<int>> gold;
  long oov_total = 0;
  for (size_t d = 0; d < test.size(); ++d) {
    RngStream rng(RngStream::splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (d + 1))));
    long oov = 0;
    Vec zb = infer_zbar_test(test.docs[d], model.topics(), infer, rng, &oov);
    oov_total += oov;
    std::vector<int> p, g;
    for (int t = 0; t < model.n_tasks(); ++t) {
      auto label = test.docs[d].label(t);
      if (!label)
        throw DataError("test doc " + std::to_string(d) + " is missing a label for task " +
                        std::to_string(t));
      p.push_back(predict_binary(model.head(t).post, zb, mode,
                                 mode == PredictMode::Sampled ? &rng : nullptr)
                      .label);
      g.push_back(*label);
    }
    out.predictions.push_back(std::move(p));
    gold.push_back(std::move(g));
  }
  if (oov_total > 0)
    log(LogLevel::Info, std::to_string(oov_total) + " out-of-vocabulary test tokens skipped");
  out.metrics = evaluate(out.predictions, gold);
  return out;
}

json metrics_json(const Metrics& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["correct"] = m.correct;
  j["total"] = m.total;
  j["macro_f1"] = m.macro_f1();
  j["per_task"] = json::array();
  for (const auto& t : m.per_task)
    j["per_task"].push_back({{"tp", t.tp},
                             {"fp", t.fp},
                             {"tn", t.tn},
                             {"fn", t.fn},
                             {"precision", t.precision},
                             {"recall", t.recall},
                             {"f1", t.f1}});
  return j;
}

// ---------------------------------------------------------------------------
// train

int run_train(const RunConfig& cfg) {
  validate(cfg);
  Corpus train = load_svmlight(cfg.train_path);
  std::optional<Corpus> test;
  if (!cfg.test_path.empty()) test = load_svmlight(cfg.test_path);
  log(LogLevel::Info, "loaded " + std::to_string(train.size()) + " training docs, vocab " +
                          std::to_string(train.W));

  const int tasks = cfg.is_multitask() ? train.num_tasks() : 1;
  if (!cfg.is_multitask() && train.num_tasks() != 1 && cfg.model != "pa")
    throw ConfigError("corpus has " + std::to_string(train.num_tasks()) +
                      " tasks; use a -mt model for multi-class/multi-label data");

  std::ofstream metrics;
  if (!cfg.metrics_out.empty()) {
    metrics.open(cfg.metrics_out);
    if (!metrics) throw ConfigError("cannot write metrics file " + cfg.metrics_out);
    metrics << "step,docs_seen,wall_ms,accuracy,macro_f1,k_rep\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  // The classic PA baseline runs on normalized bag-of-words features.
  if (cfg.model == "pa") {
    if (train.num_tasks() != 1) throw ConfigError("pa baseline needs binary labels");
    PaConfig pa_cfg{cfg.epsilon, cfg.c};
    PaState state = PaState::zeros(train.W);
    RngStream rng(cfg.seed);
    MiniBatchStream stream(train, 1, cfg.epochs, rng.next_u64());
    long mistakes = 0, seen = 0;
    double cumulative_loss = 0.0;
    while (auto b = stream.next()) {
      const SparseDoc& d = train.docs[b->indices[0]];
      Vec x(train.W, 0.0);
      for (auto [w, cnt] : d.tokens) x[w] = double(cnt) / d.n_d;
      const int y = *d.label(0);
      double score = 0.0;
      for (auto [w, cnt] : d.tokens) score += state.mu[w] * x[w];
      if ((score >= 0.0 ? 1 : -1) != y) ++mistakes;
      cumulative_loss += hinge_loss(state.mu, x, y, cfg.epsilon);
      state = pa_update(state, pa_cfg, x, y);
      ++seen;
      if (metrics && cfg.eval_every > 0 && seen % cfg.eval_every == 0)
        metrics << seen << ',' << seen << ',' << wall_ms() << ','
                << 1.0 - double(mistakes) / double(seen) << ',' << cumulative_loss << ",1\n";
    }
    const double acc = 1.0 - double(mistakes) / double(seen);
    if (metrics)
      metrics << seen << ',' << seen << ',' << wall_ms() << ',' << acc << ','
              << cumulative_loss << ",1\n";
    json summary = {{"model", "pa"},
                    {"docs_seen", seen},
                    {"online_accuracy", acc},
                    {"cumulative_hinge", cumulative_loss},
                    {"wall_ms", wall_ms()}};
    std::printf("%s\n", summary.dump(2).c_str());
    return 0;
  }

  std::optional<OnlineMedLda> lda;
  std::optional<OnlineMedHdp> hdp;
  if (cfg.is_hdp())
    hdp.emplace(train.W, hdp_hyper(cfg), tasks, cfg.initial_topics);
  else
    lda.emplace(cfg.K, train.W, lda_hyper(cfg), tasks);
  OnlineMedLda& model = cfg.is_hdp() ? *hdp : *lda;
  model.set_threads(cfg.threads);

  RngStream rng(cfg.seed);
  MiniBatchStream stream(train, cfg.batch_size, cfg.epochs, rng.next_u64());
  long docs_seen = 0, step = 0;

  auto emit_row = [&] {
    if (!metrics) return;
    double acc = 0.0, f1 = 0.0;
    if (test) {
      EvalResult r = eval_topic_model(model, *test, cfg.resolved_alpha(), cfg.infer_burn,
                                      cfg.infer_keep, PredictMode::Mean, cfg.seed);
      acc = r.metrics.accuracy;
      f1 = r.metrics.macro_f1();
    }
    const int k_rep = cfg.is_hdp() ? hdp->K_rep() : cfg.K;
    metrics << step << ',' << docs_seen << ',' << wall_ms() << ',' << acc << ',' << f1 << ','
            << k_rep << '\n';
    metrics.flush();
  };

  while (auto batch = stream.next()) {
    if (cfg.is_hdp())
      hdp->process_minibatch(train, *batch, rng);
    else
      lda->process_minibatch(train, *batch, rng);
    docs_seen += long(batch->indices.size());
    ++step;
    log(LogLevel::Debug, "step " + std::to_string(step) + ", docs " + std::to_string(docs_seen));
    if (cfg.eval_every > 0 && step % cfg.eval_every == 0) emit_row();
  }
  emit_row();

  if (!cfg.snapshot_out.empty()) {
    if (cfg.is_hdp())
      save_medhdp(*hdp, rng, cfg.snapshot_out);
    else
      save_medlda(*lda, rng, cfg.snapshot_out);
    log(LogLevel::Info, "snapshot written to " + cfg.snapshot_out);
  }

  json summary = {{"model", cfg.model},
                  {"rounds", step},
                  {"docs_seen", docs_seen},
                  {"wall_ms", wall_ms()},
                  {"k_rep", cfg.is_hdp() ? hdp->K_rep() : cfg.K}};
  if (test) {
    EvalResult r = eval_topic_model(model, *test, cfg.resolved_alpha(), cfg.infer_burn,
                                    cfg.infer_keep, PredictMode::Mean, cfg.seed);
    summary["test"] = metrics_json(r.metrics);
  }
  std::printf("%s\n", summary.dump(2).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const std::string& snapshot, const std::string& test_path, const std::string& mode,
             const std::string& metrics_out, const std::string& predictions_out,
             std::uint64_t seed) {
  if (mode != "mean" && mode != "sampled") throw ConfigError("mode must be mean or sampled");
  const PredictMode pmode = mode == "mean" ? PredictMode::Mean : PredictMode::Sampled;
  Corpus test = load_svmlight(test_path);

  const std::string kind = snapshot_kind(snapshot);
  std::optional<OnlineMedLda> lda;
  std::optional<OnlineMedHdp> hdp;
  if (kind == "medhdp")
    hdp.emplace(load_medhdp(snapshot));
  else
    lda.emplace(load_medlda(snapshot));
  const OnlineMedLda& model = hdp ? *hdp : *lda;
  if (model.topics().W() < test.W)
    log(LogLevel::Warn, "test vocabulary exceeds the model's; extra words are skipped");
  if (model.n_tasks() > test.num_tasks())
    throw DataError("snapshot has " + std::to_string(model.n_tasks()) + " tasks but test data has " +
                    std::to_string(test.num_tasks()));

  EvalResult r = eval_topic_model(model, test, model.hyper().alpha, 20, 20, pmode, seed);
  json j = metrics_json(r.metrics);
  j["snapshot"] = snapshot;
  j["mode"] = mode;
  if (!metrics_out.empty()) {
    std::ofstream out(metrics_out);
    if (!out) throw ConfigError("cannot write " + metrics_out);
    out << j.dump(2) << '\n';
  }
  if (!predictions_out.empty()) {
    std::ofstream out(predictions_out);
    if (!out) throw ConfigError("cannot write " + predictions_out);
    out << "doc";
    for (int t = 0; t < model.n_tasks(); ++t) out << ",task" << t;
    out << '\n';
    for (size_t d = 0; d < r.predictions.size(); ++d) {
      out << d;
      for (int p : r.predictions[d]) out << ',' << p;
      out << '\n';
    }
  }
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// sensitivity: a (J, beta) grid at fixed kept-sample bookkeeping.

int run_sensitivity(const RunConfig& base, const std::string& grid, const std::string& out_path) {
  if (base.train_path.empty() || base.test_path.empty())
    throw ConfigError("sensitivity needs train and test paths");
  Corpus train = load_svmlight(base.train_path);
  Corpus test = load_svmlight(base.test_path);

  // Grid spec: semicolon-separated J,beta pairs, e.g. "1,0;3,0;5,2;9,6".
  std::vector<std::pair<int, int>> cells;
  std::stringstream gs(grid);
  std::string cell;
  while (std::getline(gs, cell, ';')) {
    int j = 0, b = 0;
    if (std::sscanf(cell.c_str(), "%d,%d", &j, &b) != 2 || j < 1 || b < 0 || b >= j)
      throw ConfigError("bad grid cell '" + cell + "' (want J,beta with beta < J)");
    cells.emplace_back(j, b);
  }
  if (cells.empty()) throw ConfigError("empty sensitivity grid");

  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : out;
  os << "J,beta,kept,accuracy,macro_f1,wall_ms\n";

  for (auto [j, b] : cells) {
    RunConfig cfg = base;
    cfg.samples = j;
    cfg.burn = b;
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    OnlineMedLda model(cfg.K, train.W, lda_hyper(cfg), 1);
    model.set_threads(cfg.threads);
    RngStream rng(cfg.seed);
    MiniBatchStream stream(train, cfg.batch_size, cfg.epochs, rng.next_u64());
    while (auto batch = stream.next()) model.process_minibatch(train, *batch, rng);
    const long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    EvalResult r = eval_topic_model(model, test, cfg.resolved_alpha(), cfg.infer_burn,
                                    cfg.infer_keep, PredictMode::Mean, cfg.seed);
    os << j << ',' << b << ',' << (j - b) << ',' << r.metrics.accuracy << ','
       << r.metrics.macro_f1() << ',' << ms << '\n';
    log(LogLevel::Info, "cell (" + std::to_string(j) + "," + std::to_string(b) + ") accuracy " +
                            std::to_string(r.metrics.accuracy));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// pa-baseline: regret-curve CSV for the classic online PA learner.

int run_pa_baseline(const std::string& train_path, double epsilon, double c, std::uint64_t seed,
                    const std::string& out_path) {
  Corpus train = load_svmlight(train_path);
  if (train.num_tasks() != 1) throw DataError("pa-baseline needs binary labels");

  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : out;
  os << "step,cumulative_hinge,mistakes,online_accuracy\n";

  PaConfig cfg{epsilon, c};
  PaState state = PaState::zeros(train.W);
  RngStream rng(seed);
  MiniBatchStream stream(train, 1, 1, rng.next_u64());
  long mistakes = 0, seen = 0;
  double cumulative = 0.0;
  while (auto b = stream.next()) {
    const SparseDoc& d = train.docs[b->indices[0]];
    Vec x(train.W, 0.0);
    for (auto [w, cnt] : d.tokens) x[w] = double(cnt) / d.n_d;
    const int y = *d.label(0);
    double score = 0.0;
    for (auto [w, cnt] : d.tokens) score += state.mu[w] * x[w];
    if ((score >= 0.0 ? 1 : -1) != y) ++mistakes;
    cumulative += hinge_loss(state.mu, x, y, epsilon);
    state = pa_update(state, cfg, x, y);
    ++seen;
    os << seen << ',' << cumulative << ',' << mistakes << ','
       << 1.0 - double(mistakes) / double(seen) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming max-margin topic models (online MedLDA / MedHDP) and the online PA baseline"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a key=value config file");
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> threads_flag;
  train_cmd->add_option("--config", config_path, "config file")->required();
  train_cmd->add_option("--seed", seed_flag, "override seed");
  train_cmd->add_option("--threads", threads_flag, "override sampler threads");
  train_cmd->add_option("--set", overrides, "override any config key (key=value), repeatable");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a snapshot on labeled test data");
  std::string snapshot_path, test_path, mode = "mean", eval_metrics_out, predictions_out;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--snapshot", snapshot_path, "model snapshot")->required();
  eval_cmd->add_option("--test", test_path, "test corpus (svmlight)")->required();
  eval_cmd->add_option("--mode", mode, "mean|sampled (default mean)");
  eval_cmd->add_option("--seed", eval_seed, "rng seed for inference/sampled mode");
  eval_cmd->add_option("--metrics-out", eval_metrics_out, "write metrics JSON here");
  eval_cmd->add_option("--predictions-out", predictions_out, "write per-doc predictions CSV here");

  // sensitivity
  auto* sens_cmd = app.add_subcommand("sensitivity", "Run a (J, beta) sweep grid");
  std::string grid, sens_config, sens_out;
  sens_cmd->add_option("--grid", grid, "semicolon-separated J,beta cells, e.g. 1,0;5,0;5,2")
      ->required();
  sens_cmd->add_option("--config", sens_config, "base config file")->required();
  sens_cmd->add_option("--out", sens_out, "results CSV (default stdout)");

  // pa-baseline
  auto* pa_cmd = app.add_subcommand("pa-baseline", "Online PA regret curve on bag-of-words");
  std::string pa_train, pa_out;
  double pa_eps = 1.0, pa_c = 1.0;
  std::uint64_t pa_seed = 0;
  pa_cmd->add_option("--train", pa_train, "training corpus (svmlight)")->required();
  pa_cmd->add_option("--epsilon", pa_eps, "margin (default 1)");
  pa_cmd->add_option("--c", pa_c, "aggressiveness (default 1)");
  pa_cmd->add_option("--seed", pa_seed, "shuffle seed");
  pa_cmd->add_option("--out", pa_out, "regret CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) {
      RunConfig cfg = load_config(config_path);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (seed_flag) cfg.seed = *seed_flag;
      if (threads_flag) cfg.threads = *threads_flag;
      return run_train(cfg);
    }
    if (*eval_cmd) return run_eval(snapshot_path, test_path, mode, eval_metrics_out,
                                   predictions_out, eval_seed);
    if (*sens_cmd) return run_sensitivity(load_config(sens_config), grid, sens_out);
    if (*pa_cmd) return run_pa_baseline(pa_train, pa_eps, pa_c, pa_seed, pa_out);
  } catch (const ConfigError& e) {
    log(LogLevel::Error, e.what());
    return 2;
  } catch (const DataError& e) {
    log(LogLevel::Error, e.what());
    return 3;
  } catch (const NumericError& e) {
    log(LogLevel::Error, e.what());
    return 4;
  }
  return 0;
}
