#include "bayespa/snapshot.hpp"

#include <fstream>

#include "json.hpp"

namespace bayespa {

using nlohmann::json;

namespace {

json sym_to_json(const SymMatrix& m) {
  json j;
  j["dim"] = m.dim();
  j["data"] = m.data();
  return j;
}

SymMatrix sym_from_json(const json& j) {
  SymMatrix m(j.at("dim").get<int>());
  m.data() = j.at("data").get<std::vector<double>>();
  return m;
}

json hyper_to_json(const LdaHyper& h) {
  return json{{"alpha", h.alpha},     {"gamma_prior", h.gamma_prior},
              {"c", h.c},             {"epsilon", h.epsilon},
              {"v", h.v},             {"iters", h.iters},
              {"samples", h.samples}, {"burn", h.burn},
              {"diag_cov", h.diag_cov}, {"reinit_z_per_iter", h.reinit_z_per_iter}};
}

LdaHyper hyper_from_json(const json& j) {
  LdaHyper h;
  h.alpha = j.at("alpha");
  h.gamma_prior = j.at("gamma_prior");
  h.c = j.at("c");
  h.epsilon = j.at("epsilon");
  h.v = j.at("v");
  h.iters = j.at("iters");
  h.samples = j.at("samples");
  h.burn = j.at("burn");
  h.diag_cov = j.at("diag_cov");
  h.reinit_z_per_iter = j.at("reinit_z_per_iter");
  return h;
}

json core_to_json(const OnlineMedLda& model, const RngStream& rng) {
  json j;
  j["version"] = kSnapshotVersion;
  j["K"] = model.topics().K();
  j["W"] = model.topics().W();
  j["round"] = model.round();
  j["hyper"] = hyper_to_json(model.hyper());
  j["delta"] = model.topics().delta_flat();
  json heads = json::array();
  for (const auto& h : model.heads()) {
    heads.push_back(json{{"mu", h.post.mu}, {"sigma", sym_to_json(h.post.sigma)}});
  }
  j["heads"] = heads;
  j["rng_seed"] = rng.seed();
  j["rng_state"] = rng.state();
  return j;
}

json read_checked(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open snapshot " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("snapshot " + path + ": " + e.what());
  }
  const int version = j.value("version", -1);
  if (version != kSnapshotVersion)
    throw DataError("snapshot version mismatch: expected " + std::to_string(kSnapshotVersion) +
                    ", found " + std::to_string(version));
  if (j.value("kind", "") != kind)
    throw DataError("snapshot kind mismatch: expected " + kind + ", found " +
                    j.value("kind", "?"));
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write snapshot " + path);
  out << j.dump(2) << '\n';
}

void restore_core(OnlineMedLda& model, const json& j, RngStream* rng_out) {
  model.topics().delta_flat() = j.at("delta").get<std::vector<double>>();
  model.topics().recompute();
  auto& heads = model.heads();
  for (size_t t = 0; t < heads.size(); ++t) {
    heads[t].post.mu = j.at("heads")[t].at("mu").get<Vec>();
    heads[t].post.sigma = sym_from_json(j.at("heads")[t].at("sigma"));
    heads[t].refresh_cache();
  }
  model.round() = j.at("round").get<long>();
  if (rng_out) {
    *rng_out = RngStream(j.at("rng_seed").get<std::uint64_t>());
    rng_out->set_state(j.at("rng_state").get<std::string>());
  }
}

}  // namespace

void save_medlda(const OnlineMedLda& model, const RngStream& rng, const std::string& path) {
  json j = core_to_json(model, rng);
  j["kind"] = "medlda";
  write_json(j, path);
}

OnlineMedLda load_medlda(const std::string& path, RngStream* rng_out) {
  json j = read_checked(path, "medlda");
  OnlineMedLda model(j.at("K"), j.at("W"), hyper_from_json(j.at("hyper")),
                     int(j.at("heads").size()));
  restore_core(model, j, rng_out);
  return model;
}

void save_medhdp(const OnlineMedHdp& model, const RngStream& rng, const std::string& path) {
  json j = core_to_json(model, rng);
  j["kind"] = "medhdp";
  const auto& h = model.hdp_hyper();
  j["hdp_hyper"] = json{{"alpha", h.alpha},   {"gamma_hdp", h.gamma_hdp},
                        {"eta", h.eta},       {"c", h.c},
                        {"epsilon", h.epsilon}, {"v", h.v},
                        {"iters", h.iters},   {"samples", h.samples},
                        {"burn", h.burn},     {"diag_cov", h.diag_cov},
                        {"k_cap", h.k_cap},   {"prune_window", h.prune_window}};
  j["stick_u"] = model.sticks().u;
  j["stick_v"] = model.sticks().v;
  j["growth_log"] = model.growth_log();
  write_json(j, path);
}

OnlineMedHdp load_medhdp(const std::string& path, RngStream* rng_out) {
  json j = read_checked(path, "medhdp");
  const json& hj = j.at("hdp_hyper");
  HdpHyper h;
  h.alpha = hj.at("alpha");
  h.gamma_hdp = hj.at("gamma_hdp");
  h.eta = hj.at("eta");
  h.c = hj.at("c");
  h.epsilon = hj.at("epsilon");
  h.v = hj.at("v");
  h.iters = hj.at("iters");
  h.samples = hj.at("samples");
  h.burn = hj.at("burn");
  h.diag_cov = hj.at("diag_cov");
  h.k_cap = hj.at("k_cap");
  h.prune_window = hj.at("prune_window");
  OnlineMedHdp model(j.at("W"), h, int(j.at("heads").size()), j.at("K"));
  restore_core(model, j, rng_out);
  model.sticks_mutable().u = j.at("stick_u").get<Vec>();
  model.sticks_mutable().v = j.at("stick_v").get<Vec>();
  model.growth_log_mutable() = j.at("growth_log").get<std::vector<long>>();
  return model;
}

std::string snapshot_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open snapshot " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("snapshot " + path + ": " + e.what());
  }
  const int version = j.value("version", -1);
  if (version != kSnapshotVersion)
    throw DataError("snapshot version mismatch: expected " + std::to_string(kSnapshotVersion) +
                    ", found " + std::to_string(version));
  return j.value("kind", "");
}

}  // namespace bayespa
