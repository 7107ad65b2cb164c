#pragma once

#include <string>

#include "bayespa/medhdp.hpp"
#include "bayespa/medlda.hpp"

namespace bayespa {

constexpr int kSnapshotVersion = 1;

// Versioned JSON snapshots. Doubles round-trip exactly (shortest-exact
// serialization), so load(save(m)) continues training bit-identically when
// the caller also restores the RNG via the stored state string.
void save_medlda(const OnlineMedLda& model, const RngStream& rng, const std::string& path);
OnlineMedLda load_medlda(const std::string& path, RngStream* rng_out = nullptr);

void save_medhdp(const OnlineMedHdp& model, const RngStream& rng, const std::string& path);
OnlineMedHdp load_medhdp(const std::string& path, RngStream* rng_out = nullptr);

// "medlda" or "medhdp"; throws DataError on unknown version or type.
std::string snapshot_kind(const std::string& path);

}  // namespace bayespa
