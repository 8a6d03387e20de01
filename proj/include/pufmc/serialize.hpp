#pragma once

// JSON records, configuration hashes and version stamps shared by the CLI,
// the sweep harness and the Python bindings.

#include <cstdint>
#include <string>

#include "json.hpp"
#include "pufmc/arch.hpp"
#include "pufmc/engine.hpp"

namespace pufmc {

inline constexpr const char* kToolVersion = "0.1.0";
/// Version of the CSV and JSON output schemas.
inline constexpr int kSchemaVersion = 1;

nlohmann::json arch_to_json(const ArchSpec& arch);
ArchSpec arch_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const RunManifest& m);

/// Full estimate record. `per_challenge` and `group_bias` are omitted unless
/// `detail` is set.
nlohmann::json estimate_to_json(const AdvantageEstimate& e, bool detail = false);

/// 16 hex digits of FNV-1a 64 over the compact dump of `config` (keys sorted).
std::string config_hash(const nlohmann::json& config);

/// UTC timestamp, ISO 8601.
std::string utc_timestamp();

}  // namespace pufmc
