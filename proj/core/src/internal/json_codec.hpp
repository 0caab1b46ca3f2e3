#pragma once

// Build-internal JSON bindings. Not installed; public headers stay free of
// the json dependency. File-format writers use ordered_json so key order
// (and therefore the serialized bytes) is fixed.

#include <nlohmann/json.hpp>

#include "actmem/config.hpp"
#include "actmem/types.hpp"

namespace actmem {

void to_json(nlohmann::json& j, const EngineConfig& c);
void from_json(const nlohmann::json& j, EngineConfig& c);

// Declaration-order keys, for byte-stable report/artifact output.
nlohmann::ordered_json config_to_json(const EngineConfig& c);

nlohmann::ordered_json fact_to_json(const Fact& f);
Fact fact_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json cluster_to_json(const Cluster& c);
Cluster cluster_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json edge_to_json(const Edge& e);
Edge edge_from_json(const nlohmann::ordered_json& j);

}  // namespace actmem
