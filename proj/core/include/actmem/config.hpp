#pragma once

#include <cstddef>
#include <string>

#include "actmem/errors.hpp"

namespace actmem {

// Pipeline hyperparameters. The defaults follow the reference setup:
// clustering distance 0.2, semantic edge similarity 0.3, PMI threshold 0.8,
// top-20 initial retrieval, top-10 refinement retrieval. The three enable_*
// flags switch off whole subsystems for ablation runs.
struct EngineConfig {
    // Cosine distance (1 - sim); a fact joins a cluster iff distance to the
    // nearest centroid is <= this.
    double cluster_distance_threshold = 0.2;
    // Intra-cluster pairs with cosine similarity strictly above this get a
    // semantic edge.
    double semantic_edge_threshold = 0.3;
    // Causal candidates with S_PMI strictly above this (in nats) survive.
    double pmi_threshold = 0.8;
    int k_initial = 20;
    int k_counterfactual = 10;
    int graph_expansion_hops = 1;
    int max_context_facts = 40;
    bool enable_reasoning = true;
    bool enable_causal_edges = true;
    bool enable_semantic_edges = true;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Returns the config unchanged iff every field invariant holds; otherwise
// throws ConfigError naming the first violated field (declaration order).
EngineConfig validate_config(const EngineConfig& config);

// Endpoint, model names and client limits for networked providers, plus the
// mock provider knobs. The API key is only ever read from the environment.
struct ProviderConfig {
    std::string api_base;     // e.g. https://api.openai.com/v1
    std::string api_key;      // env ACTMEM_API_KEY, never from a config file
    std::string chat_model;
    std::string embed_model;
    std::string score_model;
    int max_in_flight = 8;
    int timeout_seconds = 60;
    std::size_t mock_dim = 64;
    double mock_lexical_weight = 0.7;
};

// Applies ACTMEM_API_KEY / ACTMEM_API_BASE / ACTMEM_CHAT_MODEL /
// ACTMEM_EMBED_MODEL / ACTMEM_SCORE_MODEL on top of whatever the config file
// set. Env vars win for endpoint and models; the key comes only from env.
void apply_env_overrides(ProviderConfig& config);

struct AppConfig {
    EngineConfig engine;
    ProviderConfig providers;
};

// Loads a JSON config file with optional "engine" and "providers" sections.
// Unknown keys are rejected. The engine section is validated.
AppConfig load_app_config(const std::string& path);

}  // namespace actmem
