#include "actmem/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "internal/json_codec.hpp"

namespace actmem {

namespace {

void check_range(const char* field, double value, double lo, double hi) {
    if (std::isnan(value) || value < lo || value > hi)
        throw ConfigError(field, "must be in [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "], got " +
                                     std::to_string(value));
}

void check_nonneg(const char* field, double value) {
    if (std::isnan(value) || value < 0.0)
        throw ConfigError(field, "must be nonnegative, got " + std::to_string(value));
}

void check_nonneg(const char* field, int value) {
    if (value < 0)
        throw ConfigError(field, "must be nonnegative, got " + std::to_string(value));
}

}  // namespace

EngineConfig validate_config(const EngineConfig& config) {
    check_range("cluster_distance_threshold", config.cluster_distance_threshold, 0.0, 2.0);
    check_range("semantic_edge_threshold", config.semantic_edge_threshold, -1.0, 1.0);
    check_nonneg("pmi_threshold", config.pmi_threshold);
    check_nonneg("k_initial", config.k_initial);
    check_nonneg("k_counterfactual", config.k_counterfactual);
    check_nonneg("graph_expansion_hops", config.graph_expansion_hops);
    check_nonneg("max_context_facts", config.max_context_facts);
    return config;
}

void to_json(nlohmann::json& j, const EngineConfig& c) {
    j = nlohmann::json{{"cluster_distance_threshold", c.cluster_distance_threshold},
                       {"semantic_edge_threshold", c.semantic_edge_threshold},
                       {"pmi_threshold", c.pmi_threshold},
                       {"k_initial", c.k_initial},
                       {"k_counterfactual", c.k_counterfactual},
                       {"graph_expansion_hops", c.graph_expansion_hops},
                       {"max_context_facts", c.max_context_facts},
                       {"enable_reasoning", c.enable_reasoning},
                       {"enable_causal_edges", c.enable_causal_edges},
                       {"enable_semantic_edges", c.enable_semantic_edges}};
}

void from_json(const nlohmann::json& j, EngineConfig& c) {
    EngineConfig defaults;
    for (const auto& [key, _] : j.items()) {
        static const char* known[] = {
            "cluster_distance_threshold", "semantic_edge_threshold",
            "pmi_threshold",              "k_initial",
            "k_counterfactual",           "graph_expansion_hops",
            "max_context_facts",          "enable_reasoning",
            "enable_causal_edges",        "enable_semantic_edges"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError(key, "unknown engine config field");
    }
    c.cluster_distance_threshold =
        j.value("cluster_distance_threshold", defaults.cluster_distance_threshold);
    c.semantic_edge_threshold =
        j.value("semantic_edge_threshold", defaults.semantic_edge_threshold);
    c.pmi_threshold = j.value("pmi_threshold", defaults.pmi_threshold);
    c.k_initial = j.value("k_initial", defaults.k_initial);
    c.k_counterfactual = j.value("k_counterfactual", defaults.k_counterfactual);
    c.graph_expansion_hops = j.value("graph_expansion_hops", defaults.graph_expansion_hops);
    c.max_context_facts = j.value("max_context_facts", defaults.max_context_facts);
    c.enable_reasoning = j.value("enable_reasoning", defaults.enable_reasoning);
    c.enable_causal_edges = j.value("enable_causal_edges", defaults.enable_causal_edges);
    c.enable_semantic_edges =
        j.value("enable_semantic_edges", defaults.enable_semantic_edges);
}

void apply_env_overrides(ProviderConfig& config) {
    auto pick = [](const char* name, std::string& into) {
        if (const char* value = std::getenv(name); value != nullptr && *value != '\0')
            into = value;
    };
    pick("ACTMEM_API_KEY", config.api_key);
    pick("ACTMEM_API_BASE", config.api_base);
    pick("ACTMEM_CHAT_MODEL", config.chat_model);
    pick("ACTMEM_EMBED_MODEL", config.embed_model);
    pick("ACTMEM_SCORE_MODEL", config.score_model);
}

AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError("config file " + path + ": " + e.what());
    }

    if (!j.is_object()) throw ConfigError(path, "config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key != "engine" && key != "providers")
            throw ConfigError(key, "unknown config section");
    }

    AppConfig config;
    if (j.contains("engine")) config.engine = j.at("engine").get<EngineConfig>();
    if (j.contains("providers")) {
        const auto& p = j.at("providers");
        if (p.contains("api_key"))
            throw ConfigError("api_key",
                              "credentials are read from ACTMEM_API_KEY, not config files");
        static const char* kKnown[] = {"api_base",       "chat_model",      "embed_model",
                                       "score_model",    "max_in_flight",   "timeout_seconds",
                                       "mock_dim",       "mock_lexical_weight"};
        for (const auto& [key, value] : p.items()) {
            bool known = false;
            for (const char* name : kKnown) known |= key == name;
            if (!known) throw ConfigError(key, "unknown provider config field");
        }
        config.providers.api_base = p.value("api_base", config.providers.api_base);
        config.providers.chat_model = p.value("chat_model", config.providers.chat_model);
        config.providers.embed_model = p.value("embed_model", config.providers.embed_model);
        config.providers.score_model = p.value("score_model", config.providers.score_model);
        config.providers.max_in_flight =
            p.value("max_in_flight", config.providers.max_in_flight);
        config.providers.timeout_seconds =
            p.value("timeout_seconds", config.providers.timeout_seconds);
        config.providers.mock_dim = p.value("mock_dim", config.providers.mock_dim);
        config.providers.mock_lexical_weight =
            p.value("mock_lexical_weight", config.providers.mock_lexical_weight);
        if (config.providers.max_in_flight < 1)
            throw ConfigError("max_in_flight", "must be at least 1");
    }
    validate_config(config.engine);
    return config;
}

}  // namespace actmem
