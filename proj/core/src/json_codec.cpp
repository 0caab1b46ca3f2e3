#include "internal/json_codec.hpp"

#include "actmem/errors.hpp"

namespace actmem {

using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
T pull(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw SerializationError(std::string("missing field: ") + key);
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(std::string("bad field ") + key + ": " + e.what());
    }
}

}  // namespace

ordered_json config_to_json(const EngineConfig& c) {
    return {{"cluster_distance_threshold", c.cluster_distance_threshold},
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

ordered_json fact_to_json(const Fact& f) {
    return {{"fact_id", f.fact_id},
            {"text", f.text},
            {"session_id", f.session_id},
            {"turn_index", f.turn_index},
            {"extraction_rank", f.extraction_rank}};
}

Fact fact_from_json(const ordered_json& j) {
    Fact f;
    f.fact_id = pull<std::string>(j, "fact_id");
    f.text = pull<std::string>(j, "text");
    f.session_id = pull<std::string>(j, "session_id");
    f.turn_index = pull<std::uint32_t>(j, "turn_index");
    f.extraction_rank = pull<std::uint32_t>(j, "extraction_rank");
    return f;
}

ordered_json cluster_to_json(const Cluster& c) {
    return {{"cluster_id", c.cluster_id},
            {"member_ids", c.member_ids},
            {"centroid", c.centroid.values},
            {"member_count", c.member_count}};
}

Cluster cluster_from_json(const ordered_json& j) {
    Cluster c;
    c.cluster_id = pull<std::uint32_t>(j, "cluster_id");
    c.member_ids = pull<std::vector<FactId>>(j, "member_ids");
    c.centroid.values = pull<std::vector<float>>(j, "centroid");
    c.member_count = pull<std::uint32_t>(j, "member_count");
    return c;
}

ordered_json edge_to_json(const Edge& e) {
    return {{"kind", std::string(edge_kind_name(e.kind))},
            {"src", e.src},
            {"dst", e.dst},
            {"score", e.score}};
}

Edge edge_from_json(const ordered_json& j) {
    Edge e;
    auto kind = pull<std::string>(j, "kind");
    try {
        e.kind = edge_kind_from_name(kind);
    } catch (const Error&) {
        throw SerializationError("unknown edge kind: " + kind);
    }
    e.src = pull<std::string>(j, "src");
    e.dst = pull<std::string>(j, "dst");
    e.score = pull<double>(j, "score");
    return e;
}

}  // namespace actmem
