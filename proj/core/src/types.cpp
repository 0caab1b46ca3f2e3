#include "actmem/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "actmem/text.hpp"

namespace actmem {

namespace {
constexpr char kIdSep = '\x1f';
}

FactId derive_fact_id(std::string_view text, std::string_view session_id,
                      std::uint32_t turn_index, std::uint32_t extraction_rank) {
    std::string payload;
    payload.reserve(text.size() + session_id.size() + 24);
    payload.append(text);
    payload.push_back(kIdSep);
    payload.append(session_id);
    payload.push_back(kIdSep);
    payload.append(std::to_string(turn_index));
    payload.push_back(kIdSep);
    payload.append(std::to_string(extraction_rank));
    return to_hex64(fnv1a64(payload));
}

Fact make_fact(std::string text, std::string session_id, std::uint32_t turn_index,
               std::uint32_t extraction_rank) {
    if (text.empty()) throw Error("fact text must be nonempty");
    Fact fact;
    fact.fact_id = derive_fact_id(text, session_id, turn_index, extraction_rank);
    fact.text = std::move(text);
    fact.session_id = std::move(session_id);
    fact.turn_index = turn_index;
    fact.extraction_rank = extraction_rank;
    return fact;
}

double Embedding::norm() const {
    double sum = 0.0;
    for (float v : values) sum += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sum);
}

Embedding normalized(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw Error("embedding component not finite");
        sum += v * v;
    }
    double norm = std::sqrt(sum);
    if (norm < 1e-12) throw ZeroVector("cannot normalize near-zero vector");
    Embedding out;
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(static_cast<float>(v / norm));
    return out;
}

std::string_view edge_kind_name(EdgeKind kind) {
    return kind == EdgeKind::Semantic ? "semantic" : "causal";
}

EdgeKind edge_kind_from_name(std::string_view name) {
    if (name == "semantic") return EdgeKind::Semantic;
    if (name == "causal") return EdgeKind::Causal;
    throw SerializationError("unknown edge kind: " + std::string(name));
}

bool edge_order_less(const Edge& a, const Edge& b) {
    return std::make_tuple(edge_kind_name(a.kind), std::string_view(a.src),
                           std::string_view(a.dst)) <
           std::make_tuple(edge_kind_name(b.kind), std::string_view(b.src),
                           std::string_view(b.dst));
}

void validate_graph(const MemoryGraph& graph) {
    const std::size_t dim =
        graph.embeddings.empty() ? 0 : graph.embeddings.begin()->second.dim();

    for (const auto& [id, fact] : graph.facts) {
        if (fact.fact_id != id)
            throw IntegrityError("fact map key mismatch for '" + id + "'");
        if (fact.text.empty())
            throw IntegrityError("fact '" + id + "' has empty text");
        auto it = graph.embeddings.find(id);
        if (it == graph.embeddings.end())
            throw IntegrityError("fact '" + id + "' has no embedding");
        if (it->second.dim() != dim)
            throw IntegrityError("embedding dimension mismatch for fact '" + id + "'");
        // 1e-4 instead of the construction-time 1e-6: stored vectors have
        // been rounded through 32-bit floats.
        if (std::abs(it->second.norm() - 1.0) > 1e-4)
            throw IntegrityError("embedding for fact '" + id + "' is not unit norm");
    }
    for (const auto& [id, _] : graph.embeddings) {
        if (!graph.facts.contains(id))
            throw IntegrityError("embedding without fact: '" + id + "'");
    }

    std::set<FactId> seen_members;
    std::size_t member_total = 0;
    for (const Cluster& cluster : graph.clusters) {
        if (cluster.member_ids.empty())
            throw IntegrityError("cluster " + std::to_string(cluster.cluster_id) +
                                 " is empty");
        if (cluster.member_count != cluster.member_ids.size())
            throw IntegrityError("cluster " + std::to_string(cluster.cluster_id) +
                                 " member_count mismatch");
        for (const FactId& id : cluster.member_ids) {
            if (!graph.facts.contains(id))
                throw IntegrityError("cluster " + std::to_string(cluster.cluster_id) +
                                     " references missing fact '" + id + "'");
            if (!seen_members.insert(id).second)
                throw IntegrityError("fact '" + id + "' appears in two clusters");
        }
        member_total += cluster.member_ids.size();
        if (dim != 0 && cluster.centroid.dim() != dim)
            throw IntegrityError("cluster " + std::to_string(cluster.cluster_id) +
                                 " centroid dimension mismatch");
        if (std::abs(cluster.centroid.norm() - 1.0) > 1e-4)
            throw IntegrityError("cluster " + std::to_string(cluster.cluster_id) +
                                 " centroid is not unit norm");
    }
    if (member_total != graph.facts.size())
        throw IntegrityError("clusters do not partition the fact set");

    const Edge* prev = nullptr;
    std::set<std::tuple<EdgeKind, FactId, FactId>> seen_edges;
    for (const Edge& edge : graph.edges) {
        std::string label = std::string(edge_kind_name(edge.kind)) + " " + edge.src +
                            " -> " + edge.dst;
        if (edge.src == edge.dst) throw IntegrityError("self edge: " + label);
        if (!graph.facts.contains(edge.src))
            throw IntegrityError("edge references missing fact: " + label);
        if (!graph.facts.contains(edge.dst))
            throw IntegrityError("edge references missing fact: " + label);
        if (edge.kind == EdgeKind::Semantic) {
            if (edge.src >= edge.dst)
                throw IntegrityError("semantic edge not canonical: " + label);
            if (edge.score < -1.0 - 1e-9 || edge.score > 1.0 + 1e-9)
                throw IntegrityError("semantic score out of range: " + label);
        }
        if (!std::isfinite(edge.score))
            throw IntegrityError("edge score not finite: " + label);
        if (!seen_edges.insert({edge.kind, edge.src, edge.dst}).second)
            throw IntegrityError("duplicate edge: " + label);
        if (prev != nullptr && edge_order_less(edge, *prev))
            throw IntegrityError("edges out of canonical order at: " + label);
        prev = &edge;
    }
}

void validate_turns(const std::vector<DialogueTurn>& turns) {
    const DialogueTurn* prev = nullptr;
    for (const DialogueTurn& turn : turns) {
        if (turn.user_text.empty())
            throw Error("turn " + turn.session_id + "/" +
                        std::to_string(turn.turn_index) + " has empty user_text");
        if (prev != nullptr) {
            auto prev_key = std::tie(prev->session_id, prev->turn_index);
            auto key = std::tie(turn.session_id, turn.turn_index);
            if (key < prev_key)
                throw Error("turns not sorted by (session_id, turn_index) at " +
                            turn.session_id + "/" + std::to_string(turn.turn_index));
            if (key == prev_key)
                throw Error("duplicate turn_index " + std::to_string(turn.turn_index) +
                            " in session " + turn.session_id);
        }
        prev = &turn;
    }
}

}  // namespace actmem
