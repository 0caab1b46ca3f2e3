#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "actmem/errors.hpp"

namespace actmem {

using FactId = std::string;

// One (user, assistant) exchange. turn_index is unique within a session and
// user_text is never empty.
struct DialogueTurn {
    std::string session_id;
    std::uint32_t turn_index = 0;
    std::string user_text;
    std::string assistant_text;

    friend bool operator==(const DialogueTurn&, const DialogueTurn&) = default;
};

// Atomic declarative memory statement with provenance back to its turn.
struct Fact {
    FactId fact_id;
    std::string text;
    std::string session_id;
    std::uint32_t turn_index = 0;
    std::uint32_t extraction_rank = 0;

    friend bool operator==(const Fact&, const Fact&) = default;
};

// Content-derived id: identical (text, provenance) yields the same id on
// every run.
FactId derive_fact_id(std::string_view text, std::string_view session_id,
                      std::uint32_t turn_index, std::uint32_t extraction_rank);

Fact make_fact(std::string text, std::string session_id, std::uint32_t turn_index,
               std::uint32_t extraction_rank);

// Components are stored as 32-bit floats (the interchange precision);
// similarity math happens in double.
struct Embedding {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    double norm() const;

    friend bool operator==(const Embedding&, const Embedding&) = default;
};

// L2 normalization in double precision. Throws ZeroVector when the input
// norm is below 1e-12.
Embedding normalized(const std::vector<double>& values);

struct Cluster {
    std::uint32_t cluster_id = 0;
    std::vector<FactId> member_ids;  // chronological insertion order
    Embedding centroid;              // unit norm
    std::uint32_t member_count = 0;

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

enum class EdgeKind { Semantic, Causal };

std::string_view edge_kind_name(EdgeKind kind);
EdgeKind edge_kind_from_name(std::string_view name);

// Semantic edges are undirected, stored canonically with src < dst, score =
// cosine similarity. Causal edges are directed src -> dst, score = S_PMI.
struct Edge {
    EdgeKind kind = EdgeKind::Semantic;
    FactId src;
    FactId dst;
    double score = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Serialization order: (kind name, src, dst); "causal" sorts before
// "semantic".
bool edge_order_less(const Edge& a, const Edge& b);

struct MemoryGraph {
    std::map<FactId, Fact> facts;
    std::map<FactId, Embedding> embeddings;
    std::vector<Cluster> clusters;
    std::vector<Edge> edges;  // kept sorted by edge_order_less

    bool empty() const { return facts.empty(); }
    std::size_t fact_count() const { return facts.size(); }

    friend bool operator==(const MemoryGraph&, const MemoryGraph&) = default;
};

// Structural invariants shared by the builder and the loader: edge endpoints
// resolve, clusters partition the fact set, every fact has an embedding of a
// consistent dimension, canonical edge form and ordering. Throws
// IntegrityError naming the offender.
void validate_graph(const MemoryGraph& graph);

// Turn invariants: user_text nonempty, sorted by (session_id, turn_index),
// turn_index unique within a session. Throws Error on violation.
void validate_turns(const std::vector<DialogueTurn>& turns);

}  // namespace actmem
