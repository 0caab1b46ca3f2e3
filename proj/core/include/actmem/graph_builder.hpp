#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "actmem/config.hpp"
#include "actmem/providers.hpp"
#include "actmem/types.hpp"

namespace actmem {

enum class CausalScope { Cluster, Session };

// A mined (unverified) directed cause hypothesis between two stored facts.
struct CausalCandidate {
    FactId src;
    FactId dst;
    CausalScope origin = CausalScope::Cluster;

    friend bool operator==(const CausalCandidate&, const CausalCandidate&) = default;
};

// All unordered intra-cluster pairs with cosine similarity strictly above
// the threshold, as canonical (src < dst) Semantic edges scored by the
// similarity. O(m^2) in the cluster size by design.
std::vector<Edge> build_semantic_edges(const Cluster& cluster,
                                       const std::map<FactId, Embedding>& embeddings,
                                       double threshold);

// Index ranges [first, last) used to mine one fact group. Groups of at most
// 400 facts are mined whole; larger groups are chunked into overlapping
// 200-fact windows with stride 100 to bound prompt size.
std::vector<std::pair<std::size_t, std::size_t>> mining_windows(std::size_t fact_count);

// Asks the chat provider for cause-effect relations over the enumerated
// facts and parses strict "i -> j" reply lines (1-based). Out-of-range or
// self-referencing lines are dropped with a warning; a nonempty reply with
// no parsable line (and no NONE marker) yields an empty list with a
// warning. Groups under 2 facts mine nothing.
std::vector<CausalCandidate> mine_causal_candidates(const std::vector<const Fact*>& facts,
                                                    ChatProvider& chat, CausalScope origin);

// Information gain of dst given src, in nats: nll("The fact is that", dst)
// minus nll("{src}. As a result,", dst). Positive when src makes dst more
// likely; direction-sensitive.
double pmi_score(const Fact& src, const Fact& dst, NllScorer& scorer);

// Keeps exactly the candidates whose pmi_score is strictly above the
// threshold, as Causal edges scored by the PMI value. Per-candidate scorer
// failures drop that candidate with a warning; throws only when every
// candidate fails. Scoring runs concurrently up to max_parallel.
std::vector<Edge> filter_causal(const std::vector<CausalCandidate>& candidates,
                                const std::map<FactId, Fact>& facts, NllScorer& scorer,
                                double threshold, int max_parallel);

// Full graph assembly: facts + embeddings + clusters are adopted as given;
// semantic edges (unless disabled) and PMI-verified causal edges (unless
// disabled) are merged in canonical sorted order. Causal mining covers both
// cluster scope and per-session scope, deduplicated on (src, dst). The
// result satisfies every structural graph invariant.
MemoryGraph build_graph(const std::vector<Fact>& facts,
                        const std::vector<Embedding>& embeddings,
                        const std::vector<Cluster>& clusters, const EngineConfig& config,
                        const ProviderSuite& providers);

}  // namespace actmem
