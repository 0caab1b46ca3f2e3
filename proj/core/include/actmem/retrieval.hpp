#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actmem/config.hpp"
#include "actmem/providers.hpp"
#include "actmem/types.hpp"

namespace actmem {

struct Query {
    std::string text;     // nonempty
    Embedding embedding;  // unit-normalized
};

// One line of the assembled answer context: either a stored fact (with
// provenance) or the counterfactual knowledge statement.
struct ContextItem {
    bool is_knowledge = false;
    FactId fact_id;          // empty for the knowledge item
    std::string session_id;  // empty for the knowledge item
    std::string text;

    friend bool operator==(const ContextItem&, const ContextItem&) = default;
};

// The three retrieval stages plus the assembled final context. final_items
// is initial facts first, then the knowledge item (when nonempty), then
// refined facts; refined facts never duplicate initial ones, and the total
// respects max_context_facts without ever evicting an initial fact.
struct RetrievalContext {
    std::vector<Fact> initial;
    std::string counterfactual;
    std::vector<Fact> refined;
    std::vector<ContextItem> final_items;
};

struct ScoredFact {
    FactId fact_id;
    double similarity = 0.0;

    friend bool operator==(const ScoredFact&, const ScoredFact&) = default;
};

// One appended graph-expansion neighbor: reached from `from` over an edge
// of the given kind and score, `hop` steps away from the seed.
struct ExpansionStep {
    FactId from;
    FactId to;
    std::string edge_kind;
    double edge_score = 0.0;
    int hop = 1;

    friend bool operator==(const ExpansionStep&, const ExpansionStep&) = default;
};

// Dense provider-call-id range [begin, end) taken from the shared CallLog.
struct CallSpan {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;

    friend bool operator==(const CallSpan&, const CallSpan&) = default;
};

// Full audit record of one query: every retrieved id with its similarity,
// the counterfactual statement, every expansion step, and which provider
// calls belong to which stage.
struct StepTrace {
    std::string query_text;
    std::vector<ScoredFact> initial;
    std::string counterfactual;
    std::vector<ScoredFact> refined_seeds;
    std::vector<ExpansionStep> expansions;
    CallSpan embed_query_calls;
    CallSpan reasoning_calls;
    CallSpan refine_calls;
    CallSpan answer_calls;

    // Stable-key-order JSON; indent < 0 means compact one-line form.
    std::string to_json_string(int indent = -1) const;
};

// Every stored fact ranked by cosine similarity to the embedding,
// descending, ties broken by ascending fact_id, truncated to k.
std::vector<ScoredFact> rank_by_similarity(const Embedding& embedding,
                                           const MemoryGraph& graph, std::size_t k);

// Step 1: top-k facts for the query. Empty graph or k = 0 yields an empty
// list, not an error.
std::vector<Fact> initial_retrieve(const Query& query, const MemoryGraph& graph,
                                   std::size_t k);

// Step 2: one counterfactual-consequence knowledge statement for the query
// over the initial facts. A provider refusal degrades to an empty string
// with a warning; transport errors propagate.
std::string counterfactual(const Query& query, const std::vector<Fact>& initial,
                           ChatProvider& chat);

// Step 3: embeds the knowledge statement, takes the top-k facts not in
// `exclude`, then expands each hit along graph edges (semantic edges in
// both directions, causal edges followed both ways) for `hops` steps,
// appending unseen neighbors in descending edge-score order (ties by
// ascending fact_id) while the budget lasts. Returns at most `budget`
// facts; empty statement yields an empty list. Appends seed/expansion
// details to `trace` when given.
std::vector<Fact> refine_retrieve(const std::string& knowledge, const MemoryGraph& graph,
                                  std::size_t k, int hops, std::size_t budget,
                                  EmbeddingProvider& embedder,
                                  const std::vector<Fact>& exclude,
                                  StepTrace* trace = nullptr);

// Builds final_items from the three stages: initial, knowledge, refined.
// Refined items are dropped (never initial ones) if the cap would be
// exceeded — a safety net, since refine_retrieve already budgets.
RetrievalContext assemble_context(std::vector<Fact> initial, std::string knowledge,
                                  std::vector<Fact> refined, std::size_t max_context_facts);

// Final response over the assembled context. Calls the provider even when
// the context is empty (the query alone may be answerable).
std::string answer(const Query& query, const RetrievalContext& context, ChatProvider& chat);

struct QueryResult {
    std::string answer;
    RetrievalContext context;
    StepTrace trace;
};

// The whole loop: embed the query, Step 1 initial retrieval, Step 2
// counterfactual reasoning (skipped when enable_reasoning is false, in
// which case no chat call happens before the answer), Step 3 refinement
// with graph expansion, context assembly, and answer generation.
QueryResult query_pipeline(const std::string& query_text, const MemoryGraph& graph,
                           const EngineConfig& config, const ProviderSuite& providers);

}  // namespace actmem
