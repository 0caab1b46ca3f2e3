#pragma once

#include <string>
#include <vector>

#include "actmem/clustering.hpp"
#include "actmem/config.hpp"
#include "actmem/providers.hpp"
#include "actmem/types.hpp"

namespace actmem {

// Output of the ingest stage: facts in chronological order, one embedding
// per fact (parallel vectors), and the clustering decision trail.
struct IngestResult {
    std::vector<Fact> facts;
    std::vector<Embedding> embeddings;
    ClusteringResult clustering;
};

// Embeds texts through fixed-size batches so that call counts are a pure
// function of the input length, independent of scheduling.
std::vector<Embedding> embed_in_batches(const std::vector<std::string>& texts,
                                        EmbeddingProvider& embedder);

// extract -> embed -> cluster over a validated dialogue.
IngestResult ingest_dialogue(const std::vector<DialogueTurn>& turns,
                             const EngineConfig& config, const ProviderSuite& providers);

// The persisted state after ingest and before edge building: facts,
// embeddings and clusters with an empty edge set.
MemoryGraph to_edgeless_graph(const IngestResult& ingest);

// Mines and scores edges for an already-ingested (typically edgeless)
// graph. Facts are ordered by (session_id, turn_index, extraction_rank)
// for session-scope mining; stored clusters are kept as-is.
MemoryGraph rebuild_graph(const MemoryGraph& ingested, const EngineConfig& config,
                          const ProviderSuite& providers);

// Full pipeline: ingest_dialogue then edge assembly.
MemoryGraph ingest_and_build(const std::vector<DialogueTurn>& turns,
                             const EngineConfig& config, const ProviderSuite& providers);

}  // namespace actmem
