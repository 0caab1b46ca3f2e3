#include "actmem/engine.hpp"

#include <algorithm>

#include "actmem/extraction.hpp"
#include "actmem/graph_builder.hpp"

namespace actmem {
namespace {

constexpr std::size_t kEmbedBatch = 64;

}  // namespace

std::vector<Embedding> embed_in_batches(const std::vector<std::string>& texts,
                                        EmbeddingProvider& embedder) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t at = 0; at < texts.size(); at += kEmbedBatch) {
        std::size_t end = std::min(texts.size(), at + kEmbedBatch);
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(at),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<Embedding> part = embedder.embed(batch);
        if (part.size() != batch.size()) {
            throw Error("embedding provider returned " + std::to_string(part.size()) +
                        " vectors for " + std::to_string(batch.size()) + " inputs");
        }
        for (auto& embedding : part) out.push_back(std::move(embedding));
    }
    return out;
}

IngestResult ingest_dialogue(const std::vector<DialogueTurn>& turns,
                             const EngineConfig& config, const ProviderSuite& providers) {
    validate_config(config);
    if (!providers.chat) throw Error("ingest requires a chat provider");
    if (!providers.embedder) throw Error("ingest requires an embedding provider");

    IngestResult result;
    result.facts = extract_corpus(turns, *providers.chat, providers.max_parallel);

    std::vector<std::string> texts;
    texts.reserve(result.facts.size());
    for (const Fact& fact : result.facts) texts.push_back(fact.text);
    result.embeddings = embed_in_batches(texts, *providers.embedder);

    result.clustering = assign_incremental(result.facts, result.embeddings,
                                           config.cluster_distance_threshold);
    return result;
}

MemoryGraph to_edgeless_graph(const IngestResult& ingest) {
    MemoryGraph graph;
    for (std::size_t i = 0; i < ingest.facts.size(); ++i) {
        graph.facts.emplace(ingest.facts[i].fact_id, ingest.facts[i]);
        graph.embeddings.emplace(ingest.facts[i].fact_id, ingest.embeddings[i]);
    }
    graph.clusters = ingest.clustering.clusters;
    validate_graph(graph);
    return graph;
}

MemoryGraph rebuild_graph(const MemoryGraph& ingested, const EngineConfig& config,
                          const ProviderSuite& providers) {
    std::vector<Fact> facts;
    facts.reserve(ingested.facts.size());
    for (const auto& [id, fact] : ingested.facts) facts.push_back(fact);
    std::sort(facts.begin(), facts.end(), [](const Fact& a, const Fact& b) {
        return std::tie(a.session_id, a.turn_index, a.extraction_rank, a.fact_id) <
               std::tie(b.session_id, b.turn_index, b.extraction_rank, b.fact_id);
    });

    std::vector<Embedding> embeddings;
    embeddings.reserve(facts.size());
    for (const Fact& fact : facts) embeddings.push_back(ingested.embeddings.at(fact.fact_id));

    return build_graph(facts, embeddings, ingested.clusters, config, providers);
}

MemoryGraph ingest_and_build(const std::vector<DialogueTurn>& turns,
                             const EngineConfig& config, const ProviderSuite& providers) {
    IngestResult ingest = ingest_dialogue(turns, config, providers);
    return build_graph(ingest.facts, ingest.embeddings, ingest.clustering.clusters, config,
                       providers);
}

}  // namespace actmem
