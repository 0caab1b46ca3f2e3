// Microbenchmarks for the engine hot paths: single-pass clustering, the
// exact similarity scan behind retrieval, and intra-cluster edge building.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "actmem/clustering.hpp"
#include "actmem/graph_builder.hpp"
#include "actmem/retrieval.hpp"
#include "actmem/types.hpp"

namespace {

constexpr std::size_t kDim = 64;

actmem::Embedding random_unit(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    return actmem::normalized(v);
}

struct Corpus {
    std::vector<actmem::Fact> facts;
    std::vector<actmem::Embedding> embeddings;
};

Corpus make_corpus(std::size_t n) {
    std::mt19937_64 rng(42);
    Corpus corpus;
    corpus.facts.reserve(n);
    corpus.embeddings.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        corpus.facts.push_back(actmem::make_fact("benchmark fact " + std::to_string(i),
                                                 "bench", static_cast<std::uint32_t>(i), 0));
        corpus.embeddings.push_back(random_unit(kDim, rng));
    }
    return corpus;
}

}  // namespace

static void BM_ClusterAssign(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Corpus corpus = make_corpus(n);
    for (auto _ : state) {
        actmem::ClusteringResult result =
            actmem::assign_incremental(corpus.facts, corpus.embeddings, 0.2);
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ClusterAssign)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_RankBySimilarity(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Corpus corpus = make_corpus(n);
    actmem::MemoryGraph graph;
    for (std::size_t i = 0; i < n; ++i) {
        graph.facts.emplace(corpus.facts[i].fact_id, corpus.facts[i]);
        graph.embeddings.emplace(corpus.facts[i].fact_id, corpus.embeddings[i]);
    }
    std::mt19937_64 rng(7);
    actmem::Embedding query = random_unit(kDim, rng);
    for (auto _ : state) {
        std::vector<actmem::ScoredFact> top = actmem::rank_by_similarity(query, graph, 20);
        benchmark::DoNotOptimize(top);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RankBySimilarity)->Arg(1024)->Arg(8192)->Arg(16384);

static void BM_SemanticEdges(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    Corpus corpus = make_corpus(m);
    actmem::Cluster cluster;
    cluster.cluster_id = 0;
    std::map<actmem::FactId, actmem::Embedding> embeddings;
    for (std::size_t i = 0; i < m; ++i) {
        cluster.member_ids.push_back(corpus.facts[i].fact_id);
        embeddings.emplace(corpus.facts[i].fact_id, corpus.embeddings[i]);
    }
    cluster.member_count = static_cast<std::uint32_t>(m);
    cluster.centroid = corpus.embeddings.front();
    for (auto _ : state) {
        std::vector<actmem::Edge> edges =
            actmem::build_semantic_edges(cluster, embeddings, 0.3);
        benchmark::DoNotOptimize(edges);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(m * (m - 1) / 2));
}
BENCHMARK(BM_SemanticEdges)->Arg(64)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
