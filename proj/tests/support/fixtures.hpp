#pragma once

// Shared test fixtures: a scripted multi-session dialogue whose gold fact
// is lexically unrelated to the probe query (reachable only through the
// consequence-knowledge hop), plus small graph/embedding builders.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actmem/clustering.hpp"
#include "actmem/config.hpp"
#include "actmem/graph_builder.hpp"
#include "actmem/providers/mock.hpp"
#include "actmem/types.hpp"

namespace fixtures {

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "actmem-XXXXXX").string();
        if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& child = "") const {
        return child.empty() ? path_.string() : (path_ / child).string();
    }

private:
    std::filesystem::path path_;
};

inline actmem::Embedding axis_vec(std::size_t dim, std::size_t axis) {
    std::vector<double> v(dim, 0.0);
    v.at(axis) = 1.0;
    return actmem::normalized(v);
}

inline actmem::Embedding unit_from(std::vector<double> values) {
    return actmem::normalized(values);
}

inline actmem::Embedding random_unit(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    return actmem::normalized(v);
}

// n facts with random unit embeddings spread over two sessions, clustered
// by the production single-pass algorithm, semantic edges only. Satisfies
// every structural invariant.
inline actmem::MemoryGraph random_valid_graph(std::size_t n, std::uint64_t seed,
                                              std::size_t dim = 16,
                                              double distance_threshold = 0.8,
                                              double edge_threshold = 0.1) {
    std::mt19937_64 rng(seed);
    std::vector<actmem::Fact> facts;
    std::vector<actmem::Embedding> embeddings;
    for (std::size_t i = 0; i < n; ++i) {
        std::string session = i % 2 == 0 ? "alpha" : "beta";
        facts.push_back(actmem::make_fact("stored statement number " + std::to_string(i),
                                          session, static_cast<std::uint32_t>(i / 2),
                                          static_cast<std::uint32_t>(i % 2)));
        embeddings.push_back(random_unit(dim, rng));
    }
    actmem::ClusteringResult clustering =
        actmem::assign_incremental(facts, embeddings, distance_threshold);

    actmem::MemoryGraph graph;
    for (std::size_t i = 0; i < n; ++i) {
        graph.facts.emplace(facts[i].fact_id, facts[i]);
        graph.embeddings.emplace(facts[i].fact_id, embeddings[i]);
    }
    graph.clusters = clustering.clusters;
    for (const actmem::Cluster& cluster : graph.clusters) {
        auto edges = actmem::build_semantic_edges(cluster, graph.embeddings, edge_threshold);
        graph.edges.insert(graph.edges.end(), edges.begin(), edges.end());
    }
    if (n >= 2) {
        actmem::Edge causal;
        causal.kind = actmem::EdgeKind::Causal;
        causal.src = facts[0].fact_id;
        causal.dst = facts[1].fact_id;
        causal.score = 1.25;
        graph.edges.push_back(causal);
    }
    std::sort(graph.edges.begin(), graph.edges.end(), actmem::edge_order_less);
    actmem::validate_graph(graph);
    return graph;
}

// One anchor session about a plant-chewing puppy plus five decor/food noise
// sessions. The probe query shares no content token with the gold fact, so
// similarity retrieval alone misses it; the scripted consequence statement
// shares four tokens with it, which is what pulls it in during refinement.
namespace sago {

inline constexpr const char* kQuery = "Should I buy a sago palm for the living room";
inline constexpr const char* kGoldFact = "Puppy chewed fern once and became very ill";
inline constexpr const char* kAnchorFact = "User puppy is teething and chews anything found";
inline constexpr const char* kKnowledge =
    "A teething puppy may chew houseplants and become very ill";
inline constexpr const char* kAnswer =
    "A sago palm is risky because the puppy chews plants and was very ill after chewing one "
    "before.";

inline std::vector<actmem::DialogueTurn> turns() {
    return {
        {"s_decor", 0, "I want to buy a sago palm for the living room", "Nice choice."},
        {"s_food", 0, "Sago pudding is my favorite dessert", "Tasty."},
        {"s_paint", 0, "I repainted the living room walls in light gray", "Sounds fresh."},
        {"s_pets", 0, "My puppy is teething and chews anything he finds", "Teething is tough."},
        {"s_pets", 1, "Last month the puppy chewed a fern and became very ill", "Poor thing."},
        {"s_photo", 0, "I keep a tall palm tree photo in the hallway", "Lovely."},
        {"s_sofa", 0, "We bought a new sofa for the living room", "Comfy."},
    };
}

inline std::vector<actmem::MockScriptRule> script() {
    using Rule = actmem::MockScriptRule;
    auto contains = [](std::string pattern, std::string reply) {
        Rule rule;
        rule.match = Rule::Match::Contains;
        rule.pattern = std::move(pattern);
        rule.reply = std::move(reply);
        return rule;
    };
    return {
        contains("what negative consequences might occur", kKnowledge),
        // "\nContext:" keeps this from matching judge prompts, which also
        // begin with the question line.
        contains("Question: Should I buy a sago palm for the living room\nContext:", kAnswer),
        contains("User: My puppy is teething and chews anything he finds", kAnchorFact),
        contains("User: Last month the puppy chewed a fern and became very ill", kGoldFact),
        contains("User: I want to buy a sago palm for the living room",
                 "User wants to buy a sago palm for the living room"),
        contains("User: Sago pudding is my favorite dessert",
                 "Sago pudding is the user favorite dessert"),
        contains("User: I repainted the living room walls in light gray",
                 "User repainted the living room walls in light gray"),
        contains("User: I keep a tall palm tree photo in the hallway",
                 "User keeps a tall palm tree photo in the hallway"),
        contains("User: We bought a new sofa for the living room",
                 "User bought a new sofa for the living room"),
        contains("Causal relations:", "NONE"),
    };
}

// Small retrieval budget so the three-fact initial context is all noise.
inline actmem::EngineConfig config() {
    actmem::EngineConfig config;
    config.k_initial = 3;
    config.k_counterfactual = 2;
    config.graph_expansion_hops = 1;
    return config;
}

inline actmem::ProviderSuite suite(std::uint64_t seed = 0) {
    actmem::ProviderConfig providers;
    actmem::ProviderSuite suite = actmem::make_mock_suite(providers, seed);
    auto chat = std::dynamic_pointer_cast<actmem::MockChatProvider>(suite.chat);
    for (actmem::MockScriptRule& rule : script()) chat->add_rule(std::move(rule));
    return suite;
}

}  // namespace sago
}  // namespace fixtures
