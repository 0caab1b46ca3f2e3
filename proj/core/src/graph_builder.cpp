#include "actmem/graph_builder.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "actmem/clustering.hpp"
#include "actmem/errors.hpp"
#include "actmem/parallel.hpp"
#include "actmem/prompts.hpp"
#include "actmem/text.hpp"

namespace actmem {
namespace {

constexpr std::size_t kWindowLimit = 400;
constexpr std::size_t kWindowSize = 200;
constexpr std::size_t kWindowStride = 100;

// "i -> j" with optional surrounding whitespace; anything else is not a
// candidate line.
bool parse_arrow_line(std::string_view line, std::size_t& i, std::size_t& j) {
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip_ws = [&] {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
    };
    auto read_int = [&](std::size_t& out) {
        if (p >= end || !std::isdigit(static_cast<unsigned char>(*p))) return false;
        out = 0;
        while (p < end && std::isdigit(static_cast<unsigned char>(*p))) {
            out = out * 10 + static_cast<std::size_t>(*p - '0');
            ++p;
        }
        return true;
    };
    skip_ws();
    if (!read_int(i)) return false;
    skip_ws();
    if (p + 2 > end || p[0] != '-' || p[1] != '>') return false;
    p += 2;
    skip_ws();
    if (!read_int(j)) return false;
    skip_ws();
    return p == end;
}

bool is_none_marker(std::string_view line) {
    if (line.size() != 4) return false;
    return std::toupper(static_cast<unsigned char>(line[0])) == 'N' &&
           std::toupper(static_cast<unsigned char>(line[1])) == 'O' &&
           std::toupper(static_cast<unsigned char>(line[2])) == 'N' &&
           std::toupper(static_cast<unsigned char>(line[3])) == 'E';
}

std::vector<const Fact*> window_view(const std::vector<const Fact*>& facts,
                                     std::pair<std::size_t, std::size_t> range) {
    return {facts.begin() + static_cast<std::ptrdiff_t>(range.first),
            facts.begin() + static_cast<std::ptrdiff_t>(range.second)};
}

}  // namespace

std::vector<Edge> build_semantic_edges(const Cluster& cluster,
                                       const std::map<FactId, Embedding>& embeddings,
                                       double threshold) {
    std::vector<Edge> edges;
    const auto& ids = cluster.member_ids;
    for (std::size_t a = 0; a < ids.size(); ++a) {
        auto ea = embeddings.find(ids[a]);
        if (ea == embeddings.end()) throw IntegrityError("no embedding for fact " + ids[a]);
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
            auto eb = embeddings.find(ids[b]);
            if (eb == embeddings.end()) throw IntegrityError("no embedding for fact " + ids[b]);
            double sim = cosine_sim(ea->second, eb->second);
            if (sim > threshold) {
                Edge edge;
                edge.kind = EdgeKind::Semantic;
                edge.src = std::min(ids[a], ids[b]);
                edge.dst = std::max(ids[a], ids[b]);
                edge.score = sim;
                edges.push_back(std::move(edge));
            }
        }
    }
    std::sort(edges.begin(), edges.end(), edge_order_less);
    return edges;
}

std::vector<std::pair<std::size_t, std::size_t>> mining_windows(std::size_t fact_count) {
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    if (fact_count == 0) return windows;
    if (fact_count <= kWindowLimit) {
        windows.emplace_back(0, fact_count);
        return windows;
    }
    std::size_t start = 0;
    while (start + kWindowSize < fact_count) {
        windows.emplace_back(start, start + kWindowSize);
        start += kWindowStride;
    }
    windows.emplace_back(fact_count - kWindowSize, fact_count);
    return windows;
}

std::vector<CausalCandidate> mine_causal_candidates(const std::vector<const Fact*>& facts,
                                                    ChatProvider& chat, CausalScope origin) {
    std::vector<CausalCandidate> candidates;
    if (facts.size() < 2) return candidates;

    ChatRequest request;
    request.system_prompt = prompts::causal_system();
    request.user_content = prompts::causal_user(facts);
    std::string reply = chat.chat(request);

    bool any_content = false;
    bool any_parsed = false;
    for (std::string_view raw : split_lines(reply)) {
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        any_content = true;
        if (is_none_marker(line)) {
            any_parsed = true;
            continue;
        }
        std::size_t i = 0, j = 0;
        if (!parse_arrow_line(line, i, j)) continue;
        any_parsed = true;
        if (i == j || i < 1 || j < 1 || i > facts.size() || j > facts.size()) {
            spdlog::warn("causal mining: dropping invalid relation line '{}'",
                         std::string(line));
            continue;
        }
        candidates.push_back({facts[i - 1]->fact_id, facts[j - 1]->fact_id, origin});
    }
    if (any_content && !any_parsed) {
        spdlog::warn("causal mining: no parsable relation line in reply; treating as none");
    }
    return candidates;
}

double pmi_score(const Fact& src, const Fact& dst, NllScorer& scorer) {
    if (src.text.empty() || dst.text.empty()) throw Error("pmi_score: empty fact text");
    NllRequest uncond{"The fact is that", dst.text};
    NllRequest cond{src.text + ". As a result,", dst.text};
    return scorer.nll(uncond) - scorer.nll(cond);
}

std::vector<Edge> filter_causal(const std::vector<CausalCandidate>& candidates,
                                const std::map<FactId, Fact>& facts, NllScorer& scorer,
                                double threshold, int max_parallel) {
    std::vector<Edge> edges;
    if (candidates.empty()) return edges;

    struct Outcome {
        bool ok = false;
        double score = 0.0;
        std::string error;
    };
    std::vector<Outcome> outcomes(candidates.size());

    parallel_for(candidates.size(), max_parallel, [&](std::size_t i) {
        const auto& cand = candidates[i];
        auto src = facts.find(cand.src);
        auto dst = facts.find(cand.dst);
        if (src == facts.end() || dst == facts.end()) {
            throw IntegrityError("causal candidate references unknown fact");
        }
        try {
            outcomes[i].score = pmi_score(src->second, dst->second, scorer);
            outcomes[i].ok = true;
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });

    std::size_t failed = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!outcomes[i].ok) {
            ++failed;
            spdlog::warn("causal filter: dropping {} -> {}: {}", candidates[i].src,
                         candidates[i].dst, outcomes[i].error);
            continue;
        }
        if (outcomes[i].score > threshold) {
            Edge edge;
            edge.kind = EdgeKind::Causal;
            edge.src = candidates[i].src;
            edge.dst = candidates[i].dst;
            edge.score = outcomes[i].score;
            edges.push_back(std::move(edge));
        }
    }
    if (failed == candidates.size()) {
        throw Error("causal filter: scoring failed for all " + std::to_string(failed) +
                    " candidates: " + outcomes[0].error);
    }
    std::sort(edges.begin(), edges.end(), edge_order_less);
    return edges;
}

MemoryGraph build_graph(const std::vector<Fact>& facts,
                        const std::vector<Embedding>& embeddings,
                        const std::vector<Cluster>& clusters, const EngineConfig& config,
                        const ProviderSuite& providers) {
    if (facts.size() != embeddings.size()) {
        throw Error("build_graph: facts and embeddings differ in length");
    }
    validate_config(config);

    MemoryGraph graph;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        graph.facts.emplace(facts[i].fact_id, facts[i]);
        graph.embeddings.emplace(facts[i].fact_id, embeddings[i]);
    }
    graph.clusters = clusters;
    if (facts.empty()) {
        validate_graph(graph);
        return graph;
    }

    std::vector<Edge> all_edges;

    if (config.enable_semantic_edges) {
        std::vector<std::vector<Edge>> per_cluster(clusters.size());
        parallel_for(clusters.size(), providers.max_parallel, [&](std::size_t i) {
            per_cluster[i] = build_semantic_edges(clusters[i], graph.embeddings,
                                                  config.semantic_edge_threshold);
        });
        for (auto& chunk : per_cluster) {
            all_edges.insert(all_edges.end(), chunk.begin(), chunk.end());
        }
    }

    if (config.enable_causal_edges && providers.chat && providers.scorer) {
        // scopes in a fixed order: clusters by id, then sessions in first-
        // appearance order, each chunked by the window guard
        std::vector<std::vector<const Fact*>> scopes;
        std::vector<CausalScope> scope_kinds;
        for (const auto& cluster : clusters) {
            std::vector<const Fact*> members;
            members.reserve(cluster.member_ids.size());
            for (const auto& id : cluster.member_ids) {
                auto it = graph.facts.find(id);
                if (it == graph.facts.end()) {
                    throw IntegrityError("cluster member " + id + " is not a stored fact");
                }
                members.push_back(&it->second);
            }
            for (auto range : mining_windows(members.size())) {
                scopes.push_back(window_view(members, range));
                scope_kinds.push_back(CausalScope::Cluster);
            }
        }
        std::vector<std::string> session_order;
        std::map<std::string, std::vector<const Fact*>> sessions;
        for (const auto& fact : facts) {
            auto [it, fresh] = sessions.try_emplace(fact.session_id);
            if (fresh) session_order.push_back(fact.session_id);
            it->second.push_back(&graph.facts.at(fact.fact_id));
        }
        for (const auto& session_id : session_order) {
            const auto& members = sessions[session_id];
            for (auto range : mining_windows(members.size())) {
                scopes.push_back(window_view(members, range));
                scope_kinds.push_back(CausalScope::Session);
            }
        }

        std::vector<std::vector<CausalCandidate>> mined(scopes.size());
        parallel_for(scopes.size(), providers.max_parallel, [&](std::size_t i) {
            if (scopes[i].size() < 2) return;
            mined[i] = mine_causal_candidates(scopes[i], *providers.chat, scope_kinds[i]);
        });

        std::vector<CausalCandidate> candidates;
        std::set<std::pair<FactId, FactId>> seen;
        for (const auto& chunk : mined) {
            for (const auto& cand : chunk) {
                if (seen.emplace(cand.src, cand.dst).second) candidates.push_back(cand);
            }
        }

        auto causal = filter_causal(candidates, graph.facts, *providers.scorer,
                                    config.pmi_threshold, providers.max_parallel);
        all_edges.insert(all_edges.end(), causal.begin(), causal.end());
    }

    std::sort(all_edges.begin(), all_edges.end(), edge_order_less);
    graph.edges = std::move(all_edges);
    validate_graph(graph);
    return graph;
}

}  // namespace actmem
