#include "actmem/retrieval.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "actmem/clustering.hpp"
#include "actmem/errors.hpp"
#include "actmem/prompts.hpp"

namespace actmem {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json scored_to_json(const std::vector<ScoredFact>& scored) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : scored) {
        arr.push_back({{"fact_id", s.fact_id}, {"similarity", s.similarity}});
    }
    return arr;
}

ordered_json span_to_json(const CallSpan& span) {
    return {{"begin", span.begin}, {"end", span.end}};
}

std::vector<const Fact*> fact_pointers(const std::vector<Fact>& facts) {
    std::vector<const Fact*> out;
    out.reserve(facts.size());
    for (const auto& f : facts) out.push_back(&f);
    return out;
}

const Fact& fact_or_throw(const MemoryGraph& graph, const FactId& id) {
    auto it = graph.facts.find(id);
    if (it == graph.facts.end()) throw IntegrityError("unknown fact id " + id);
    return it->second;
}

// Neighbors of `id` over every edge, causal links walked both ways.
std::vector<std::pair<const Edge*, FactId>> neighbors_of(const MemoryGraph& graph,
                                                         const FactId& id) {
    std::vector<std::pair<const Edge*, FactId>> out;
    for (const auto& edge : graph.edges) {
        if (edge.src == id) out.emplace_back(&edge, edge.dst);
        else if (edge.dst == id) out.emplace_back(&edge, edge.src);
    }
    return out;
}

}  // namespace

std::string StepTrace::to_json_string(int indent) const {
    ordered_json j;
    j["query"] = query_text;
    j["initial"] = scored_to_json(initial);
    j["counterfactual"] = counterfactual;
    j["refined_seeds"] = scored_to_json(refined_seeds);
    ordered_json exps = ordered_json::array();
    for (const auto& e : expansions) {
        exps.push_back({{"from", e.from},
                        {"to", e.to},
                        {"edge_kind", e.edge_kind},
                        {"edge_score", e.edge_score},
                        {"hop", e.hop}});
    }
    j["expansions"] = exps;
    j["calls"] = {{"embed_query", span_to_json(embed_query_calls)},
                  {"reasoning", span_to_json(reasoning_calls)},
                  {"refine", span_to_json(refine_calls)},
                  {"answer", span_to_json(answer_calls)}};
    return indent < 0 ? j.dump() : j.dump(indent);
}

std::vector<ScoredFact> rank_by_similarity(const Embedding& embedding,
                                           const MemoryGraph& graph, std::size_t k) {
    std::vector<ScoredFact> scored;
    if (k == 0) return scored;
    scored.reserve(graph.facts.size());
    for (const auto& [id, fact] : graph.facts) {
        auto emb = graph.embeddings.find(id);
        if (emb == graph.embeddings.end()) throw IntegrityError("no embedding for fact " + id);
        scored.push_back({id, cosine_sim(embedding, emb->second)});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredFact& a, const ScoredFact& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.fact_id < b.fact_id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::vector<Fact> initial_retrieve(const Query& query, const MemoryGraph& graph,
                                   std::size_t k) {
    std::vector<Fact> out;
    for (const auto& s : rank_by_similarity(query.embedding, graph, k)) {
        out.push_back(fact_or_throw(graph, s.fact_id));
    }
    return out;
}

std::string counterfactual(const Query& query, const std::vector<Fact>& initial,
                           ChatProvider& chat) {
    ChatRequest request;
    request.system_prompt = prompts::counterfactual_system();
    request.user_content = prompts::counterfactual_user(query.text, fact_pointers(initial));
    try {
        return chat.chat(request);
    } catch (const ProviderRefusal& e) {
        spdlog::warn("counterfactual reasoning refused, degrading to retrieval-only: {}",
                     e.what());
        return "";
    }
}

std::vector<Fact> refine_retrieve(const std::string& knowledge, const MemoryGraph& graph,
                                  std::size_t k, int hops, std::size_t budget,
                                  EmbeddingProvider& embedder,
                                  const std::vector<Fact>& exclude, StepTrace* trace) {
    std::vector<Fact> out;
    if (knowledge.empty() || budget == 0) return out;

    Embedding center = embedder.embed({knowledge}).at(0);

    std::set<FactId> taken;
    for (const auto& f : exclude) taken.insert(f.fact_id);

    // seeds: top-k over facts not already in context
    std::vector<ScoredFact> seeds;
    for (const auto& s : rank_by_similarity(center, graph, graph.facts.size())) {
        if (seeds.size() >= k) break;
        if (taken.count(s.fact_id)) continue;
        seeds.push_back(s);
    }

    std::vector<FactId> frontier;
    for (const auto& s : seeds) {
        if (out.size() >= budget) break;
        taken.insert(s.fact_id);
        out.push_back(fact_or_throw(graph, s.fact_id));
        frontier.push_back(s.fact_id);
        if (trace) trace->refined_seeds.push_back(s);
    }

    for (int hop = 1; hop <= hops && out.size() < budget && !frontier.empty(); ++hop) {
        // all edges leaving the frontier, best-scored first
        struct Step {
            const Edge* edge;
            FactId from, to;
        };
        std::vector<Step> options;
        for (const auto& id : frontier) {
            for (const auto& [edge, neighbor] : neighbors_of(graph, id)) {
                if (!taken.count(neighbor)) options.push_back({edge, id, neighbor});
            }
        }
        std::sort(options.begin(), options.end(), [](const Step& a, const Step& b) {
            if (a.edge->score != b.edge->score) return a.edge->score > b.edge->score;
            if (a.to != b.to) return a.to < b.to;
            return a.from < b.from;
        });

        std::vector<FactId> next_frontier;
        for (const auto& step : options) {
            if (out.size() >= budget) break;
            if (taken.count(step.to)) continue;  // a better edge claimed it this hop
            taken.insert(step.to);
            out.push_back(fact_or_throw(graph, step.to));
            next_frontier.push_back(step.to);
            if (trace) {
                trace->expansions.push_back({step.from, step.to,
                                             std::string(edge_kind_name(step.edge->kind)),
                                             step.edge->score, hop});
            }
        }
        frontier = std::move(next_frontier);
    }
    return out;
}

RetrievalContext assemble_context(std::vector<Fact> initial, std::string knowledge,
                                  std::vector<Fact> refined, std::size_t max_context_facts) {
    RetrievalContext ctx;
    ctx.initial = std::move(initial);
    ctx.counterfactual = std::move(knowledge);
    ctx.refined = std::move(refined);

    std::set<FactId> seen;
    for (const auto& f : ctx.initial) {
        if (!seen.insert(f.fact_id).second) continue;
        ctx.final_items.push_back({false, f.fact_id, f.session_id, f.text});
    }
    if (!ctx.counterfactual.empty()) {
        ctx.final_items.push_back({true, "", "", ctx.counterfactual});
    }
    for (const auto& f : ctx.refined) {
        if (ctx.final_items.size() >= max_context_facts) break;
        if (!seen.insert(f.fact_id).second) continue;
        ctx.final_items.push_back({false, f.fact_id, f.session_id, f.text});
    }
    return ctx;
}

std::string answer(const Query& query, const RetrievalContext& context, ChatProvider& chat) {
    std::vector<std::string> lines;
    lines.reserve(context.final_items.size());
    for (const auto& item : context.final_items) {
        if (item.is_knowledge) {
            lines.push_back("World knowledge: " + item.text);
        } else {
            lines.push_back("[" + item.session_id + "] " + item.text);
        }
    }
    ChatRequest request;
    request.system_prompt = prompts::answer_system();
    request.user_content = prompts::answer_user(query.text, lines);
    return chat.chat(request);
}

QueryResult query_pipeline(const std::string& query_text, const MemoryGraph& graph,
                           const EngineConfig& config, const ProviderSuite& providers) {
    if (query_text.empty()) throw Error("query text is empty");
    if (!providers.embedder || !providers.chat) throw Error("query pipeline needs providers");
    validate_config(config);

    QueryResult result;
    result.trace.query_text = query_text;
    auto mark = [&] { return providers.log ? providers.log->next_id() : 0; };

    auto m0 = mark();
    Query query;
    query.text = query_text;
    query.embedding = providers.embedder->embed({query_text}).at(0);
    result.trace.embed_query_calls = {m0, mark()};

    auto initial_scored = rank_by_similarity(query.embedding, graph, config.k_initial);
    result.trace.initial = initial_scored;
    std::vector<Fact> initial;
    for (const auto& s : initial_scored) initial.push_back(fact_or_throw(graph, s.fact_id));

    auto m1 = mark();
    std::string knowledge;
    if (config.enable_reasoning) {
        knowledge = counterfactual(query, initial, *providers.chat);
    }
    result.trace.counterfactual = knowledge;
    result.trace.reasoning_calls = {m1, mark()};

    auto m2 = mark();
    std::vector<Fact> refined;
    if (!knowledge.empty()) {
        std::size_t used = initial.size() + 1;  // the knowledge item occupies a slot
        std::size_t cap = static_cast<std::size_t>(config.max_context_facts);
        std::size_t budget = cap > used ? cap - used : 0;
        refined = refine_retrieve(knowledge, graph, config.k_counterfactual,
                                  config.graph_expansion_hops, budget, *providers.embedder,
                                  initial, &result.trace);
    }
    result.trace.refine_calls = {m2, mark()};

    result.context = assemble_context(std::move(initial), std::move(knowledge),
                                      std::move(refined), config.max_context_facts);

    auto m3 = mark();
    result.answer = answer(query, result.context, *providers.chat);
    result.trace.answer_calls = {m3, mark()};
    return result;
}

}  // namespace actmem
