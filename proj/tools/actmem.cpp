#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "actmem/engine.hpp"
#include "actmem/eval.hpp"
#include "actmem/extraction.hpp"
#include "actmem/persistence.hpp"
#include "actmem/providers/cassette.hpp"
#include "actmem/providers/http.hpp"
#include "actmem/providers/mock.hpp"
#include "actmem/retrieval.hpp"

namespace {

using actmem::Error;
using ordered_json = nlohmann::ordered_json;

struct GlobalOptions {
    std::string config_path;
    std::string provider = "mock";
    std::string cassette;      // replay source / --record target
    std::string record_path;
    std::string mock_script;
    std::uint64_t seed = 0;
    bool verbose = false;
};

actmem::AppConfig load_config(const GlobalOptions& global) {
    actmem::AppConfig config;
    if (!global.config_path.empty()) config = actmem::load_app_config(global.config_path);
    actmem::apply_env_overrides(config.providers);
    return config;
}

actmem::ProviderSuite make_suite(const GlobalOptions& global, const actmem::AppConfig& config) {
    actmem::ProviderSuite suite;
    if (global.provider == "mock") {
        suite = actmem::make_mock_suite(config.providers, global.seed);
        if (!global.mock_script.empty()) {
            auto chat = std::dynamic_pointer_cast<actmem::MockChatProvider>(suite.chat);
            for (auto& rule : actmem::load_mock_script(global.mock_script)) {
                chat->add_rule(std::move(rule));
            }
        }
    } else if (global.provider == "http") {
        suite = actmem::providers::make_http_suite(config.providers);
    } else if (global.provider == "replay") {
        if (global.cassette.empty()) {
            throw Error("--provider replay requires --cassette <file>");
        }
        suite = actmem::providers::make_replay_suite(global.cassette);
    } else {
        throw Error("unknown provider '" + global.provider + "' (mock|http|replay)");
    }
    if (!global.record_path.empty()) {
        suite = actmem::providers::wrap_recording(suite, global.record_path);
    }
    return suite;
}

int exit_code_for(const Error& error) {
    if (dynamic_cast<const actmem::TransportError*>(&error) ||
        dynamic_cast<const actmem::ProviderRefusal*>(&error)) {
        return 1;
    }
    if (dynamic_cast<const actmem::CorruptFile*>(&error) ||
        dynamic_cast<const actmem::VersionMismatch*>(&error) ||
        dynamic_cast<const actmem::IntegrityError*>(&error) ||
        dynamic_cast<const actmem::SerializationError*>(&error)) {
        return 3;
    }
    return 2;
}

std::string category_for(const Error& error) {
    if (dynamic_cast<const actmem::TransportError*>(&error)) return "transport";
    if (dynamic_cast<const actmem::ProviderRefusal*>(&error)) return "refusal";
    if (dynamic_cast<const actmem::CorruptFile*>(&error)) return "corrupt-file";
    if (dynamic_cast<const actmem::VersionMismatch*>(&error)) return "version-mismatch";
    if (dynamic_cast<const actmem::IntegrityError*>(&error)) return "integrity";
    if (dynamic_cast<const actmem::SerializationError*>(&error)) return "serialization";
    if (dynamic_cast<const actmem::ConfigError*>(&error)) return "config";
    if (dynamic_cast<const actmem::IoError*>(&error)) return "io";
    if (dynamic_cast<const actmem::UnresolvableEvidence*>(&error)) return "evidence";
    return "error";
}

ordered_json context_to_json(const actmem::RetrievalContext& context) {
    ordered_json items = ordered_json::array();
    for (const actmem::ContextItem& item : context.final_items) {
        items.push_back(ordered_json{{"kind", item.is_knowledge ? "knowledge" : "fact"},
                                     {"fact_id", item.fact_id},
                                     {"session_id", item.session_id},
                                     {"text", item.text}});
    }
    return items;
}

int cmd_ingest(const GlobalOptions& global, const std::string& dialogue_path,
               const std::string& store) {
    actmem::AppConfig config = load_config(global);
    actmem::ProviderSuite suite = make_suite(global, config);
    std::vector<actmem::DialogueTurn> turns = actmem::load_dialogue_jsonl(dialogue_path);
    actmem::IngestResult result = actmem::ingest_dialogue(turns, config.engine, suite);
    actmem::MemoryGraph graph = actmem::to_edgeless_graph(result);
    actmem::save_graph(graph, store);
    std::cout << "ingested " << turns.size() << " turns -> " << result.facts.size()
              << " facts in " << result.clustering.clusters.size() << " clusters at " << store
              << "\n";
    return 0;
}

int cmd_build(const GlobalOptions& global, const std::string& store) {
    actmem::AppConfig config = load_config(global);
    actmem::ProviderSuite suite = make_suite(global, config);
    actmem::MemoryGraph graph = actmem::load_graph(store);
    actmem::MemoryGraph built = actmem::rebuild_graph(graph, config.engine, suite);
    actmem::save_graph(built, store);
    std::size_t causal = 0;
    for (const actmem::Edge& edge : built.edges) {
        if (edge.kind == actmem::EdgeKind::Causal) ++causal;
    }
    std::cout << "built graph: " << built.facts.size() << " facts, " << causal << " causal + "
              << built.edges.size() - causal << " semantic edges at " << store << "\n";
    return 0;
}

int cmd_query(const GlobalOptions& global, const std::string& store,
              const std::string& question, bool with_trace) {
    actmem::AppConfig config = load_config(global);
    actmem::ProviderSuite suite = make_suite(global, config);
    actmem::MemoryGraph graph = actmem::load_graph(store);
    if (graph.empty()) throw Error("empty graph");
    actmem::QueryResult result = actmem::query_pipeline(question, graph, config.engine, suite);
    if (with_trace) {
        ordered_json doc;
        doc["answer"] = result.answer;
        doc["context"] = context_to_json(result.context);
        doc["trace"] = ordered_json::parse(result.trace.to_json_string());
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << result.answer << "\n";
    }
    return 0;
}

int cmd_eval(const GlobalOptions& global, const std::string& store,
             const std::string& samples_path, const std::vector<std::string>& ablations,
             bool sweep, const std::string& out_dir) {
    actmem::AppConfig config = load_config(global);
    actmem::ProviderSuite suite = make_suite(global, config);
    std::vector<actmem::EvalSample> samples = actmem::load_samples_jsonl(samples_path);
    actmem::MemoryGraph shared = actmem::load_graph(store);

    std::vector<actmem::EvalReport> reports;
    if (sweep) {
        reports = actmem::run_ablation_sweep(samples, config.engine, suite, &shared);
    } else {
        std::string label = "full";
        actmem::EngineConfig engine = config.engine;
        for (const std::string& flag : ablations) {
            if (flag == "reasoning") {
                engine.enable_reasoning = false;
            } else if (flag == "causal") {
                engine.enable_causal_edges = false;
            } else if (flag == "semantic") {
                engine.enable_semantic_edges = false;
            } else {
                throw Error("unknown ablation '" + flag + "' (reasoning|causal|semantic)");
            }
            label = label == "full" ? "no_" + flag : label + "+no_" + flag;
        }
        reports.push_back(actmem::run_eval(samples, engine, suite, &shared, label));
    }

    std::filesystem::create_directories(out_dir);
    ordered_json runs = ordered_json::array();
    for (const actmem::EvalReport& report : reports) {
        runs.push_back(ordered_json::parse(report.to_json_string()));
    }
    std::string markdown = actmem::reports_to_markdown(reports);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "report.json",
                          std::ios::binary | std::ios::trunc);
        if (!out) throw actmem::IoError("cannot write report.json in " + out_dir);
        out << runs.dump(2) << "\n";
    }
    {
        std::ofstream out(std::filesystem::path(out_dir) / "report.md",
                          std::ios::binary | std::ios::trunc);
        if (!out) throw actmem::IoError("cannot write report.md in " + out_dir);
        out << markdown;
    }
    std::cout << markdown;

    bool all_failed = true;
    for (const actmem::EvalReport& report : reports) {
        all_failed = all_failed && report.total > 0 && report.failed == report.total;
    }
    if (all_failed && !reports.empty() && !reports.front().samples.empty()) {
        throw Error("every sample failed; first error: " +
                    reports.front().samples.front().error);
    }
    return 0;
}

int cmd_inspect(const GlobalOptions& global, const std::string& store,
                const std::string& fact_id, bool degree_histogram) {
    (void)global;
    actmem::MemoryGraph graph = actmem::load_graph(store);

    if (!fact_id.empty()) {
        auto it = graph.facts.find(fact_id);
        if (it == graph.facts.end()) throw Error("no such fact: " + fact_id);
        ordered_json doc;
        doc["fact"] = ordered_json{{"fact_id", it->second.fact_id},
                                   {"text", it->second.text},
                                   {"session_id", it->second.session_id},
                                   {"turn_index", it->second.turn_index},
                                   {"extraction_rank", it->second.extraction_rank}};
        for (const actmem::Cluster& cluster : graph.clusters) {
            for (const actmem::FactId& member : cluster.member_ids) {
                if (member == fact_id) doc["cluster_id"] = cluster.cluster_id;
            }
        }
        doc["edges"] = ordered_json::array();
        for (const actmem::Edge& edge : graph.edges) {
            if (edge.src != fact_id && edge.dst != fact_id) continue;
            doc["edges"].push_back(ordered_json{{"kind", actmem::edge_kind_name(edge.kind)},
                                                {"src", edge.src},
                                                {"dst", edge.dst},
                                                {"score", edge.score}});
        }
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    if (degree_histogram) {
        std::map<actmem::FactId, std::size_t> degree;
        for (const auto& [id, fact] : graph.facts) degree[id] = 0;
        for (const actmem::Edge& edge : graph.edges) {
            ++degree[edge.src];
            ++degree[edge.dst];
        }
        std::map<std::size_t, std::size_t> histogram;
        std::size_t total = 0;
        for (const auto& [id, d] : degree) {
            ++histogram[d];
            total += d;
        }
        ordered_json doc;
        doc["facts"] = graph.facts.size();
        doc["edges"] = graph.edges.size();
        doc["mean_degree"] =
            graph.facts.empty() ? 0.0
                                : static_cast<double>(total) /
                                      static_cast<double>(graph.facts.size());
        doc["histogram"] = ordered_json::object();
        for (const auto& [d, n] : histogram) doc["histogram"][std::to_string(d)] = n;
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    std::size_t causal = 0;
    for (const actmem::Edge& edge : graph.edges) {
        if (edge.kind == actmem::EdgeKind::Causal) ++causal;
    }
    ordered_json doc;
    doc["facts"] = graph.facts.size();
    doc["clusters"] = graph.clusters.size();
    doc["edges"] = ordered_json{{"causal", causal}, {"semantic", graph.edges.size() - causal}};
    doc["embedding_dim"] =
        graph.embeddings.empty() ? 0 : graph.embeddings.begin()->second.dim();
    std::cout << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("actmem");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"actionable memory engine"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file");
    app.add_option("--provider", global.provider, "mock|http|replay")->default_str("mock");
    app.add_option("--cassette", global.cassette, "cassette file for --provider replay");
    app.add_option("--record", global.record_path, "append live calls to this cassette");
    app.add_option("--mock-script", global.mock_script, "scripted replies for the mock chat");
    app.add_option("--seed", global.seed, "mock provider seed");
    app.add_flag("--verbose", global.verbose, "log at debug level");

    std::string dialogue_path, store, question, fact_id, samples_path, out_dir = ".";
    std::vector<std::string> ablations;
    bool with_trace = false, degree_histogram = false, sweep = false;

    CLI::App* ingest = app.add_subcommand("ingest", "extract, embed and cluster a dialogue");
    ingest->add_option("dialogue", dialogue_path, "dialogue JSONL file")->required();
    ingest->add_option("-o,--output", store, "store directory")->required();

    CLI::App* build = app.add_subcommand("build", "mine and score edges for an ingested store");
    build->add_option("store", store, "store directory")->required();

    CLI::App* query = app.add_subcommand("query", "answer a question from a store");
    query->add_option("store", store, "store directory")->required();
    query->add_option("question", question, "the question")->required();
    query->add_flag("--trace", with_trace, "print answer, context and a full trace as JSON");

    CLI::App* eval = app.add_subcommand("eval", "run the evaluation harness");
    eval->add_option("store", store, "store directory (shared by dialogue-less samples)")
        ->required();
    eval->add_option("samples", samples_path, "samples JSONL file")->required();
    eval->add_option("--ablate", ablations, "disable a subsystem: reasoning|causal|semantic");
    eval->add_flag("--sweep", sweep, "run the full + three-ablation sweep");
    eval->add_option("-o,--output", out_dir, "directory for report.json and report.md");

    CLI::App* inspect = app.add_subcommand("inspect", "summarize a store");
    inspect->add_option("store", store, "store directory")->required();
    inspect->add_option("--fact", fact_id, "print one fact with its edges");
    inspect->add_flag("--degree-histogram", degree_histogram, "print the node degree histogram");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (global.verbose) spdlog::set_level(spdlog::level::debug);

    try {
        if (ingest->parsed()) return cmd_ingest(global, dialogue_path, store);
        if (build->parsed()) return cmd_build(global, store);
        if (query->parsed()) return cmd_query(global, store, question, with_trace);
        if (eval->parsed())
            return cmd_eval(global, store, samples_path, ablations, sweep, out_dir);
        if (inspect->parsed()) return cmd_inspect(global, store, fact_id, degree_histogram);
    } catch (const Error& e) {
        std::cerr << "actmem: " << category_for(e) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "actmem: internal: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
