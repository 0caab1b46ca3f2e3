#include "actmem/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "actmem/clustering.hpp"
#include "actmem/engine.hpp"
#include "actmem/graph_builder.hpp"
#include "actmem/prompts.hpp"
#include "actmem/text.hpp"
#include "internal/json_codec.hpp"

namespace actmem {
namespace {

using ordered_json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string json_to_string_field(const ordered_json& value) {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

EvidenceLocator parse_evidence_entry(const ordered_json& entry, const std::string& where) {
    EvidenceLocator locator;
    if (entry.is_string()) {
        locator.text = entry.get<std::string>();
    } else if (entry.is_object()) {
        if (entry.contains("session_id")) {
            locator.session_id = json_to_string_field(entry.at("session_id"));
        }
        if (entry.contains("turn_index")) {
            if (!entry.at("turn_index").is_number_unsigned()) {
                throw SerializationError(where + ": evidence turn_index must be unsigned");
            }
            locator.turn_index = entry.at("turn_index").get<std::uint32_t>();
        }
        if (entry.contains("text")) locator.text = json_to_string_field(entry.at("text"));
    } else {
        throw SerializationError(where + ": evidence entry must be a string or object");
    }
    if (!locator.positional() && trim(locator.text).empty()) {
        throw SerializationError(where + ": evidence entry has neither position nor text");
    }
    if (locator.turn_index && !locator.session_id) {
        throw SerializationError(where + ": evidence turn_index without session_id");
    }
    return locator;
}

DialogueTurn parse_dialogue_entry(const ordered_json& entry, const std::string& where) {
    if (!entry.is_object()) throw SerializationError(where + ": dialogue entry not an object");
    DialogueTurn turn;
    if (!entry.contains("session_id") || !entry.contains("turn_index") ||
        !entry.contains("user")) {
        throw SerializationError(where + ": dialogue entry needs session_id, turn_index, user");
    }
    turn.session_id = json_to_string_field(entry.at("session_id"));
    if (!entry.at("turn_index").is_number_unsigned()) {
        throw SerializationError(where + ": turn_index must be unsigned");
    }
    turn.turn_index = entry.at("turn_index").get<std::uint32_t>();
    turn.user_text = json_to_string_field(entry.at("user"));
    if (entry.contains("assistant")) turn.assistant_text = json_to_string_field(entry.at("assistant"));
    return turn;
}

EvalSample parse_native_sample(const ordered_json& record, const std::string& where,
                               std::size_t index) {
    EvalSample sample;
    if (record.contains("id")) {
        sample.sample_id = json_to_string_field(record.at("id"));
    } else if (record.contains("sample_id")) {
        sample.sample_id = json_to_string_field(record.at("sample_id"));
    } else {
        sample.sample_id = "sample_" + std::to_string(index + 1);
    }
    if (!record.contains("question") || !record.contains("answer")) {
        throw SerializationError(where + ": sample needs question and answer");
    }
    sample.question = json_to_string_field(record.at("question"));
    sample.gold_answer = json_to_string_field(record.at("answer"));
    if (record.contains("evidence")) {
        for (const auto& entry : record.at("evidence")) {
            sample.gold_evidence.push_back(parse_evidence_entry(entry, where));
        }
    }
    if (record.contains("dialogue")) {
        for (const auto& entry : record.at("dialogue")) {
            sample.dialogue.push_back(parse_dialogue_entry(entry, where));
        }
    }
    return sample;
}

EvalSample parse_benchmark_sample(const ordered_json& record, const std::string& where,
                                  std::size_t index) {
    EvalSample sample;
    sample.sample_id = record.contains("question_id")
                           ? json_to_string_field(record.at("question_id"))
                           : "sample_" + std::to_string(index + 1);
    if (!record.contains("question") || !record.contains("answer")) {
        throw SerializationError(where + ": sample needs question and answer");
    }
    sample.question = json_to_string_field(record.at("question"));
    sample.gold_answer = json_to_string_field(record.at("answer"));

    const auto& sessions = record.at("haystack_sessions");
    if (!sessions.is_array()) throw SerializationError(where + ": haystack_sessions not an array");
    std::vector<std::string> session_ids;
    if (record.contains("haystack_session_ids")) {
        for (const auto& id : record.at("haystack_session_ids"))
            session_ids.push_back(json_to_string_field(id));
    }
    std::set<std::pair<std::string, std::uint32_t>> evidence_positions;
    for (std::size_t s = 0; s < sessions.size(); ++s) {
        std::string session_id =
            s < session_ids.size() ? session_ids[s] : "session_" + std::to_string(s + 1);
        std::uint32_t next_index = 0;
        bool open_turn = false;
        for (const auto& message : sessions[s]) {
            std::string role = message.value("role", "");
            std::string content = json_to_string_field(message.value("content", ordered_json("")));
            bool has_answer = message.value("has_answer", false);
            if (role == "user") {
                sample.dialogue.push_back(DialogueTurn{session_id, next_index, content, ""});
                open_turn = true;
                ++next_index;
            } else if (role == "assistant") {
                if (!open_turn) {
                    spdlog::warn("{}: assistant message before any user turn dropped", where);
                    continue;
                }
                sample.dialogue.back().assistant_text = content;
                open_turn = false;
            } else {
                spdlog::warn("{}: unknown role '{}' dropped", where, role);
                continue;
            }
            if (has_answer && !sample.dialogue.empty()) {
                evidence_positions.emplace(session_id, sample.dialogue.back().turn_index);
            }
        }
    }
    for (const auto& [session_id, turn_index] : evidence_positions) {
        EvidenceLocator locator;
        locator.session_id = session_id;
        locator.turn_index = turn_index;
        sample.gold_evidence.push_back(locator);
    }
    if (sample.gold_evidence.empty() && record.contains("answer_session_ids")) {
        for (const auto& id : record.at("answer_session_ids")) {
            EvidenceLocator locator;
            locator.session_id = json_to_string_field(id);
            sample.gold_evidence.push_back(locator);
        }
    }
    return sample;
}

void validate_sample(EvalSample& sample, const std::string& where) {
    if (trim(sample.question).empty()) throw SerializationError(where + ": empty question");
    if (trim(sample.gold_answer).empty()) throw SerializationError(where + ": empty answer");
    if (!sample.dialogue.empty()) {
        std::stable_sort(sample.dialogue.begin(), sample.dialogue.end(),
                         [](const DialogueTurn& a, const DialogueTurn& b) {
                             return std::tie(a.session_id, a.turn_index) <
                                    std::tie(b.session_id, b.turn_index);
                         });
        validate_turns(sample.dialogue);
        for (const EvidenceLocator& locator : sample.gold_evidence) {
            if (!locator.positional()) continue;
            bool found = std::any_of(
                sample.dialogue.begin(), sample.dialogue.end(), [&](const DialogueTurn& t) {
                    return t.session_id == *locator.session_id &&
                           (!locator.turn_index || t.turn_index == *locator.turn_index);
                });
            if (!found) {
                throw UnresolvableEvidence(where + ": evidence points at session '" +
                                           *locator.session_id + "' turn " +
                                           (locator.turn_index
                                                ? std::to_string(*locator.turn_index)
                                                : std::string("*")) +
                                           " which is not in the dialogue");
            }
        }
    }
}

EvalSample parse_sample(const ordered_json& record, const std::string& where,
                        std::size_t index) {
    if (!record.is_object()) throw SerializationError(where + ": sample record not an object");
    EvalSample sample = record.contains("haystack_sessions")
                            ? parse_benchmark_sample(record, where, index)
                            : parse_native_sample(record, where, index);
    validate_sample(sample, where);
    return sample;
}

ordered_json usage_to_json(const TokenUsage& usage) {
    return ordered_json{{"prompt_tokens", usage.prompt_tokens},
                        {"completion_tokens", usage.completion_tokens},
                        {"exact", usage.exact}};
}

ordered_json seconds_to_json(const StageSeconds& seconds) {
    return ordered_json{{"ingest", seconds.ingest},
                        {"build", seconds.build},
                        {"query", seconds.query},
                        {"judge", seconds.judge}};
}

}  // namespace

std::vector<EvalSample> load_samples_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<EvalSample> samples;
    std::string_view body = trim(bytes);
    if (!body.empty() && body.front() == '[') {
        ordered_json records;
        try {
            records = ordered_json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw SerializationError(path + ": " + e.what());
        }
        for (std::size_t i = 0; i < records.size(); ++i) {
            samples.push_back(
                parse_sample(records[i], path + "[" + std::to_string(i) + "]", i));
        }
        return samples;
    }

    std::size_t line_no = 0;
    for (std::string_view line : split_lines(bytes)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SerializationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        samples.push_back(parse_sample(record, path + ":" + std::to_string(line_no),
                                       samples.size()));
    }
    return samples;
}

double retrieval_accuracy(const RetrievalContext& context,
                          const std::vector<EvidenceLocator>& gold,
                          const std::vector<DialogueTurn>& dialogue,
                          EmbeddingProvider& embedder, double match_threshold) {
    if (gold.empty()) throw Error("retrieval_accuracy requires nonempty evidence");
    for (const EvidenceLocator& locator : gold) {
        if (!locator.positional() && trim(locator.text).empty()) {
            throw UnresolvableEvidence("evidence entry has neither position nor text");
        }
        if (locator.positional() && !dialogue.empty()) {
            bool found = std::any_of(dialogue.begin(), dialogue.end(), [&](const DialogueTurn& t) {
                return t.session_id == *locator.session_id &&
                       (!locator.turn_index || t.turn_index == *locator.turn_index);
            });
            if (!found) {
                throw UnresolvableEvidence("evidence points at session '" + *locator.session_id +
                                           "' which is not in the dialogue");
            }
        }
    }

    std::map<FactId, const Fact*> by_id;
    for (const Fact& fact : context.initial) by_id.emplace(fact.fact_id, &fact);
    for (const Fact& fact : context.refined) by_id.emplace(fact.fact_id, &fact);
    std::vector<const Fact*> facts;
    for (const ContextItem& item : context.final_items) {
        if (item.is_knowledge) continue;
        auto it = by_id.find(item.fact_id);
        if (it == by_id.end()) {
            spdlog::warn("context item '{}' has no backing fact; skipped", item.fact_id);
            continue;
        }
        facts.push_back(it->second);
    }
    if (facts.empty()) return 0.0;

    std::vector<std::size_t> text_locators;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!gold[i].positional()) text_locators.push_back(i);
    }
    std::vector<Embedding> fact_vecs;
    std::vector<Embedding> locator_vecs;
    if (!text_locators.empty()) {
        std::vector<std::string> texts;
        texts.reserve(facts.size() + text_locators.size());
        for (const Fact* fact : facts) texts.push_back(fact->text);
        for (std::size_t i : text_locators) texts.push_back(gold[i].text);
        std::vector<Embedding> vecs = embed_in_batches(texts, embedder);
        fact_vecs.assign(vecs.begin(), vecs.begin() + static_cast<std::ptrdiff_t>(facts.size()));
        locator_vecs.assign(vecs.begin() + static_cast<std::ptrdiff_t>(facts.size()), vecs.end());
    }

    std::size_t covered = 0;
    std::size_t text_at = 0;
    for (const EvidenceLocator& locator : gold) {
        bool hit = false;
        if (locator.positional()) {
            hit = std::any_of(facts.begin(), facts.end(), [&](const Fact* fact) {
                return fact->session_id == *locator.session_id &&
                       (!locator.turn_index || fact->turn_index == *locator.turn_index);
            });
        } else {
            const Embedding& needle = locator_vecs[text_at++];
            for (std::size_t i = 0; i < facts.size() && !hit; ++i) {
                hit = cosine_sim(fact_vecs[i], needle) >= match_threshold;
            }
        }
        if (hit) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(gold.size());
}

JudgeVerdict qa_accuracy(const std::string& answer, const std::string& gold_answer,
                         const std::string& question, ChatProvider& judge) {
    ChatRequest request{prompts::judge_system(),
                        prompts::judge_user(question, gold_answer, answer), 0.0};
    std::string reply;
    try {
        reply = judge.chat(request);
    } catch (const ProviderRefusal& e) {
        spdlog::warn("judge refused: {}", e.what());
        return {};
    }

    std::string_view line = trim(reply);
    if (auto nl = line.find('\n'); nl != std::string_view::npos) line = trim(line.substr(0, nl));
    std::istringstream words{std::string(line)};
    std::string verdict_word, score_word;
    words >> verdict_word >> score_word;

    JudgeVerdict verdict;
    if (verdict_word == "CORRECT") {
        verdict.correct = true;
    } else if (verdict_word != "INCORRECT") {
        spdlog::warn("judge reply violates contract: '{}'", std::string(line));
        return {};
    }
    int score = -1;
    auto [ptr, ec] = std::from_chars(score_word.data(), score_word.data() + score_word.size(),
                                     score);
    if (ec != std::errc{} || ptr != score_word.data() + score_word.size() || score < 0 ||
        score > 100) {
        spdlog::warn("judge reply violates contract: '{}'", std::string(line));
        return {};
    }
    verdict.judged = true;
    verdict.score = score / 100.0;
    return verdict;
}

EvalReport run_eval(const std::vector<EvalSample>& samples, const EngineConfig& config,
                    const ProviderSuite& providers, const MemoryGraph* shared_graph,
                    const std::string& label) {
    validate_config(config);
    if (!providers.chat || !providers.embedder) {
        throw Error("evaluation requires chat and embedding providers");
    }

    EvalReport report;
    report.label = label;
    report.config = config;

    MemoryGraph shared_copy;
    const MemoryGraph* shared = nullptr;
    if (shared_graph) {
        shared_copy = *shared_graph;
        if (!config.enable_causal_edges || !config.enable_semantic_edges) {
            std::erase_if(shared_copy.edges, [&](const Edge& edge) {
                return (edge.kind == EdgeKind::Causal && !config.enable_causal_edges) ||
                       (edge.kind == EdgeKind::Semantic && !config.enable_semantic_edges);
            });
        }
        shared = &shared_copy;
    }

    for (const EvalSample& sample : samples) {
        SampleResult row;
        row.sample_id = sample.sample_id;
        row.question = sample.question;
        std::uint64_t begin = providers.log ? providers.log->next_id() : 0;
        try {
            MemoryGraph own;
            const MemoryGraph* graph = nullptr;
            if (!sample.dialogue.empty()) {
                auto t0 = std::chrono::steady_clock::now();
                IngestResult ingest = ingest_dialogue(sample.dialogue, config, providers);
                row.seconds.ingest = seconds_since(t0);
                auto t1 = std::chrono::steady_clock::now();
                own = build_graph(ingest.facts, ingest.embeddings, ingest.clustering.clusters,
                                  config, providers);
                row.seconds.build = seconds_since(t1);
                graph = &own;
            } else if (shared) {
                graph = shared;
            } else {
                throw Error("sample '" + sample.sample_id +
                            "' has no dialogue and no shared store was given");
            }

            auto t2 = std::chrono::steady_clock::now();
            QueryResult result = query_pipeline(sample.question, *graph, config, providers);
            row.seconds.query = seconds_since(t2);
            row.answer = result.answer;

            if (!sample.gold_evidence.empty()) {
                row.retrieval_accuracy =
                    retrieval_accuracy(result.context, sample.gold_evidence, sample.dialogue,
                                       *providers.embedder);
                row.retrieval_evaluated = true;
            }

            auto t3 = std::chrono::steady_clock::now();
            row.verdict =
                qa_accuracy(row.answer, sample.gold_answer, sample.question, *providers.chat);
            row.seconds.judge = seconds_since(t3);
        } catch (const Error& e) {
            row.error = e.what();
            row.verdict = {};
            spdlog::warn("sample '{}' failed: {}", sample.sample_id, e.what());
        }
        if (providers.log) {
            std::uint64_t end = providers.log->next_id();
            row.chat_calls = providers.log->count(CallKind::Chat, begin, end);
            row.embed_calls = providers.log->count(CallKind::Embed, begin, end);
            row.nll_calls = providers.log->count(CallKind::Nll, begin, end);
            row.usage = providers.log->usage_in(begin, end);
        }
        if (providers.deterministic) row.seconds = {};
        report.samples.push_back(std::move(row));
    }

    report.total = report.samples.size();
    report.usage = TokenUsage{0, 0, true};
    double recall_sum = 0.0;
    std::size_t correct = 0;
    double score_sum = 0.0;
    for (const SampleResult& row : report.samples) {
        if (row.verdict.judged) {
            ++report.judged;
            if (row.verdict.correct) ++correct;
            score_sum += row.verdict.score;
        }
        if (!row.error.empty()) ++report.failed;
        if (row.retrieval_evaluated) {
            ++report.retrieval_evaluated;
            recall_sum += row.retrieval_accuracy;
        }
        report.seconds.ingest += row.seconds.ingest;
        report.seconds.build += row.seconds.build;
        report.seconds.query += row.seconds.query;
        report.seconds.judge += row.seconds.judge;
        report.usage += row.usage;
    }
    report.unjudged = report.total - report.judged;
    if (report.retrieval_evaluated > 0) {
        report.mean_retrieval_accuracy =
            recall_sum / static_cast<double>(report.retrieval_evaluated);
    }
    if (report.judged > 0) {
        report.qa_available = true;
        report.qa_accuracy = static_cast<double>(correct) / static_cast<double>(report.judged);
        report.mean_judge_score = score_sum / static_cast<double>(report.judged);
    }
    return report;
}

std::string EvalReport::to_json_string(int indent) const {
    ordered_json doc;
    doc["label"] = label;
    doc["config"] = config_to_json(config);
    doc["totals"] = ordered_json{{"samples", total},
                                 {"judged", judged},
                                 {"unjudged", unjudged},
                                 {"failed", failed},
                                 {"retrieval_evaluated", retrieval_evaluated}};
    doc["metrics"] = ordered_json{
        {"retrieval_accuracy",
         retrieval_evaluated > 0 ? ordered_json(mean_retrieval_accuracy) : ordered_json(nullptr)},
        {"qa_accuracy", qa_available ? ordered_json(qa_accuracy) : ordered_json(nullptr)},
        {"mean_judge_score",
         qa_available ? ordered_json(mean_judge_score) : ordered_json(nullptr)}};
    doc["seconds"] = seconds_to_json(seconds);
    doc["usage"] = usage_to_json(usage);
    doc["samples"] = ordered_json::array();
    for (const SampleResult& row : samples) {
        ordered_json item;
        item["id"] = row.sample_id;
        item["question"] = row.question;
        item["answer"] = row.answer;
        item["retrieval_accuracy"] = row.retrieval_evaluated
                                         ? ordered_json(row.retrieval_accuracy)
                                         : ordered_json(nullptr);
        item["judged"] = row.verdict.judged;
        item["correct"] = row.verdict.correct;
        item["judge_score"] = row.verdict.score;
        item["error"] = row.error;
        item["seconds"] = seconds_to_json(row.seconds);
        item["calls"] = ordered_json{
            {"chat", row.chat_calls}, {"embed", row.embed_calls}, {"nll", row.nll_calls}};
        item["usage"] = usage_to_json(row.usage);
        doc["samples"].push_back(std::move(item));
    }
    return indent < 0 ? doc.dump() : doc.dump(indent);
}

std::string reports_to_markdown(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "| run | samples | retrieval acc | qa acc | judged | unjudged | failed "
           "| prompt tokens | completion tokens | exact usage |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    auto cell = [](bool available, double value) {
        if (!available) return std::string("n/a");
        std::ostringstream s;
        s.precision(4);
        s << std::fixed << value;
        return s.str();
    };
    for (const EvalReport& report : reports) {
        out << "| " << report.label << " | " << report.total << " | "
            << cell(report.retrieval_evaluated > 0, report.mean_retrieval_accuracy) << " | "
            << cell(report.qa_available, report.qa_accuracy) << " | " << report.judged << " | "
            << report.unjudged << " | " << report.failed << " | "
            << report.usage.prompt_tokens << " | " << report.usage.completion_tokens << " | "
            << (report.usage.exact ? "yes" : "no") << " |\n";
    }
    return out.str();
}

std::vector<EvalReport> run_ablation_sweep(const std::vector<EvalSample>& samples,
                                           const EngineConfig& config,
                                           const ProviderSuite& providers,
                                           const MemoryGraph* shared_graph) {
    std::vector<EvalReport> reports;
    reports.push_back(run_eval(samples, config, providers, shared_graph, "full"));

    EngineConfig no_reasoning = config;
    no_reasoning.enable_reasoning = false;
    reports.push_back(run_eval(samples, no_reasoning, providers, shared_graph, "no_reasoning"));

    EngineConfig no_causal = config;
    no_causal.enable_causal_edges = false;
    reports.push_back(run_eval(samples, no_causal, providers, shared_graph, "no_causal"));

    EngineConfig no_semantic = config;
    no_semantic.enable_semantic_edges = false;
    reports.push_back(run_eval(samples, no_semantic, providers, shared_graph, "no_semantic"));
    return reports;
}

}  // namespace actmem
