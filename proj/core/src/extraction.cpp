#include "actmem/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "actmem/errors.hpp"
#include "actmem/parallel.hpp"
#include "actmem/prompts.hpp"
#include "actmem/text.hpp"

namespace actmem {

std::vector<Fact> parse_fact_lines(const std::string& reply, const DialogueTurn& turn) {
    std::vector<Fact> facts;
    for (std::string_view raw : split_lines(reply)) {
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        facts.push_back(make_fact(std::string(line), turn.session_id, turn.turn_index,
                                  static_cast<std::uint32_t>(facts.size())));
    }
    if (facts.empty() && !reply.empty()) {
        spdlog::warn("extraction: reply for session {} turn {} had no usable line",
                     turn.session_id, turn.turn_index);
    }
    return facts;
}

std::vector<Fact> extract_facts(const DialogueTurn& turn, ChatProvider& chat) {
    if (turn.user_text.empty()) throw Error("extract_facts: empty user_text");
    ChatRequest request;
    request.system_prompt = prompts::extraction_system();
    request.user_content = prompts::extraction_user(turn);
    return parse_fact_lines(chat.chat(request), turn);
}

std::vector<Fact> extract_corpus(const std::vector<DialogueTurn>& turns, ChatProvider& chat,
                                 int max_parallel) {
    validate_turns(turns);
    if (turns.empty()) return {};

    std::vector<std::vector<Fact>> per_turn(turns.size());
    std::vector<std::string> failures(turns.size());
    parallel_for(turns.size(), max_parallel, [&](std::size_t i) {
        try {
            per_turn[i] = extract_facts(turns[i], chat);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    std::size_t failed = 0;
    std::vector<Fact> facts;
    std::set<std::pair<std::string, std::string>> seen;  // (session_id, text)
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (!failures[i].empty()) {
            ++failed;
            spdlog::warn("extraction: skipping session {} turn {}: {}",
                         turns[i].session_id, turns[i].turn_index, failures[i]);
            continue;
        }
        for (auto& fact : per_turn[i]) {
            if (!seen.emplace(fact.session_id, fact.text).second) continue;
            facts.push_back(std::move(fact));
        }
    }
    if (failed == turns.size()) {
        throw Error("extraction failed for all " + std::to_string(failed) + " turns, first: " +
                    failures[0]);
    }
    return facts;
}

std::vector<DialogueTurn> load_dialogue_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dialogue file: " + path);

    std::vector<DialogueTurn> turns;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SerializationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        DialogueTurn turn;
        if (!j.contains("session_id") || !j.contains("turn_index") || !j.contains("user")) {
            throw SerializationError(path + ":" + std::to_string(line_no) +
                                     ": turn needs session_id, turn_index, user");
        }
        try {
            turn.session_id = j.at("session_id").get<std::string>();
            turn.turn_index = j.at("turn_index").get<std::uint32_t>();
            turn.user_text = j.at("user").get<std::string>();
            turn.assistant_text = j.value("assistant", std::string());
        } catch (const nlohmann::json::exception& e) {
            throw SerializationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        turns.push_back(std::move(turn));
    }

    std::stable_sort(turns.begin(), turns.end(),
                     [](const DialogueTurn& a, const DialogueTurn& b) {
                         if (a.session_id != b.session_id) return a.session_id < b.session_id;
                         return a.turn_index < b.turn_index;
                     });
    validate_turns(turns);
    return turns;
}

}  // namespace actmem
