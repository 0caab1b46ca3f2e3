#include "actmem/prompts.hpp"

#include <sstream>

namespace actmem::prompts {

std::string extraction_system() {
    return "You distill dialogue into atomic memory facts. Read one exchange between a "
           "user and an assistant. Output every distinct, self-contained declarative "
           "statement worth remembering about the user, their situation, or stated "
           "events. One fact per line, no numbering, no commentary. Each fact must be a "
           "single sentence that stands on its own without the dialogue. If nothing is "
           "worth remembering, output nothing.";
}

std::string extraction_user(const DialogueTurn& turn) {
    std::ostringstream out;
    out << "Session: " << turn.session_id << "\n";
    out << "Turn: " << turn.turn_index << "\n";
    out << "User: " << turn.user_text << "\n";
    out << "Assistant: " << turn.assistant_text << "\n";
    out << "Facts:";
    return out.str();
}

std::string causal_system() {
    return "You identify cause-effect relations between memory facts. Given a numbered "
           "list of facts, output one line per directed causal relation in the exact "
           "form \"i -> j\" meaning fact i plausibly causes or enables fact j. Use only "
           "the given numbers. Output NONE if there is no causal relation.";
}

std::string causal_user(const std::vector<const Fact*>& facts) {
    std::ostringstream out;
    out << "Facts:\n";
    for (std::size_t i = 0; i < facts.size(); ++i) {
        out << (i + 1) << ". " << facts[i]->text << "\n";
    }
    out << "Causal relations:";
    return out.str();
}

std::string counterfactual_system() {
    return "You anticipate risks. Answer with one short paragraph of concrete "
           "consequence knowledge, stated as general world knowledge, without "
           "addressing the user directly.";
}

std::string counterfactual_user(const std::string& query_text,
                                const std::vector<const Fact*>& initial) {
    std::ostringstream out;
    out << "If the user does " << query_text
        << ", what negative consequences might occur considering ";
    if (initial.empty()) {
        out << "general knowledge?";
    } else {
        out << "the facts below or general knowledge?\n";
        for (const Fact* fact : initial) {
            out << "- " << fact->text << "\n";
        }
    }
    return out.str();
}

std::string answer_system() {
    return "You answer the user's question from the memory context below it. Weigh "
           "every context line, prefer specific remembered facts over generalities, "
           "and reason through conflicts between the question's assumption and the "
           "context explicitly before concluding. If the context contains a warning "
           "relevant to the question, surface it.";
}

std::string answer_user(const std::string& query_text,
                        const std::vector<std::string>& context_lines) {
    std::ostringstream out;
    out << "Question: " << query_text << "\n";
    out << "Context:\n";
    for (const auto& line : context_lines) {
        out << line << "\n";
    }
    out << "Answer:";
    return out.str();
}

std::string judge_system() {
    return "You grade a candidate answer against a gold answer. Reply with exactly one "
           "line: the word CORRECT or INCORRECT, a space, and an integer quality score "
           "from 0 to 100. No other text.";
}

std::string judge_user(const std::string& question, const std::string& gold_answer,
                       const std::string& candidate_answer) {
    std::ostringstream out;
    out << "Question: " << question << "\n";
    out << "Gold answer: " << gold_answer << "\n";
    out << "Candidate answer: " << candidate_answer << "\n";
    out << "Verdict:";
    return out.str();
}

}  // namespace actmem::prompts
