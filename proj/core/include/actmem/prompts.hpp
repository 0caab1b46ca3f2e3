#pragma once

#include <string>
#include <vector>

#include "actmem/types.hpp"

namespace actmem {

// All prompt templates live here so the pipeline stages stay byte-exact
// reproducible and cassette replays match across versions. Machine-read
// reply contracts (one fact per line, "i -> j" lines, CORRECT/INCORRECT)
// are stated inside the prompts themselves.
namespace prompts {

// -- fact extraction (one call per dialogue turn) --

std::string extraction_system();
std::string extraction_user(const DialogueTurn& turn);

// -- causal candidate mining over an enumerated fact group --

std::string causal_system();
// Facts are numbered 1..n in the given order.
std::string causal_user(const std::vector<const Fact*>& facts);

// -- counterfactual reasoning (Step 2) --

std::string counterfactual_system();
// Renders the fixed question "If the user does {q}, what negative
// consequences might occur considering {facts} or general knowledge?" with
// the initial facts as a bulleted list.
std::string counterfactual_user(const std::string& query_text,
                                const std::vector<const Fact*>& initial);

// -- final answer over the assembled context --

std::string answer_system();
// Context facts appear as "[session] text" lines; the counterfactual
// statement, when present, follows under a "World knowledge:" label.
std::string answer_user(const std::string& query_text,
                        const std::vector<std::string>& context_lines);

// -- LLM-as-judge for the eval harness --

std::string judge_system();
std::string judge_user(const std::string& question, const std::string& gold_answer,
                       const std::string& candidate_answer);

}  // namespace prompts
}  // namespace actmem
