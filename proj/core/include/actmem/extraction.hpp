#pragma once

#include <string>
#include <vector>

#include "actmem/providers.hpp"
#include "actmem/types.hpp"

namespace actmem {

// One fact per nonblank trimmed line of a provider reply, ranked in output
// order with provenance from the turn. A nonempty reply containing only
// blank lines is treated as malformed: logged, empty result.
std::vector<Fact> parse_fact_lines(const std::string& reply, const DialogueTurn& turn);

// One chat call distilling a turn into atomic facts. Provider refusals
// propagate; an empty reply legitimately means "nothing worth remembering".
std::vector<Fact> extract_facts(const DialogueTurn& turn, ChatProvider& chat);

// Fans extraction out over all turns (concurrently up to max_parallel) and
// merges per-turn results in chronological order. Exact duplicate fact
// texts within one session are dropped, first occurrence kept. Turns whose
// extraction fails are skipped with a warning; throws only when every turn
// fails. Requires turns sorted by (session_id, turn_index).
std::vector<Fact> extract_corpus(const std::vector<DialogueTurn>& turns, ChatProvider& chat,
                                 int max_parallel);

// JSONL dialogue reader: one turn per line with keys session_id,
// turn_index, user, assistant (assistant may be absent). Returns turns
// sorted by (session_id, turn_index); duplicate turn indices within a
// session are rejected.
std::vector<DialogueTurn> load_dialogue_jsonl(const std::string& path);

}  // namespace actmem
