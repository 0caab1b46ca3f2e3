#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actmem/config.hpp"
#include "actmem/providers.hpp"
#include "actmem/retrieval.hpp"
#include "actmem/types.hpp"

namespace actmem {

// Where a sample's ground-truth evidence lives: a dialogue position
// (session_id, optionally narrowed to a turn_index) or a free-text
// statement matched by embedding similarity. Position locators win when
// both forms are present.
struct EvidenceLocator {
    std::optional<std::string> session_id;
    std::optional<std::uint32_t> turn_index;
    std::string text;

    bool positional() const { return session_id.has_value(); }

    friend bool operator==(const EvidenceLocator&, const EvidenceLocator&) = default;
};

struct EvalSample {
    std::string sample_id;
    // Per-sample corpus; may be empty when the harness evaluates a shared
    // prebuilt store.
    std::vector<DialogueTurn> dialogue;
    std::string question;
    std::string gold_answer;
    std::vector<EvidenceLocator> gold_evidence;
};

// Reads evaluation samples from `path`. Two record shapes are accepted and
// may be mixed line by line:
//   - native: {id?, question, answer, evidence?: [...], dialogue?: [...]}
//     where evidence entries are strings (text locators) or objects with
//     session_id / turn_index / text, and dialogue entries use the keys
//     session_id, turn_index, user, assistant;
//   - benchmark export: {question_id, question, answer, haystack_sessions:
//     [[{role, content, has_answer?}, ...], ...], haystack_session_ids?,
//     answer_session_ids?} — sessions are flattened into turns and
//     has_answer turns (falling back to answer_session_ids) become
//     positional evidence.
// The file is either JSONL (one record per line) or a single JSON array.
// Position locators are checked against the sample dialogue
// (UnresolvableEvidence); question and answer must be nonempty.
std::vector<EvalSample> load_samples_jsonl(const std::string& path);

// Fraction of evidence items covered by at least one fact of the final
// context (knowledge items do not count). A positional locator is covered
// by a fact whose provenance matches; a text locator is covered when
// cosine similarity between fact text and locator text reaches
// match_threshold. Positional locators must resolve against `dialogue`
// when it is nonempty. `gold` must be nonempty.
double retrieval_accuracy(const RetrievalContext& context,
                          const std::vector<EvidenceLocator>& gold,
                          const std::vector<DialogueTurn>& dialogue,
                          EmbeddingProvider& embedder, double match_threshold = 0.85);

struct JudgeVerdict {
    bool judged = false;   // false when the judge reply violated the contract
    bool correct = false;
    double score = 0.0;    // confidence in [0, 1]
};

// Asks the judge to grade `answer` against `gold_answer`. The reply must
// start with "CORRECT <n>" or "INCORRECT <n>" (n in 0..100); anything else
// (including a judge refusal) yields judged = false with a warning.
JudgeVerdict qa_accuracy(const std::string& answer, const std::string& gold_answer,
                         const std::string& question, ChatProvider& judge);

struct StageSeconds {
    double ingest = 0.0;
    double build = 0.0;
    double query = 0.0;
    double judge = 0.0;
};

struct SampleResult {
    std::string sample_id;
    std::string question;
    std::string answer;
    bool retrieval_evaluated = false;
    double retrieval_accuracy = 0.0;
    JudgeVerdict verdict;
    std::string error;  // nonempty when the sample failed; such samples are unjudged
    StageSeconds seconds;
    std::uint64_t chat_calls = 0;
    std::uint64_t embed_calls = 0;
    std::uint64_t nll_calls = 0;
    TokenUsage usage;
};

struct EvalReport {
    std::string label = "full";
    EngineConfig config;
    std::vector<SampleResult> samples;
    std::size_t total = 0;
    std::size_t judged = 0;    // judged + unjudged == total, always
    std::size_t unjudged = 0;
    std::size_t failed = 0;    // subset of unjudged
    std::size_t retrieval_evaluated = 0;
    double mean_retrieval_accuracy = 0.0;  // over retrieval_evaluated samples
    bool qa_available = false;             // judged > 0
    double qa_accuracy = 0.0;              // correct fraction among judged
    double mean_judge_score = 0.0;         // among judged
    StageSeconds seconds;                  // summed over samples
    TokenUsage usage;

    // Stable-key-order JSON document.
    std::string to_json_string(int indent = 2) const;
};

// One markdown summary table, one row per report (e.g. an ablation sweep).
std::string reports_to_markdown(const std::vector<EvalReport>& reports);

// Evaluates every sample: build a per-sample graph from its dialogue (or
// use shared_graph for dialogue-less samples), run the query pipeline,
// score retrieval recall and judge the answer. A failing sample is
// recorded with its error and skipped, never aborting the run. Samples run
// sequentially so per-sample call accounting is exact; concurrency lives
// inside each sample's extraction/scoring fan-out. With deterministic
// providers all wall-clock fields are reported as zero, making report
// bytes reproducible. When shared_graph is used with edge kinds disabled
// in `config`, those edges are dropped from the shared copy.
EvalReport run_eval(const std::vector<EvalSample>& samples, const EngineConfig& config,
                    const ProviderSuite& providers, const MemoryGraph* shared_graph = nullptr,
                    const std::string& label = "full");

// Four-row sweep: the full configuration plus one row per disabled
// subsystem (reasoning, causal edges, semantic edges).
std::vector<EvalReport> run_ablation_sweep(const std::vector<EvalSample>& samples,
                                           const EngineConfig& config,
                                           const ProviderSuite& providers,
                                           const MemoryGraph* shared_graph = nullptr);

}  // namespace actmem
