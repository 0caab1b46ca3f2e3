#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "actmem/types.hpp"

namespace actmem {

struct ChatRequest {
    std::string system_prompt;
    std::string user_content;  // must be nonempty
    double temperature = 0.0;
};

struct NllRequest {
    std::string context_text;  // conditioning prefix, may be empty
    std::string target_text;   // the scored sequence, must be nonempty
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    bool exact = false;  // true when reported by the provider

    TokenUsage& operator+=(const TokenUsage& other) {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        exact = exact && other.exact;
        return *this;
    }
};

enum class CallKind { Chat, Embed, Nll };

struct CallRecord {
    std::uint64_t id = 0;
    CallKind kind = CallKind::Chat;
    TokenUsage usage;
};

// Thread-safe append-only log of provider calls. Ids are dense and start at
// 1; pipelines segment their traces with next_id() marks.
class CallLog {
public:
    std::uint64_t record(CallKind kind, const TokenUsage& usage);
    std::uint64_t next_id() const;

    // Calls of `kind` with id in [from, to).
    std::size_t count(CallKind kind, std::uint64_t from = 0,
                      std::uint64_t to = std::numeric_limits<std::uint64_t>::max()) const;
    std::vector<std::uint64_t> ids(
        CallKind kind, std::uint64_t from = 0,
        std::uint64_t to = std::numeric_limits<std::uint64_t>::max()) const;
    TokenUsage usage_in(std::uint64_t from = 0,
                        std::uint64_t to = std::numeric_limits<std::uint64_t>::max()) const;
    std::vector<CallRecord> snapshot() const;

private:
    mutable std::mutex mu_;
    std::vector<CallRecord> records_;
    std::uint64_t next_ = 1;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // Returns the model reply text. Must be callable concurrently.
    virtual std::string chat(const ChatRequest& request) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One unit-normalized vector per input, order-preserving.
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
};

class NllScorer {
public:
    virtual ~NllScorer() = default;
    // Total negative log-likelihood of target_text given context_text, in
    // nats (summed over target tokens, not averaged).
    virtual double nll(const NllRequest& request) = 0;
};

// The three model dependencies every pipeline stage runs against.
struct ProviderSuite {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<NllScorer> scorer;
    std::shared_ptr<CallLog> log;  // shared by all three; may be null
    int max_parallel = 8;
    // True for mock/replay suites: evaluation reports zero wall-clock
    // timings so report bytes are reproducible.
    bool deterministic = false;
};

}  // namespace actmem
