#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "actmem/config.hpp"
#include "actmem/providers.hpp"

namespace actmem {

struct MockScriptRule {
    enum class Match { Exact, Contains };
    enum class Action { Reply, Refuse };
    Match match = Match::Contains;
    std::string pattern;
    std::string reply;
    Action action = Action::Reply;
};

// Deterministic offline chat provider. Rules are checked in insertion order
// against the request's user_content; without a match the reply is a stable
// function of the request hash, so unscripted runs are still reproducible.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::uint64_t seed = 0,
                              std::shared_ptr<CallLog> log = nullptr);

    void add_rule(MockScriptRule rule);
    void script_exact(std::string user_content, std::string reply);
    void script_contains(std::string needle, std::string reply);
    // A matching request throws ProviderRefusal.
    void script_refusal(std::string needle);
    // The next `calls` requests throw TransportError before rule matching.
    void fail_next(int calls);

    std::string chat(const ChatRequest& request) override;

private:
    std::uint64_t seed_;
    std::vector<MockScriptRule> rules_;
    std::atomic<int> fail_budget_{0};
    std::shared_ptr<CallLog> log_;
};

// Loads scripted rules from a JSON file: an array of objects with keys
// match ("exact"|"contains"), pattern, and either reply or refuse:true.
std::vector<MockScriptRule> load_mock_script(const std::string& path);

// Deterministic unit embeddings: a hashed bag-of-tokens direction blended
// with a text-hash-seeded pseudo-random direction. lexical_weight 0 gives
// pure hash-random vectors; the default 0.7 makes token overlap show up as
// cosine similarity, which is what clustering and edge fixtures need.
// Identical text (and seed) always produces the identical vector.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dim = 64, double lexical_weight = 0.7,
                                   std::uint64_t seed = 0,
                                   std::shared_ptr<CallLog> log = nullptr);

    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    Embedding embed_one(const std::string& text) const;
    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
    double lexical_weight_;
    std::uint64_t seed_;
    std::shared_ptr<CallLog> log_;
};

// Token-level unigram/bigram language model over a small fixed corpus with
// additive smoothing, used as the offline NLL scorer. Scores are
// hand-computable:
//
//   tokens     lowercase alphanumeric runs (actmem::tokenize)
//   vocab      distinct corpus tokens plus one UNK slot; V = |vocab| + 1
//   P_uni(w)   = (c(w) + a) / (N + a*V)
//   P_big(w|v) = (c(v,w) + a) / (row(v) + a*V),  row(v) = sum_w c(v,w),
//                adjacent pairs counted within corpus lines only
//   P(t | h)   = P_uni(t) if h is empty, else
//                (1-b)*P_uni(t) + b * max over v in h of P_big(t|v)
//
// where h is every token of the context plus the target tokens already
// scored, a = alpha (additive smoothing) and b = bigram_weight. The total
// NLL is the sum of -ln P over target tokens, in nats. Taking the strongest
// smoothed continuation from any history token (rather than conditioning on
// the last token only, which here is always a fixed template token) is what
// lets the antecedent fact inside the conditional template shift the score.
class ToyNllScorer : public NllScorer {
public:
    explicit ToyNllScorer(std::vector<std::string> corpus = default_corpus(),
                          double alpha = 0.1, double bigram_weight = 0.5,
                          std::shared_ptr<CallLog> log = nullptr);

    double nll(const NllRequest& request) override;

    static std::vector<std::string> default_corpus();
    const std::vector<std::string>& corpus() const { return corpus_; }
    double alpha() const { return alpha_; }
    double bigram_weight() const { return bigram_weight_; }

private:
    double token_prob(const std::string& token,
                      const std::vector<std::string>& history) const;

    std::vector<std::string> corpus_;
    double alpha_;
    double bigram_weight_;
    std::shared_ptr<CallLog> log_;

    std::map<std::string, std::int64_t> unigram_;
    std::map<std::string, std::map<std::string, std::int64_t>> bigram_;
    std::map<std::string, std::int64_t> row_totals_;
    std::int64_t total_tokens_ = 0;
    std::int64_t vocab_plus_unk_ = 1;
};

ProviderSuite make_mock_suite(const ProviderConfig& config, std::uint64_t seed = 0);

}  // namespace actmem
