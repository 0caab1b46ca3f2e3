#include "actmem/providers/mock.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "actmem/errors.hpp"
#include "actmem/text.hpp"

namespace actmem {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mock accounting is exact by definition: the deterministic token count is
// the provider's own ground truth, not an estimate of a remote meter.
TokenUsage mock_usage(const std::string& prompt_side, const std::string& completion_side) {
    TokenUsage usage;
    usage.prompt_tokens = static_cast<std::int64_t>(approx_token_count(prompt_side));
    usage.completion_tokens = static_cast<std::int64_t>(approx_token_count(completion_side));
    usage.exact = true;
    return usage;
}

}  // namespace

MockChatProvider::MockChatProvider(std::uint64_t seed, std::shared_ptr<CallLog> log)
    : seed_(seed), log_(std::move(log)) {}

void MockChatProvider::add_rule(MockScriptRule rule) { rules_.push_back(std::move(rule)); }

void MockChatProvider::script_exact(std::string user_content, std::string reply) {
    add_rule({MockScriptRule::Match::Exact, std::move(user_content), std::move(reply),
              MockScriptRule::Action::Reply});
}

void MockChatProvider::script_contains(std::string needle, std::string reply) {
    add_rule({MockScriptRule::Match::Contains, std::move(needle), std::move(reply),
              MockScriptRule::Action::Reply});
}

void MockChatProvider::script_refusal(std::string needle) {
    add_rule({MockScriptRule::Match::Contains, std::move(needle), "",
              MockScriptRule::Action::Refuse});
}

void MockChatProvider::fail_next(int calls) { fail_budget_.store(calls); }

std::string MockChatProvider::chat(const ChatRequest& request) {
    if (request.user_content.empty()) throw Error("chat request has empty user content");
    int budget = fail_budget_.load();
    while (budget > 0) {
        if (fail_budget_.compare_exchange_weak(budget, budget - 1)) {
            throw TransportError("injected transport failure", 1);
        }
    }
    for (const auto& rule : rules_) {
        bool hit = rule.match == MockScriptRule::Match::Exact
                       ? request.user_content == rule.pattern
                       : request.user_content.find(rule.pattern) != std::string::npos;
        if (!hit) continue;
        if (rule.action == MockScriptRule::Action::Refuse) {
            throw ProviderRefusal("scripted refusal");
        }
        if (log_) log_->record(CallKind::Chat, mock_usage(request.system_prompt + "\n" + request.user_content, rule.reply));
        return rule.reply;
    }
    std::string reply =
        "OK-" + to_hex64(fnv1a64(request.system_prompt + '\x1f' + request.user_content +
                                 '\x1f' + to_hex64(seed_)));
    if (log_) log_->record(CallKind::Chat, mock_usage(request.system_prompt + "\n" + request.user_content, reply));
    return reply;
}

std::vector<MockScriptRule> load_mock_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open mock script: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError("mock script " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw SerializationError("mock script " + path + " must be a JSON array");
    std::vector<MockScriptRule> rules;
    for (const auto& item : doc) {
        if (!item.is_object()) throw SerializationError("mock script rule must be an object");
        MockScriptRule rule;
        std::string match = item.value("match", std::string("contains"));
        if (match == "exact") {
            rule.match = MockScriptRule::Match::Exact;
        } else if (match == "contains") {
            rule.match = MockScriptRule::Match::Contains;
        } else {
            throw SerializationError("mock script rule has unknown match mode: " + match);
        }
        if (!item.contains("pattern") || !item["pattern"].is_string()) {
            throw SerializationError("mock script rule is missing a string pattern");
        }
        rule.pattern = item["pattern"].get<std::string>();
        if (item.value("refuse", false)) {
            rule.action = MockScriptRule::Action::Refuse;
        } else if (item.contains("reply") && item["reply"].is_string()) {
            rule.reply = item["reply"].get<std::string>();
        } else {
            throw SerializationError("mock script rule needs either a reply or refuse:true");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim, double lexical_weight,
                                             std::uint64_t seed, std::shared_ptr<CallLog> log)
    : dim_(dim), lexical_weight_(lexical_weight), seed_(seed), log_(std::move(log)) {
    if (dim_ == 0) throw ConfigError("mock_dim", "must be at least 1");
    if (!(lexical_weight_ >= 0.0 && lexical_weight_ <= 1.0)) {
        throw ConfigError("mock_lexical_weight", "must be in [0, 1]");
    }
}

Embedding MockEmbeddingProvider::embed_one(const std::string& text) const {
    std::vector<double> lexical(dim_, 0.0);
    bool has_tokens = false;
    for (const auto& token : tokenize(text)) {
        lexical[fnv1a64(token) % dim_] += 1.0;
        has_tokens = true;
    }

    std::vector<double> noise(dim_, 0.0);
    std::mt19937_64 rng(splitmix64(fnv1a64(text) ^ splitmix64(seed_)));
    auto uniform01 = [&rng]() {
        // (0, 1]: keeps log() finite in the Box-Muller transform below.
        return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    };
    for (std::size_t i = 0; i < dim_; i += 2) {
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        noise[i] = r * std::cos(2.0 * M_PI * u2);
        if (i + 1 < dim_) noise[i + 1] = r * std::sin(2.0 * M_PI * u2);
    }

    // Blend unit lexical and unit noise directions; token-free text falls
    // back to the noise direction alone so the result is never degenerate.
    auto unit_scale = [](std::vector<double>& values) {
        double sq = 0.0;
        for (double x : values) sq += x * x;
        double n = std::sqrt(sq);
        if (n > 0.0) {
            for (double& x : values) x /= n;
        }
    };
    double w = has_tokens ? lexical_weight_ : 0.0;
    unit_scale(lexical);
    unit_scale(noise);
    std::vector<double> blended(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        blended[i] = w * lexical[i] + (1.0 - w) * noise[i];
    }
    return normalized(blended);
}

std::vector<Embedding> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    std::int64_t prompt_tokens = 0;
    for (const auto& text : texts) {
        out.push_back(embed_one(text));
        prompt_tokens += static_cast<std::int64_t>(approx_token_count(text));
    }
    if (log_) {
        TokenUsage usage;
        usage.prompt_tokens = prompt_tokens;
        usage.exact = true;
        log_->record(CallKind::Embed, usage);
    }
    return out;
}

ToyNllScorer::ToyNllScorer(std::vector<std::string> corpus, double alpha, double bigram_weight,
                           std::shared_ptr<CallLog> log)
    : corpus_(std::move(corpus)), alpha_(alpha), bigram_weight_(bigram_weight),
      log_(std::move(log)) {
    if (!(alpha_ > 0.0)) throw ConfigError("alpha", "must be positive");
    if (!(bigram_weight_ >= 0.0 && bigram_weight_ <= 1.0)) {
        throw ConfigError("bigram_weight", "must be in [0, 1]");
    }
    for (const auto& line : corpus_) {
        auto toks = tokenize(line);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            ++unigram_[toks[i]];
            ++total_tokens_;
            if (i + 1 < toks.size()) {
                ++bigram_[toks[i]][toks[i + 1]];
                ++row_totals_[toks[i]];
            }
        }
    }
    vocab_plus_unk_ = static_cast<std::int64_t>(unigram_.size()) + 1;
}

double ToyNllScorer::token_prob(const std::string& token,
                                const std::vector<std::string>& history) const {
    const double v = static_cast<double>(vocab_plus_unk_);
    auto uni_it = unigram_.find(token);
    double c_uni = uni_it == unigram_.end() ? 0.0 : static_cast<double>(uni_it->second);
    double p_uni = (c_uni + alpha_) / (static_cast<double>(total_tokens_) + alpha_ * v);
    if (history.empty()) return p_uni;

    double best_big = 0.0;
    for (const auto& prev : history) {
        double c_big = 0.0;
        auto row_it = bigram_.find(prev);
        if (row_it != bigram_.end()) {
            auto cell = row_it->second.find(token);
            if (cell != row_it->second.end()) c_big = static_cast<double>(cell->second);
        }
        auto total_it = row_totals_.find(prev);
        double row = total_it == row_totals_.end() ? 0.0 : static_cast<double>(total_it->second);
        double p = (c_big + alpha_) / (row + alpha_ * v);
        if (p > best_big) best_big = p;
    }
    return (1.0 - bigram_weight_) * p_uni + bigram_weight_ * best_big;
}

double ToyNllScorer::nll(const NllRequest& request) {
    if (request.target_text.empty()) throw Error("nll request has empty target text");
    auto history = tokenize(request.context_text);
    auto target = tokenize(request.target_text);
    double total = 0.0;
    for (const auto& token : target) {
        double p = token_prob(token, history);
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw NonFiniteScore("token probability is not positive and finite");
        }
        total -= std::log(p);
        history.push_back(token);
    }
    if (log_) {
        TokenUsage usage;
        usage.prompt_tokens = static_cast<std::int64_t>(approx_token_count(request.context_text)) +
                              static_cast<std::int64_t>(approx_token_count(request.target_text));
        usage.exact = true;
        log_->record(CallKind::Nll, usage);
    }
    return total;
}

std::vector<std::string> ToyNllScorer::default_corpus() {
    // Half natural filler (token mass plus rows for "the"), half terse
    // cause-effect log lines that pin the adjacency bridges the causal
    // filter fixtures rely on. Tokens of the scoring templates other than
    // "the" never appear here, so both templates share the same smoothing
    // floor and unrelated pairs land at exactly zero.
    return {
        "the ground stayed dry under the tree yesterday",
        "the cat slept on warm mats near the window",
        "people enjoy music and long walks in the park",
        "the flight landed in seattle on time yesterday",
        "the puppy chewed on an old shoe in the yard",
        "the ground near the tent was dry at dawn",
        "the garden smelled sweet after sunset",
        "rain wet streets",
        "rain wet streets",
        "rain wet streets",
        "coffee awake night",
        "coffee awake night",
        "coffee awake night",
        "storm delayed flight",
        "storm delayed flight",
        "storm delayed flight",
        "peanuts allergic reaction",
        "peanuts allergic reaction",
        "peanuts allergic reaction",
        "sago palm puppy sick",
        "sago palm puppy sick",
        "sago palm puppy sick",
        "sago palm toxic pets",
        "sago palm toxic pets",
        "snow icy roads",
        "snow icy roads",
        "exercise tired muscles",
        "exercise tired muscles",
        "roses garden bloom",
        "roses thorns prick",
        "roses thorns prick",
        "roses thorns prick",
    };
}

ProviderSuite make_mock_suite(const ProviderConfig& config, std::uint64_t seed) {
    ProviderSuite suite;
    suite.log = std::make_shared<CallLog>();
    suite.chat = std::make_shared<MockChatProvider>(seed, suite.log);
    suite.embedder = std::make_shared<MockEmbeddingProvider>(
        config.mock_dim, config.mock_lexical_weight, seed, suite.log);
    suite.scorer = std::make_shared<ToyNllScorer>(ToyNllScorer::default_corpus(), 0.1, 0.5,
                                                  suite.log);
    suite.max_parallel = config.max_in_flight;
    suite.deterministic = true;
    return suite;
}

}  // namespace actmem
