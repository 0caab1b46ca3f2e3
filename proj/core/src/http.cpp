#include "actmem/providers/http.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "actmem/text.hpp"

namespace actmem::providers {
namespace {

using json = nlohmann::json;

constexpr int kMaxAttempts = 3;
constexpr std::chrono::milliseconds kBackoffBase{250};

// Runtime-sized counting semaphore bounding in-flight requests.
class Semaphore {
public:
    explicit Semaphore(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int slots_;
};

struct SlotGuard {
    explicit SlotGuard(Semaphore& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    Semaphore& sem_;
};

std::string body_excerpt(const std::string& body) {
    try {
        json parsed = json::parse(body);
        if (parsed.contains("error") && parsed["error"].contains("message")) {
            return parsed["error"]["message"].get<std::string>();
        }
    } catch (const json::exception&) {
    }
    return body.size() > 200 ? body.substr(0, 200) + "..." : body;
}

class HttpTransport {
public:
    explicit HttpTransport(const ProviderConfig& config)
        : api_key_(config.api_key),
          timeout_seconds_(config.timeout_seconds),
          slots_(config.max_in_flight) {
        auto scheme_end = config.api_base.find("://");
        if (scheme_end == std::string::npos) {
            throw ConfigError("api_base", "must start with http:// or https://");
        }
        std::string scheme = config.api_base.substr(0, scheme_end);
        if (scheme != "http" && scheme != "https") {
            throw ConfigError("api_base", "unsupported scheme: " + scheme);
        }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (scheme == "https") {
            throw ConfigError("api_base", "https requires an OpenSSL-enabled build");
        }
#endif
        auto path_start = config.api_base.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            origin_ = config.api_base;
        } else {
            origin_ = config.api_base.substr(0, path_start);
            prefix_ = config.api_base.substr(path_start);
        }
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    // POST with retry on transport failures, 429 and 5xx. A client is built
    // per request; httplib clients do not support concurrent reuse.
    json post_json(const std::string& path, const json& body) {
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(kBackoffBase * (1 << (attempt - 2)));
            }
            {
                SlotGuard guard(slots_);
                httplib::Client client(origin_);
                client.set_connection_timeout(timeout_seconds_, 0);
                client.set_read_timeout(timeout_seconds_, 0);
                client.set_write_timeout(timeout_seconds_, 0);
                httplib::Headers headers;
                if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
                auto res =
                    client.Post(prefix_ + path, headers, payload, "application/json");
                if (!res) {
                    last_error = "transport: " + httplib::to_string(res.error());
                } else if (res->status == 429 || res->status >= 500) {
                    last_error =
                        "HTTP " + std::to_string(res->status) + ": " + body_excerpt(res->body);
                } else if (res->status >= 400) {
                    throw ProviderRefusal("HTTP " + std::to_string(res->status) + " on " + path +
                                          ": " + body_excerpt(res->body));
                } else {
                    try {
                        return json::parse(res->body);
                    } catch (const json::exception& e) {
                        last_error = std::string("unparsable response body: ") + e.what();
                    }
                }
            }
            spdlog::warn("{} attempt {}/{} failed: {}", path, attempt, kMaxAttempts, last_error);
        }
        throw TransportError(path + ": " + last_error, kMaxAttempts);
    }

private:
    std::string origin_;
    std::string prefix_;
    std::string api_key_;
    int timeout_seconds_;
    Semaphore slots_;
};

TokenUsage usage_from_response(const json& res, const std::string& prompt_text,
                               const std::string& completion_text) {
    TokenUsage usage;
    if (res.contains("usage") && res["usage"].is_object()) {
        const json& u = res["usage"];
        usage.prompt_tokens = u.value("prompt_tokens", std::int64_t{0});
        usage.completion_tokens = u.value("completion_tokens", std::int64_t{0});
        usage.exact = true;
    } else {
        usage.prompt_tokens = static_cast<std::int64_t>(approx_token_count(prompt_text));
        usage.completion_tokens =
            static_cast<std::int64_t>(approx_token_count(completion_text));
        usage.exact = false;
    }
    return usage;
}

class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(std::shared_ptr<HttpTransport> transport, std::string model,
                     std::shared_ptr<CallLog> log)
        : transport_(std::move(transport)), model_(std::move(model)), log_(std::move(log)) {}

    std::string chat(const ChatRequest& request) override {
        if (request.user_content.empty()) throw Error("chat request needs user content");
        if (model_.empty()) throw ConfigError("chat_model", "required for the http provider");
        json body{{"model", model_}, {"temperature", request.temperature}};
        body["messages"] = json::array();
        if (!request.system_prompt.empty()) {
            body["messages"].push_back({{"role", "system"}, {"content", request.system_prompt}});
        }
        body["messages"].push_back({{"role", "user"}, {"content", request.user_content}});

        json res = transport_->post_json("/chat/completions", body);
        std::string text;
        try {
            text = res.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw TransportError(std::string("chat response shape: ") + e.what());
        }
        if (log_) {
            log_->record(CallKind::Chat,
                         usage_from_response(res, request.system_prompt + request.user_content,
                                             text));
        }
        return text;
    }

private:
    std::shared_ptr<HttpTransport> transport_;
    std::string model_;
    std::shared_ptr<CallLog> log_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::shared_ptr<HttpTransport> transport, std::string model,
                          std::shared_ptr<CallLog> log)
        : transport_(std::move(transport)), model_(std::move(model)), log_(std::move(log)) {}

    std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw Error("embed requires at least one text");
        for (const std::string& text : texts) {
            if (text.empty()) throw Error("embed input texts must be nonempty");
        }
        if (model_.empty()) throw ConfigError("embed_model", "required for the http provider");
        json body{{"model", model_}, {"input", texts}};

        json res = transport_->post_json("/embeddings", body);
        std::vector<std::vector<double>> rows(texts.size());
        std::string joined;
        for (const std::string& text : texts) joined += text;
        try {
            for (const json& item : res.at("data")) {
                std::size_t index = item.at("index").get<std::size_t>();
                if (index >= rows.size()) throw TransportError("embedding index out of range");
                rows[index] = item.at("embedding").get<std::vector<double>>();
            }
        } catch (const json::exception& e) {
            throw TransportError(std::string("embeddings response shape: ") + e.what());
        }

        std::vector<Embedding> out;
        out.reserve(rows.size());
        std::size_t dim = rows.empty() ? 0 : rows.front().size();
        for (const auto& row : rows) {
            if (row.empty()) throw TransportError("embeddings response missing a row");
            if (row.size() != dim) {
                throw DimensionMismatch("provider returned dims " + std::to_string(dim) +
                                        " and " + std::to_string(row.size()));
            }
            out.push_back(normalized(row));
        }
        if (log_) log_->record(CallKind::Embed, usage_from_response(res, joined, ""));
        return out;
    }

private:
    std::shared_ptr<HttpTransport> transport_;
    std::string model_;
    std::shared_ptr<CallLog> log_;
};

class HttpNllScorer : public NllScorer {
public:
    HttpNllScorer(std::shared_ptr<HttpTransport> transport, std::string model,
                  std::shared_ptr<CallLog> log)
        : transport_(std::move(transport)), model_(std::move(model)), log_(std::move(log)) {}

    // Echo scoring: the full prompt is context + " " + target; the target
    // NLL is minus the summed logprobs of echoed tokens whose span reaches
    // into the target suffix (a BPE token may straddle the joining space).
    double nll(const NllRequest& request) override {
        if (request.target_text.empty()) throw Error("nll target must be nonempty");
        if (model_.empty()) throw ConfigError("score_model", "required for the http provider");
        std::string prefix =
            request.context_text.empty() ? "" : request.context_text + " ";
        std::string prompt = prefix + request.target_text;
        json body{{"model", model_},   {"prompt", prompt},  {"max_tokens", 0},
                  {"echo", true},      {"logprobs", 0},     {"temperature", 0.0}};

        json res = transport_->post_json("/completions", body);
        double total = 0.0;
        bool scored_any = false;
        try {
            const json& lp = res.at("choices").at(0).at("logprobs");
            const json& tokens = lp.at("tokens");
            const json& offsets = lp.at("text_offset");
            const json& probs = lp.at("token_logprobs");
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                std::size_t begin = offsets.at(i).get<std::size_t>();
                std::size_t end = begin + tokens.at(i).get<std::string>().size();
                if (end <= prefix.size()) continue;  // pure context token
                if (probs.at(i).is_null()) {
                    spdlog::warn("no logprob for leading target token; skipped");
                    continue;
                }
                total -= probs.at(i).get<double>();
                scored_any = true;
            }
        } catch (const json::exception& e) {
            throw TransportError(std::string("completions response shape: ") + e.what());
        }
        if (!scored_any) throw NonFiniteScore("echo response scored no target tokens");
        if (!std::isfinite(total)) throw NonFiniteScore("non-finite total NLL from provider");
        if (log_) log_->record(CallKind::Nll, usage_from_response(res, prompt, ""));
        return total;
    }

private:
    std::shared_ptr<HttpTransport> transport_;
    std::string model_;
    std::shared_ptr<CallLog> log_;
};

}  // namespace

ProviderSuite make_http_suite(const ProviderConfig& config) {
    if (config.api_base.empty()) throw ConfigError("api_base", "required for the http provider");
    if (config.max_in_flight < 1) throw ConfigError("max_in_flight", "must be at least 1");

    auto transport = std::make_shared<HttpTransport>(config);
    ProviderSuite suite;
    suite.log = std::make_shared<CallLog>();
    suite.chat = std::make_shared<HttpChatProvider>(transport, config.chat_model, suite.log);
    suite.embedder =
        std::make_shared<HttpEmbeddingProvider>(transport, config.embed_model, suite.log);
    suite.scorer = std::make_shared<HttpNllScorer>(transport, config.score_model, suite.log);
    suite.max_parallel = config.max_in_flight;
    suite.deterministic = false;
    return suite;
}

}  // namespace actmem::providers
