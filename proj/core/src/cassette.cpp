#include "actmem/providers/cassette.hpp"

#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include <nlohmann/json.hpp>

#include "actmem/text.hpp"

namespace actmem::providers {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json chat_key(const ChatRequest& request) {
    return {{"kind", "chat"},
            {"system", request.system_prompt},
            {"user", request.user_content},
            {"temperature", request.temperature}};
}

ordered_json embed_key(const std::vector<std::string>& texts) {
    return {{"kind", "embed"}, {"texts", texts}};
}

ordered_json nll_key(const NllRequest& request) {
    return {{"kind", "nll"}, {"context", request.context_text}, {"target", request.target_text}};
}

class CassetteWriter {
public:
    explicit CassetteWriter(const std::string& path) : out_(path, std::ios::app) {
        if (!out_) throw IoError("cannot open cassette for writing: " + path);
    }

    void append(const ordered_json& request, const ordered_json& response) {
        ordered_json line{{"kind", request.at("kind")},
                          {"request", request},
                          {"response", response}};
        std::lock_guard lock(mu_);
        out_ << line.dump() << '\n';
        out_.flush();
    }

private:
    std::mutex mu_;
    std::ofstream out_;
};

class RecordingChat : public ChatProvider {
public:
    RecordingChat(std::shared_ptr<ChatProvider> inner, std::shared_ptr<CassetteWriter> writer)
        : inner_(std::move(inner)), writer_(std::move(writer)) {}

    std::string chat(const ChatRequest& request) override {
        std::string reply = inner_->chat(request);
        writer_->append(chat_key(request), ordered_json{{"text", reply}});
        return reply;
    }

private:
    std::shared_ptr<ChatProvider> inner_;
    std::shared_ptr<CassetteWriter> writer_;
};

class RecordingEmbedder : public EmbeddingProvider {
public:
    RecordingEmbedder(std::shared_ptr<EmbeddingProvider> inner,
                      std::shared_ptr<CassetteWriter> writer)
        : inner_(std::move(inner)), writer_(std::move(writer)) {}

    std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
        std::vector<Embedding> vectors = inner_->embed(texts);
        ordered_json rows = ordered_json::array();
        for (const Embedding& v : vectors) rows.push_back(v.values);
        writer_->append(embed_key(texts), ordered_json{{"vectors", rows}});
        return vectors;
    }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<CassetteWriter> writer_;
};

class RecordingScorer : public NllScorer {
public:
    RecordingScorer(std::shared_ptr<NllScorer> inner, std::shared_ptr<CassetteWriter> writer)
        : inner_(std::move(inner)), writer_(std::move(writer)) {}

    double nll(const NllRequest& request) override {
        double score = inner_->nll(request);
        writer_->append(nll_key(request), ordered_json{{"nll", score}});
        return score;
    }

private:
    std::shared_ptr<NllScorer> inner_;
    std::shared_ptr<CassetteWriter> writer_;
};

// Recorded responses keyed by canonical request bytes, consumed FIFO.
class CassetteStore {
public:
    explicit CassetteStore(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open cassette: " + path);
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        std::size_t line_no = 0;
        for (std::string_view line : split_lines(bytes)) {
            ++line_no;
            if (trim(line).empty()) continue;
            ordered_json record;
            try {
                record = ordered_json::parse(line);
                recordings_[record.at("request").dump()].push_back(record.at("response"));
            } catch (const nlohmann::json::exception& e) {
                throw SerializationError(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
    }

    ordered_json take(const ordered_json& request) {
        std::lock_guard lock(mu_);
        auto it = recordings_.find(request.dump());
        if (it == recordings_.end() || it->second.empty()) {
            throw TransportError("no recorded response for " +
                                 request.at("kind").get<std::string>() + " request " +
                                 request.dump());
        }
        ordered_json response = std::move(it->second.front());
        it->second.pop_front();
        return response;
    }

private:
    std::mutex mu_;
    std::map<std::string, std::deque<ordered_json>> recordings_;
};

class ReplayChat : public ChatProvider {
public:
    ReplayChat(std::shared_ptr<CassetteStore> store, std::shared_ptr<CallLog> log)
        : store_(std::move(store)), log_(std::move(log)) {}

    std::string chat(const ChatRequest& request) override {
        auto text = store_->take(chat_key(request)).at("text").get<std::string>();
        if (log_) {
            TokenUsage usage;
            usage.prompt_tokens = static_cast<std::int64_t>(
                approx_token_count(request.system_prompt) +
                approx_token_count(request.user_content));
            usage.completion_tokens = static_cast<std::int64_t>(approx_token_count(text));
            log_->record(CallKind::Chat, usage);
        }
        return text;
    }

private:
    std::shared_ptr<CassetteStore> store_;
    std::shared_ptr<CallLog> log_;
};

class ReplayEmbedder : public EmbeddingProvider {
public:
    ReplayEmbedder(std::shared_ptr<CassetteStore> store, std::shared_ptr<CallLog> log)
        : store_(std::move(store)), log_(std::move(log)) {}

    std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
        ordered_json response = store_->take(embed_key(texts));
        std::vector<Embedding> out;
        for (const auto& row : response.at("vectors")) {
            Embedding v;
            v.values = row.get<std::vector<float>>();
            out.push_back(std::move(v));
        }
        if (out.size() != texts.size()) {
            throw SerializationError("cassette embed recording has wrong arity");
        }
        if (log_) {
            TokenUsage usage;
            for (const std::string& text : texts) {
                usage.prompt_tokens += static_cast<std::int64_t>(approx_token_count(text));
            }
            log_->record(CallKind::Embed, usage);
        }
        return out;
    }

private:
    std::shared_ptr<CassetteStore> store_;
    std::shared_ptr<CallLog> log_;
};

class ReplayScorer : public NllScorer {
public:
    ReplayScorer(std::shared_ptr<CassetteStore> store, std::shared_ptr<CallLog> log)
        : store_(std::move(store)), log_(std::move(log)) {}

    double nll(const NllRequest& request) override {
        double score = store_->take(nll_key(request)).at("nll").get<double>();
        if (log_) {
            TokenUsage usage;
            usage.prompt_tokens = static_cast<std::int64_t>(
                approx_token_count(request.context_text) +
                approx_token_count(request.target_text));
            log_->record(CallKind::Nll, usage);
        }
        return score;
    }

private:
    std::shared_ptr<CassetteStore> store_;
    std::shared_ptr<CallLog> log_;
};

}  // namespace

ProviderSuite wrap_recording(const ProviderSuite& inner, const std::string& cassette_path) {
    if (!inner.chat || !inner.embedder || !inner.scorer) {
        throw Error("recording requires a complete provider suite");
    }
    auto writer = std::make_shared<CassetteWriter>(cassette_path);
    ProviderSuite suite = inner;
    suite.chat = std::make_shared<RecordingChat>(inner.chat, writer);
    suite.embedder = std::make_shared<RecordingEmbedder>(inner.embedder, writer);
    suite.scorer = std::make_shared<RecordingScorer>(inner.scorer, writer);
    return suite;
}

ProviderSuite make_replay_suite(const std::string& cassette_path) {
    auto store = std::make_shared<CassetteStore>(cassette_path);
    ProviderSuite suite;
    suite.log = std::make_shared<CallLog>();
    suite.chat = std::make_shared<ReplayChat>(store, suite.log);
    suite.embedder = std::make_shared<ReplayEmbedder>(store, suite.log);
    suite.scorer = std::make_shared<ReplayScorer>(store, suite.log);
    suite.deterministic = true;
    return suite;
}

}  // namespace actmem::providers
