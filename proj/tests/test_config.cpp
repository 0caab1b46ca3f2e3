#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "actmem/config.hpp"
#include "support/fixtures.hpp"

using namespace actmem;

namespace {

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

struct EnvGuard {
    explicit EnvGuard(std::vector<const char*> names) : names_(std::move(names)) {
        for (const char* name : names_) unsetenv(name);
    }
    ~EnvGuard() {
        for (const char* name : names_) unsetenv(name);
    }
    std::vector<const char*> names_;
};

}  // namespace

TEST_CASE("default engine config is valid and validation returns it unchanged") {
    EngineConfig config;
    CHECK(validate_config(config) == config);
}

TEST_CASE("validate_config rejects each out-of-range field") {
    auto broken = [](auto mutate) {
        EngineConfig config;
        mutate(config);
        return config;
    };
    CHECK_THROWS_AS(validate_config(broken([](EngineConfig& c) {
                        c.cluster_distance_threshold = -0.1;
                    })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](EngineConfig& c) {
                        c.cluster_distance_threshold = 2.5;
                    })),
                    ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](EngineConfig& c) { c.semantic_edge_threshold = 1.5; })),
        ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](EngineConfig& c) { c.k_initial = -1; })),
                    ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](EngineConfig& c) { c.k_counterfactual = -1; })),
        ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](EngineConfig& c) { c.graph_expansion_hops = -1; })),
        ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](EngineConfig& c) { c.max_context_facts = -2; })),
        ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](EngineConfig& c) { c.pmi_threshold = -0.2; })),
        ConfigError);

    // Zero retrieval budgets are legal degenerate configs, not errors.
    CHECK_NOTHROW(validate_config(broken([](EngineConfig& c) { c.k_initial = 0; })));

    try {
        validate_config(broken([](EngineConfig& c) { c.k_initial = -3; }));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "k_initial");
    }
}

TEST_CASE("apply_env_overrides reads the key and endpoint from the environment") {
    EnvGuard guard({"ACTMEM_API_KEY", "ACTMEM_API_BASE", "ACTMEM_CHAT_MODEL",
                    "ACTMEM_EMBED_MODEL", "ACTMEM_SCORE_MODEL"});

    ProviderConfig config;
    config.api_base = "https://from-file.example/v1";
    config.chat_model = "file-chat";
    apply_env_overrides(config);
    CHECK(config.api_key == "");
    CHECK(config.api_base == "https://from-file.example/v1");

    setenv("ACTMEM_API_KEY", "sk-test-123", 1);
    setenv("ACTMEM_API_BASE", "https://env.example/v1", 1);
    setenv("ACTMEM_CHAT_MODEL", "env-chat", 1);
    setenv("ACTMEM_EMBED_MODEL", "env-embed", 1);
    setenv("ACTMEM_SCORE_MODEL", "env-score", 1);
    apply_env_overrides(config);
    CHECK(config.api_key == "sk-test-123");
    CHECK(config.api_base == "https://env.example/v1");
    CHECK(config.chat_model == "env-chat");
    CHECK(config.embed_model == "env-embed");
    CHECK(config.score_model == "env-score");
}

TEST_CASE("load_app_config parses engine and provider sections") {
    fixtures::TempDir dir;
    std::string path = dir.str("config.json");
    write_file(path, R"({
        "engine": {"k_initial": 5, "pmi_threshold": 1.5, "enable_reasoning": false},
        "providers": {"api_base": "http://localhost:9999/v1", "chat_model": "m1",
                      "max_in_flight": 2}
    })");
    AppConfig config = load_app_config(path);
    CHECK(config.engine.k_initial == 5);
    CHECK(config.engine.pmi_threshold == doctest::Approx(1.5));
    CHECK(config.engine.enable_reasoning == false);
    CHECK(config.engine.k_counterfactual == 10);  // untouched default
    CHECK(config.providers.api_base == "http://localhost:9999/v1");
    CHECK(config.providers.chat_model == "m1");
    CHECK(config.providers.max_in_flight == 2);
}

TEST_CASE("config files must not carry credentials") {
    fixtures::TempDir dir;
    std::string path = dir.str("config.json");
    write_file(path, R"({"providers": {"api_key": "sk-oops"}})");
    CHECK_THROWS_AS(load_app_config(path), ConfigError);
    try {
        load_app_config(path);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("ACTMEM_API_KEY") != std::string::npos);
    }
}

TEST_CASE("unknown config keys are rejected, not silently ignored") {
    fixtures::TempDir dir;
    std::string path = dir.str("config.json");
    write_file(path, R"({"engine": {"k_inital": 5}})");
    CHECK_THROWS_AS(load_app_config(path), ConfigError);

    write_file(path, R"({"extras": true})");
    CHECK_THROWS_AS(load_app_config(path), ConfigError);
}

TEST_CASE("invalid engine values in a config file fail validation") {
    fixtures::TempDir dir;
    std::string path = dir.str("config.json");
    write_file(path, R"({"engine": {"max_context_facts": -4}})");
    CHECK_THROWS_AS(load_app_config(path), ConfigError);
}

TEST_CASE("missing or malformed config files raise io/serialization errors") {
    fixtures::TempDir dir;
    CHECK_THROWS_AS(load_app_config(dir.str("nope.json")), Error);
    std::string path = dir.str("bad.json");
    write_file(path, "{not json");
    CHECK_THROWS_AS(load_app_config(path), Error);
}
