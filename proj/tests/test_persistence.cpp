#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actmem/engine.hpp"
#include "actmem/errors.hpp"
#include "actmem/persistence.hpp"
#include "support/fixtures.hpp"

using namespace actmem;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
}

}  // namespace

TEST_CASE("save then load round-trips the graph exactly") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        MemoryGraph graph = fixtures::random_valid_graph(4 + seed, seed);
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        MemoryGraph loaded = load_graph(dir.str("store"));
        CHECK(loaded == graph);
    }
}

TEST_CASE("the empty graph round-trips") {
    fixtures::TempDir dir;
    save_graph(MemoryGraph{}, dir.str("store"));
    MemoryGraph loaded = load_graph(dir.str("store"));
    CHECK(loaded.empty());
    CHECK(loaded.edges.empty());
    CHECK(loaded.clusters.empty());
}

TEST_CASE("saving twice produces byte-identical files") {
    MemoryGraph graph = fixtures::random_valid_graph(25, 5);
    fixtures::TempDir dir;
    save_graph(graph, dir.str("one"));
    save_graph(graph, dir.str("two"));
    for (const char* name :
         {"manifest.json", "facts.jsonl", "embeddings.bin", "clusters.json", "edges.jsonl"}) {
        CAPTURE(name);
        CHECK(slurp(dir.path() / "one" / name) == slurp(dir.path() / "two" / name));
    }
    // Save -> load -> save is also byte-stable.
    save_graph(load_graph(dir.str("one")), dir.str("three"));
    CHECK(slurp(dir.path() / "one" / "embeddings.bin") ==
          slurp(dir.path() / "three" / "embeddings.bin"));
    CHECK(slurp(dir.path() / "one" / "facts.jsonl") ==
          slurp(dir.path() / "three" / "facts.jsonl"));
}

TEST_CASE("saving overwrites a previous store at the same path") {
    MemoryGraph big = fixtures::random_valid_graph(20, 1);
    MemoryGraph small = fixtures::random_valid_graph(5, 2);
    fixtures::TempDir dir;
    save_graph(big, dir.str("store"));
    save_graph(small, dir.str("store"));
    CHECK(load_graph(dir.str("store")) == small);
}

TEST_CASE("manifest carries version, dimension, and count") {
    MemoryGraph graph = fixtures::random_valid_graph(6, 3);
    fixtures::TempDir dir;
    save_graph(graph, dir.str("store"));
    auto manifest = nlohmann::json::parse(slurp(dir.path() / "store" / "manifest.json"));
    CHECK(manifest.at("format_version") == 1);
    CHECK(manifest.at("embedding_dim") == 16);
    CHECK(manifest.at("fact_count") == 6);
}

TEST_CASE("loading a missing or non-store directory raises IoError") {
    fixtures::TempDir dir;
    CHECK_THROWS_AS(load_graph(dir.str("absent")), IoError);
    std::filesystem::create_directories(dir.str("not_a_store"));
    CHECK_THROWS_AS(load_graph(dir.str("not_a_store")), IoError);
}

TEST_CASE("a future format version is refused with VersionMismatch") {
    MemoryGraph graph = fixtures::random_valid_graph(4, 9);
    fixtures::TempDir dir;
    save_graph(graph, dir.str("store"));
    auto path = dir.path() / "store" / "manifest.json";
    auto manifest = nlohmann::json::parse(slurp(path));
    manifest["format_version"] = 2;
    spit(path, manifest.dump(2) + "\n");
    CHECK_THROWS_AS(load_graph(dir.str("store")), VersionMismatch);
}

TEST_CASE("corrupt files are reported as CorruptFile with a location") {
    MemoryGraph graph = fixtures::random_valid_graph(8, 11);

    SUBCASE("unparsable manifest") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        spit(dir.path() / "store" / "manifest.json", "{broken");
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("bad fact line") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "facts.jsonl";
        spit(path, "not json\n" + slurp(path));
        try {
            load_graph(dir.str("store"));
            FAIL("expected CorruptFile");
        } catch (const CorruptFile& e) {
            CHECK(std::string(e.what()).find("facts.jsonl:1") != std::string::npos);
        }
    }
    SUBCASE("duplicate fact line") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "facts.jsonl";
        std::string body = slurp(path);
        std::string first = body.substr(0, body.find('\n') + 1);
        spit(path, first + body);
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("wrong magic in the embedding blob") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "embeddings.bin";
        std::string body = slurp(path);
        body[0] = 'X';
        spit(path, body);
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("truncated embedding blob") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "embeddings.bin";
        std::string body = slurp(path);
        spit(path, body.substr(0, body.size() - 7));
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("trailing bytes after the embedding rows") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "embeddings.bin";
        spit(path, slurp(path) + "extra");
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("bad edge line") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "edges.jsonl";
        spit(path, slurp(path) + "{\"kind\": 42}\n");
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
    SUBCASE("clusters file must hold an array") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        spit(dir.path() / "store" / "clusters.json", "{}\n");
        CHECK_THROWS_AS(load_graph(dir.str("store")), CorruptFile);
    }
}

TEST_CASE("cross-file tampering surfaces as IntegrityError") {
    MemoryGraph graph = fixtures::random_valid_graph(8, 13);
    REQUIRE(!graph.edges.empty());

    SUBCASE("edge pointing at a deleted fact") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "edges.jsonl";
        nlohmann::json edge;
        edge["kind"] = "causal";
        edge["src"] = "00000000000000aa";
        edge["dst"] = graph.facts.begin()->first;
        edge["score"] = 1.0;
        // Prepend: causal with a low src still sorts first.
        spit(path, edge.dump() + "\n" + slurp(path));
        CHECK_THROWS_AS(load_graph(dir.str("store")), IntegrityError);
    }
    SUBCASE("cluster membership out of sync with facts") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "clusters.json";
        auto clusters = nlohmann::json::parse(slurp(path));
        REQUIRE(clusters.is_array());
        clusters[0]["member_ids"].push_back("00000000000000bb");
        clusters[0]["member_count"] = clusters[0]["member_ids"].size();
        spit(path, clusters.dump(2) + "\n");
        CHECK_THROWS_AS(load_graph(dir.str("store")), IntegrityError);
    }
    SUBCASE("embedding row tampered to non-unit norm") {
        fixtures::TempDir dir;
        save_graph(graph, dir.str("store"));
        auto path = dir.path() / "store" / "embeddings.bin";
        std::string body = slurp(path);
        // Zero out the first row (header is 4 + 4 + 4 + 8 = 20 bytes).
        for (std::size_t i = 20; i < 20 + 16 * 4; ++i) body[i] = 0;
        spit(path, body);
        CHECK_THROWS_AS(load_graph(dir.str("store")), IntegrityError);
    }
}

TEST_CASE("stores built by the full pipeline survive the round trip") {
    auto turns = fixtures::sago::turns();
    EngineConfig config = fixtures::sago::config();
    ProviderSuite suite = fixtures::sago::suite();
    MemoryGraph graph = ingest_and_build(turns, config, suite);

    fixtures::TempDir dir;
    save_graph(graph, dir.str("store"));
    CHECK(load_graph(dir.str("store")) == graph);
}
