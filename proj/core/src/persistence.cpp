#include "actmem/persistence.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "actmem/errors.hpp"
#include "actmem/text.hpp"
#include "internal/json_codec.hpp"

namespace actmem {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;
constexpr char kMagic[4] = {'A', 'M', 'E', 'B'};

void atomic_write(const fs::path& target, const std::string& bytes) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot replace " + target.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
    }
}

template <typename T>
T get_le(const std::string& bytes, std::size_t& at, const char* what) {
    if (at + sizeof(T) > bytes.size()) {
        throw CorruptFile(std::string("embeddings.bin: truncated ") + what);
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    }
    at += sizeof(T);
    return value;
}

}  // namespace

void save_graph(const MemoryGraph& graph, const std::string& dir) {
    validate_graph(graph);
    fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create store directory " + dir + ": " + ec.message());

    std::size_t dim = graph.embeddings.empty() ? 0 : graph.embeddings.begin()->second.dim();

    ordered_json manifest{{"format_version", kFormatVersion},
                          {"embedding_dim", dim},
                          {"fact_count", graph.facts.size()}};
    atomic_write(root / "manifest.json", manifest.dump(2) + "\n");

    std::string facts;
    for (const auto& [id, fact] : graph.facts) {
        facts += fact_to_json(fact).dump();
        facts += '\n';
    }
    atomic_write(root / "facts.jsonl", facts);

    std::string blob;
    blob.append(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(blob, kFormatVersion);
    put_le<std::uint32_t>(blob, static_cast<std::uint32_t>(dim));
    put_le<std::uint64_t>(blob, graph.embeddings.size());
    for (const auto& [id, embedding] : graph.embeddings) {
        for (float value : embedding.values) {
            std::uint32_t bits;
            std::memcpy(&bits, &value, sizeof(bits));
            put_le<std::uint32_t>(blob, bits);
        }
    }
    atomic_write(root / "embeddings.bin", blob);

    ordered_json clusters = ordered_json::array();
    for (const auto& cluster : graph.clusters) clusters.push_back(cluster_to_json(cluster));
    atomic_write(root / "clusters.json", clusters.dump(2) + "\n");

    std::string edges;
    for (const auto& edge : graph.edges) {
        edges += edge_to_json(edge).dump();
        edges += '\n';
    }
    atomic_write(root / "edges.jsonl", edges);
}

MemoryGraph load_graph(const std::string& dir) {
    fs::path root(dir);
    if (!fs::exists(root / "manifest.json")) {
        throw IoError("not a memory store (no manifest.json): " + dir);
    }

    ordered_json manifest;
    try {
        manifest = ordered_json::parse(read_file(root / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile("manifest.json: " + std::string(e.what()));
    }
    int version = manifest.value("format_version", -1);
    if (version != kFormatVersion) {
        throw VersionMismatch("store format_version " + std::to_string(version) +
                              ", this build reads " + std::to_string(kFormatVersion));
    }

    MemoryGraph graph;

    std::string facts_bytes = read_file(root / "facts.jsonl");
    std::size_t line_no = 0;
    for (std::string_view raw : split_lines(facts_bytes)) {
        ++line_no;
        if (trim(raw).empty()) continue;
        Fact fact;
        try {
            fact = fact_from_json(ordered_json::parse(raw));
        } catch (const std::exception& e) {
            throw CorruptFile("facts.jsonl:" + std::to_string(line_no) + ": " + e.what());
        }
        if (!graph.facts.emplace(fact.fact_id, fact).second) {
            throw CorruptFile("facts.jsonl:" + std::to_string(line_no) + ": duplicate fact " +
                              fact.fact_id);
        }
    }

    std::string blob = read_file(root / "embeddings.bin");
    if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
        throw CorruptFile("embeddings.bin: bad magic");
    }
    std::size_t at = sizeof(kMagic);
    auto bin_version = get_le<std::uint32_t>(blob, at, "version");
    if (bin_version != static_cast<std::uint32_t>(kFormatVersion)) {
        throw VersionMismatch("embeddings.bin version " + std::to_string(bin_version));
    }
    auto dim = get_le<std::uint32_t>(blob, at, "dim");
    auto count = get_le<std::uint64_t>(blob, at, "count");
    if (count != graph.facts.size()) {
        throw CorruptFile("embeddings.bin: " + std::to_string(count) + " rows for " +
                          std::to_string(graph.facts.size()) + " facts");
    }
    std::size_t need = at + static_cast<std::size_t>(count) * dim * sizeof(std::uint32_t);
    if (blob.size() != need) {
        throw CorruptFile("embeddings.bin: expected " + std::to_string(need) + " bytes, have " +
                          std::to_string(blob.size()));
    }
    for (const auto& [id, fact] : graph.facts) {
        Embedding embedding;
        embedding.values.resize(dim);
        for (std::uint32_t i = 0; i < dim; ++i) {
            auto bits = get_le<std::uint32_t>(blob, at, "row data");
            float value;
            std::memcpy(&value, &bits, sizeof(value));
            embedding.values[i] = value;
        }
        graph.embeddings.emplace(id, std::move(embedding));
    }

    ordered_json clusters;
    try {
        clusters = ordered_json::parse(read_file(root / "clusters.json"));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile("clusters.json: " + std::string(e.what()));
    }
    if (!clusters.is_array()) throw CorruptFile("clusters.json: not an array");
    for (const auto& item : clusters) {
        try {
            graph.clusters.push_back(cluster_from_json(item));
        } catch (const std::exception& e) {
            throw CorruptFile("clusters.json: " + std::string(e.what()));
        }
    }

    std::string edges_bytes = read_file(root / "edges.jsonl");
    line_no = 0;
    for (std::string_view raw : split_lines(edges_bytes)) {
        ++line_no;
        if (trim(raw).empty()) continue;
        try {
            graph.edges.push_back(edge_from_json(ordered_json::parse(raw)));
        } catch (const std::exception& e) {
            throw CorruptFile("edges.jsonl:" + std::to_string(line_no) + ": " + e.what());
        }
    }

    try {
        validate_graph(graph);
    } catch (const IntegrityError&) {
        throw;
    } catch (const Error& e) {
        throw IntegrityError(e.what());
    }
    return graph;
}

}  // namespace actmem
