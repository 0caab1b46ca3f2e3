#pragma once

#include <string>

#include "actmem/types.hpp"

namespace actmem {

// Directory interchange format, format_version 1:
//
//   manifest.json    {"format_version", "embedding_dim", "fact_count"}
//   facts.jsonl      one fact object per line, sorted by fact_id
//   embeddings.bin   magic "AMEB", u32 format version, u32 dim, u64 count,
//                    then count rows of dim little-endian float32, in
//                    fact_id sort order
//   clusters.json    array of cluster objects, by cluster_id
//   edges.jsonl      one edge per line in canonical (kind, src, dst) order
//
// Writes are per-file atomic (temp file + rename) and byte-deterministic:
// saving the same graph twice produces identical bytes.
void save_graph(const MemoryGraph& graph, const std::string& dir);

// Loads and re-validates every structural invariant. Throws VersionMismatch
// on a future format version, CorruptFile naming the offending file/record,
// IntegrityError when records contradict each other (e.g. an edge against a
// missing fact).
MemoryGraph load_graph(const std::string& dir);

}  // namespace actmem
