#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "actmem/types.hpp"

namespace actmem {

// Cosine similarity in double precision. Throws DimensionMismatch on
// unequal dims, ZeroVector when either norm < 1e-12, NonFiniteScore on
// non-finite components.
double cosine_sim(const Embedding& a, const Embedding& b);

// Unnormalized running sum of the member embeddings. Keeping the raw sum
// (rather than renormalizing between updates) is what makes a sequence of
// updates exactly equal to the direct mean of all members.
struct CentroidAccumulator {
    std::vector<double> sum;
    std::uint64_t count = 0;
    Embedding last;  // degenerate-mean fallback

    void add(const Embedding& member);
    // Normalized running mean; when the mean degenerates (norm < 1e-12,
    // antipodal members) falls back to the most recent member.
    Embedding unit() const;
};

// Normalized-running-mean centroid update: acc gains one member and the
// refreshed unit centroid is returned.
Embedding update_centroid(CentroidAccumulator& acc, const Embedding& next);

// What the single pass decided for one fact, against centroids as they were
// at assignment time. Seeds record the best rejected similarity, when any
// cluster existed.
struct AssignmentRecord {
    FactId fact_id;
    std::uint32_t cluster_id = 0;
    bool seeded = false;
    std::optional<double> best_similarity;  // empty for the very first fact

    friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

struct ClusteringResult {
    std::vector<Cluster> clusters;
    std::vector<AssignmentRecord> assignments;
};

// Single-pass incremental clustering. Facts are processed in the given
// (chronological) order; each joins the cluster whose current centroid has
// maximum similarity iff (1 - sim) <= distance_threshold, else seeds a new
// cluster. Ties on maximum similarity go to the lowest cluster_id. The
// centroid is updated after every assignment.
class ClusterBuilder {
public:
    explicit ClusterBuilder(double distance_threshold);

    AssignmentRecord assign(const FactId& fact_id, const Embedding& embedding);

    std::vector<Cluster> clusters() const;
    const std::vector<AssignmentRecord>& trace() const { return trace_; }
    double distance_threshold() const { return distance_threshold_; }

private:
    double distance_threshold_;
    std::vector<Cluster> clusters_;
    std::vector<CentroidAccumulator> accumulators_;
    std::vector<AssignmentRecord> trace_;
};

ClusteringResult assign_incremental(const std::vector<Fact>& facts,
                                    const std::vector<Embedding>& embeddings,
                                    double distance_threshold);

}  // namespace actmem
