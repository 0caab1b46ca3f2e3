#include "actmem/clustering.hpp"

#include <cmath>

#include "actmem/errors.hpp"

namespace actmem {

double cosine_sim(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("cosine_sim: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double x = a.values[i], y = b.values[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb)) {
        throw NonFiniteScore("cosine_sim: non-finite input");
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12) throw ZeroVector("cosine_sim: zero-norm input");
    double sim = dot / (na * nb);
    // float32 storage noise can push the quotient a hair past ±1
    if (sim > 1.0) sim = 1.0;
    if (sim < -1.0) sim = -1.0;
    return sim;
}

void CentroidAccumulator::add(const Embedding& member) {
    if (sum.empty()) sum.assign(member.dim(), 0.0);
    if (sum.size() != member.dim()) {
        throw DimensionMismatch("centroid update: " + std::to_string(sum.size()) + " vs " +
                                std::to_string(member.dim()));
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += member.values[i];
    ++count;
    last = member;
}

Embedding CentroidAccumulator::unit() const {
    double sq = 0.0;
    for (double x : sum) sq += x * x;
    if (std::sqrt(sq) < 1e-12) return last;
    return normalized(sum);
}

Embedding update_centroid(CentroidAccumulator& acc, const Embedding& next) {
    acc.add(next);
    return acc.unit();
}

ClusterBuilder::ClusterBuilder(double distance_threshold)
    : distance_threshold_(distance_threshold) {}

AssignmentRecord ClusterBuilder::assign(const FactId& fact_id, const Embedding& embedding) {
    AssignmentRecord record;
    record.fact_id = fact_id;

    // lowest cluster_id wins ties because only a strictly better similarity
    // displaces the current best
    std::size_t best = clusters_.size();
    double best_sim = 0.0;
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
        double sim = cosine_sim(embedding, clusters_[i].centroid);
        if (best == clusters_.size() || sim > best_sim) {
            best = i;
            best_sim = sim;
        }
    }

    if (best != clusters_.size()) record.best_similarity = best_sim;
    if (best != clusters_.size() && (1.0 - best_sim) <= distance_threshold_) {
        record.cluster_id = clusters_[best].cluster_id;
        record.seeded = false;
        clusters_[best].member_ids.push_back(fact_id);
        clusters_[best].centroid = update_centroid(accumulators_[best], embedding);
        clusters_[best].member_count = static_cast<std::uint32_t>(accumulators_[best].count);
    } else {
        Cluster fresh;
        fresh.cluster_id = static_cast<std::uint32_t>(clusters_.size());
        fresh.member_ids.push_back(fact_id);
        CentroidAccumulator acc;
        fresh.centroid = update_centroid(acc, embedding);
        fresh.member_count = 1;
        record.cluster_id = fresh.cluster_id;
        record.seeded = true;
        clusters_.push_back(std::move(fresh));
        accumulators_.push_back(std::move(acc));
    }

    trace_.push_back(record);
    return record;
}

std::vector<Cluster> ClusterBuilder::clusters() const { return clusters_; }

ClusteringResult assign_incremental(const std::vector<Fact>& facts,
                                    const std::vector<Embedding>& embeddings,
                                    double distance_threshold) {
    if (facts.size() != embeddings.size()) {
        throw Error("assign_incremental: facts and embeddings differ in length");
    }
    ClusterBuilder builder(distance_threshold);
    for (std::size_t i = 0; i < facts.size(); ++i) {
        builder.assign(facts[i].fact_id, embeddings[i]);
    }
    ClusteringResult result;
    result.clusters = builder.clusters();
    result.assignments = builder.trace();
    return result;
}

}  // namespace actmem
