#pragma once

#include <cstdint>
#include <vector>

#include "enan/kdtree.hpp"
#include "enan/types.hpp"

namespace enan {

struct NanSearchOptions {
    // Hard cap on the search depth (also bounded by m-1). Hitting the cap
    // sets NaturalNeighborModel::lambda_capped instead of failing.
    int max_lambda = 64;

    // Stop once the zero-neighbor count is unchanged for this many
    // consecutive rounds; 0 selects the adaptive ceil(sqrt(round)) window.
    int stability_window = 0;

    // Ignore the stability rule and run until every point has a mutual
    // neighbor (or the cap is hit). Noisy data may never satisfy this.
    bool require_full_coverage = false;
};

// Result of the mutual-neighbor search. lambda is the round at which the
// search stabilized; nan_sets holds the mutual-neighbor relation at that
// depth (symmetric by construction); knn_lists keeps each point's lambda
// nearest neighbors for downstream threshold tests.
struct NaturalNeighborModel {
    int lambda = 0;
    std::vector<std::vector<PointId>> nan_sets;
    std::vector<std::int32_t> nan_counts;
    std::vector<NeighborList> knn_lists;
    std::vector<std::int32_t> rounds_log;  // zero-neighbor count after each round
    bool lambda_capped = false;

    std::size_t size() const { return nan_counts.size(); }
};

// Round-based search: in round r every point reaches out to its r-th
// nearest neighbor; a pair becomes mutual once each lies within the other's
// first r. Stops when all points are covered or the zero-neighbor count
// stabilizes (see NanSearchOptions).
NaturalNeighborModel compute_nane(const KdTree& index, const NanSearchOptions& opts = {});

enum class QueryNanMode {
    // Mutual test at lambda: j counts iff j is among the query's lambda
    // nearest training points AND the query would enter j's lambda-NN list
    // (the query loses distance ties).
    Mutual,
    // Only the second condition, counted over all training points,
    // clamped to lambda.
    OneDirectional,
};

// Number of natural neighbors an unseen query would have at the trained
// lambda. Zero for far-away outliers.
int num_natural_neighbors(const NaturalNeighborModel& model, const KdTree& index,
                          std::span<const double> query,
                          QueryNanMode mode = QueryNanMode::Mutual);

// Same test evaluated from a precomputed query->training distance array
// (dist[j] = canonical Euclidean distance to training point j).
int num_natural_neighbors_from_distances(const NaturalNeighborModel& model,
                                         std::span<const double> dist,
                                         QueryNanMode mode = QueryNanMode::Mutual);

}  // namespace enan
