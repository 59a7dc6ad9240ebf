#pragma once

// Brute-force reference implementations used as oracles by the test and
// benchmark targets. Everything here is a straight-line serial recomputation:
// linear-scan neighbor search, full double-sum statistics, and physical
// insertion of query points. Nothing is shared with the production search or
// the incremental update paths.

#include <vector>

#include "enan/classification.hpp"
#include "enan/natural_neighbor.hpp"
#include "enan/types.hpp"

namespace enan::ref {

// All neighbors of `query` by (distance, id), truncated to k; `exclude`
// drops one point id.
NeighborList knn_scan(const PointMatrix& points, std::span<const double> query, int k,
                      PointId exclude = -1);

struct NanResult {
    int lambda = 0;
    std::vector<std::vector<PointId>> nan_sets;
    std::vector<std::int32_t> nan_counts;
    std::vector<std::int32_t> rounds_log;
    bool capped = false;
};

// Round-by-round simulation of the mutual-neighbor search on fully
// presorted scan lists.
NanResult nan_rounds(const PointMatrix& points, const NanSearchOptions& opts = {});

// Class-wise statistic evaluated as the literal double sum over every
// class member and every rank 1..k.
std::vector<double> classwise_statistic_direct(const PointMatrix& points,
                                               std::span<const ClassId> labels,
                                               ClassId num_classes, int k);

// Natural-neighbor count of a query by physically appending it (with the
// highest id) and re-evaluating mutuality at lambda.
int num_nan_inserted(const PointMatrix& points, std::span<const double> query, int lambda);

// One-directional variant: training points whose lambda-NN lists the
// inserted query enters, clamped to lambda.
int num_nan_inserted_one_directional(const PointMatrix& points, std::span<const double> query,
                                     int lambda);

// Membership-assumption prediction by physical insertion and full
// recomputation. t_out, when non-null, receives the per-assumed-class
// statistic vectors (t_out[j][c]).
ClassId enn_predict_inserted(const PointMatrix& points, std::span<const ClassId> labels,
                             ClassId num_classes, std::span<const double> query, int k,
                             std::vector<std::vector<double>>* t_out = nullptr);

ClassId knn_vote(const PointMatrix& points, std::span<const ClassId> labels,
                 ClassId num_classes, std::span<const double> query, int k);

// End-to-end adaptive prediction: reference natural-neighbor search on the
// training set, physical-insertion neighbor counts, physical-insertion
// class decisions.
std::vector<ClassId> predict_enan_full(const PointMatrix& points,
                                       std::span<const ClassId> labels, ClassId num_classes,
                                       const PointMatrix& queries,
                                       const NanSearchOptions& opts = {},
                                       ZeroNanFallback fallback = ZeroNanFallback::Lambda);

}  // namespace enan::ref
