#pragma once

#include <vector>

#include "enan/types.hpp"

namespace enan {

// Exact k-nearest-neighbor index over a fixed point set. Median splits on
// the widest-spread axis, leaf buckets of ~16 points. Queries return true
// Euclidean distances sorted ascending, ties broken by lower point id, so
// results match a brute-force scan exactly. Immutable once built; concurrent
// queries are safe.
class KdTree {
public:
    explicit KdTree(PointMatrix points);

    std::size_t point_count() const { return points_.rows(); }
    std::size_t dimension() const { return points_.cols(); }
    const PointMatrix& points() const { return points_; }

    // The min(k, available) nearest neighbors of `query`; `exclude` drops
    // one point id from the candidate set (used for self-exclusion).
    NeighborList knn(std::span<const double> query, int k, PointId exclude = -1) const;

    // The r-th nearest neighbor (1-based).
    Neighbor rth_neighbor(std::span<const double> query, int r, PointId exclude = -1) const;

private:
    struct Node {
        // leaf iff axis < 0; then [begin, end) indexes order_
        int axis = -1;
        double split = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t begin = 0;
        std::int32_t end = 0;
    };

    static constexpr int kLeafSize = 16;

    std::int32_t build(std::int32_t begin, std::int32_t end);

    PointMatrix points_;
    std::vector<std::int32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace enan
