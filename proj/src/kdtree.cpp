#include "enan/kdtree.hpp"

#include <algorithm>
#include <queue>

namespace enan {

KdTree::KdTree(PointMatrix points) : points_(std::move(points)) {
    if (points_.rows() == 0) throw std::invalid_argument("KdTree: empty point set");
    if (points_.cols() == 0) throw std::invalid_argument("KdTree: zero-dimensional points");
    order_.resize(points_.rows());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::int32_t>(i);
    nodes_.reserve(2 * points_.rows() / kLeafSize + 2);
    root_ = build(0, static_cast<std::int32_t>(points_.rows()));
}

std::int32_t KdTree::build(std::int32_t begin, std::int32_t end) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();

    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    // split on the widest-spread axis; all-coincident blocks become leaves
    int axis = -1;
    double best_spread = 0.0;
    for (std::size_t a = 0; a < points_.cols(); ++a) {
        double lo = points_(order_[begin], a), hi = lo;
        for (std::int32_t i = begin + 1; i < end; ++i) {
            const double v = points_(order_[i], a);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = static_cast<int>(a);
        }
    }
    if (axis < 0) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    const std::int32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::int32_t a, std::int32_t b) {
                         return points_(a, axis) < points_(b, axis);
                     });

    nodes_[id].axis = axis;
    nodes_[id].split = points_(order_[mid], static_cast<std::size_t>(axis));
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

namespace {

struct WorstFirst {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        return neighbor_before(a.distance, a.id, b.distance, b.id);
    }
};

// top() is the worst kept candidate under (distance, id) order
using CandidateHeap = std::priority_queue<Neighbor, std::vector<Neighbor>, WorstFirst>;

}  // namespace

NeighborList KdTree::knn(std::span<const double> query, int k, PointId exclude) const {
    if (query.size() != points_.cols())
        throw std::invalid_argument("KdTree::knn: query dimension mismatch");
    if (k < 1) throw std::invalid_argument("KdTree::knn: k must be >= 1");

    const std::size_t want = static_cast<std::size_t>(k);
    CandidateHeap heap;

    auto visit = [&](auto&& self, std::int32_t node_id) -> void {
        const Node& node = nodes_[node_id];
        if (node.axis < 0) {
            for (std::int32_t i = node.begin; i < node.end; ++i) {
                const PointId pid = order_[i];
                if (pid == exclude) continue;
                const double d = euclidean(query, points_.row(pid));
                if (heap.size() < want) {
                    heap.push({pid, d});
                } else if (neighbor_before(d, pid, heap.top().distance, heap.top().id)) {
                    heap.pop();
                    heap.push({pid, d});
                }
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        self(self, near);
        // points beyond the split plane are at least |diff| away; equality
        // must still descend so id ties resolve exactly
        if (heap.size() < want || std::abs(diff) <= heap.top().distance) self(self, far);
    };
    visit(visit, root_);

    NeighborList out(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        out[i] = heap.top();
        heap.pop();
    }
    return out;
}

Neighbor KdTree::rth_neighbor(std::span<const double> query, int r, PointId exclude) const {
    if (r < 1) throw std::invalid_argument("KdTree::rth_neighbor: r must be >= 1");
    NeighborList nn = knn(query, r, exclude);
    if (static_cast<int>(nn.size()) < r)
        throw std::out_of_range("KdTree::rth_neighbor: r exceeds available candidates");
    return nn.back();
}

}  // namespace enan
