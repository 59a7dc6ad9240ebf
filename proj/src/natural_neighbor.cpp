#include "enan/natural_neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace enan {

namespace {

// Neighbor lists are extended lazily with doubling so the round loop costs
// O(log lambda) tree queries per point instead of one per round.
void ensure_depth(const KdTree& index, std::vector<NeighborList>& lists, PointId i, int depth) {
    auto& list = lists[i];
    if (static_cast<int>(list.size()) >= depth) return;
    const int max_depth = static_cast<int>(index.point_count()) - 1;
    int target = std::max(depth, std::max(4, 2 * static_cast<int>(list.size())));
    target = std::min(target, max_depth);
    list = index.knn(index.points().row(i), target, i);
}

}  // namespace

NaturalNeighborModel compute_nane(const KdTree& index, const NanSearchOptions& opts) {
    const std::size_t m = index.point_count();
    if (m < 2) throw std::invalid_argument("compute_nane: need at least two points");

    const int round_limit = std::min<int>(opts.max_lambda, static_cast<int>(m) - 1);

    NaturalNeighborModel model;
    model.nan_sets.assign(m, {});
    model.nan_counts.assign(m, 0);
    model.knn_lists.assign(m, {});

    std::vector<std::unordered_set<PointId>> reached(m);  // first r neighbors of each point
    std::size_t zero_count = m;
    int unchanged_streak = 0;
    int r = 0;
    bool stabilized = false;

    while (r < round_limit && !stabilized) {
        ++r;
        for (std::size_t i = 0; i < m; ++i) {
            const PointId pi = static_cast<PointId>(i);
            ensure_depth(index, model.knn_lists, pi, r);
            const PointId pj = model.knn_lists[i][r - 1].id;
            reached[i].insert(pj);
            // mutual as soon as both directed edges exist
            if (reached[pj].count(pi)) {
                if (model.nan_counts[i]++ == 0) --zero_count;
                if (model.nan_counts[pj]++ == 0) --zero_count;
                model.nan_sets[i].push_back(pj);
                model.nan_sets[pj].push_back(pi);
            }
        }
        if (!model.rounds_log.empty() &&
            static_cast<std::int32_t>(zero_count) == model.rounds_log.back()) {
            ++unchanged_streak;
        } else {
            unchanged_streak = 0;
        }
        model.rounds_log.push_back(static_cast<std::int32_t>(zero_count));
        if (zero_count == 0) {
            stabilized = true;
        } else if (!opts.require_full_coverage) {
            const int window = opts.stability_window > 0
                                   ? opts.stability_window
                                   : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(r))));
            if (unchanged_streak >= window) stabilized = true;
        }
    }

    model.lambda = r;
    model.lambda_capped = !stabilized && opts.max_lambda < static_cast<int>(m) - 1;

    for (std::size_t i = 0; i < m; ++i) {
        ensure_depth(index, model.knn_lists, static_cast<PointId>(i), model.lambda);
        model.knn_lists[i].resize(static_cast<std::size_t>(model.lambda));
        std::sort(model.nan_sets[i].begin(), model.nan_sets[i].end());
    }
    return model;
}

int num_natural_neighbors_from_distances(const NaturalNeighborModel& model,
                                         std::span<const double> dist, QueryNanMode mode) {
    const std::size_t m = model.size();
    const int lambda = model.lambda;
    auto would_enter = [&](PointId j) {
        // strict: on a distance tie the existing training neighbor keeps
        // its slot (the query's notional id is highest)
        return dist[j] < model.knn_lists[j].back().distance;
    };

    if (mode == QueryNanMode::OneDirectional) {
        int count = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (would_enter(static_cast<PointId>(j))) ++count;
        return std::min(count, lambda);
    }

    // mutual: restrict to the query's lambda nearest training points
    std::vector<PointId> ids(m);
    std::iota(ids.begin(), ids.end(), 0);
    auto closer = [&](PointId a, PointId b) {
        return neighbor_before(dist[a], a, dist[b], b);
    };
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(lambda), m);
    std::nth_element(ids.begin(), ids.begin() + take - 1, ids.end(), closer);

    int count = 0;
    for (std::size_t t = 0; t < take; ++t)
        if (would_enter(ids[t])) ++count;
    return count;
}

int num_natural_neighbors(const NaturalNeighborModel& model, const KdTree& index,
                          std::span<const double> query, QueryNanMode mode) {
    if (query.size() != index.dimension())
        throw std::invalid_argument("num_natural_neighbors: query dimension mismatch");
    if (model.size() != index.point_count())
        throw std::invalid_argument("num_natural_neighbors: model/index size mismatch");
    std::vector<double> dist(index.point_count());
    for (std::size_t j = 0; j < index.point_count(); ++j)
        dist[j] = euclidean(query, index.points().row(j));
    return num_natural_neighbors_from_distances(model, dist, mode);
}

}  // namespace enan
