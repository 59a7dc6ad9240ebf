#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "enan/dataset.hpp"
#include "enan/kdtree.hpp"
#include "enan/natural_neighbor.hpp"

namespace enan {

// Per-training-point nearest-neighbor adjacency up to k_max, with class
// labels attached. Lists have length exactly min(k_max, m-1) and carry true
// Euclidean edge weights.
struct WeightedKnnGraph {
    std::vector<NeighborList> neighbors;
    std::vector<ClassId> labels;
    int k_max = 0;

    std::size_t size() const { return neighbors.size(); }
    double kth_distance(PointId i, int k) const { return neighbors[i][k - 1].distance; }
};

WeightedKnnGraph build_knn_graph(const KdTree& index, std::span<const ClassId> labels, int k);

// Reuses the lambda-deep lists the natural-neighbor search already holds.
WeightedKnnGraph graph_from_nan_model(const NaturalNeighborModel& nan,
                                      std::span<const ClassId> labels);

// 1 iff point i and its r-th nearest neighbor (1-based) share a class.
int indicator(const WeightedKnnGraph& g, PointId i, int r);

// Class-wise statistic machinery. prefix_hits[i][r-1] counts same-class
// neighbors of i within rank r; the per-class cumulative tables make the
// statistic at any k <= k_max an O(1) lookup.
struct ClasswiseStats {
    std::vector<std::vector<std::int32_t>> prefix_hits;
    std::vector<std::vector<std::int64_t>> class_hits;  // [c][k-1]: sum of prefix_hits over class c
    std::vector<std::vector<std::int64_t>> class_len;   // [c][k-1]: sum of min(k, list length)
    std::vector<std::int32_t> class_sizes;
    int k_max = 0;

    ClassId num_classes() const { return static_cast<ClassId>(class_sizes.size()); }
};

ClasswiseStats compute_stats(const WeightedKnnGraph& g, ClassId num_classes);

// The fraction, over each class's members and ranks 1..k, of neighbors
// sharing the member's class. Values lie in [0, 1].
std::vector<double> classwise_statistic(const ClasswiseStats& stats, int k);

enum class ZeroNanFallback {
    Lambda,  // queries with no natural neighbors fall back to k = lambda
    One,
};

struct PredictOptions {
    ZeroNanFallback fallback = ZeroNanFallback::Lambda;
    QueryNanMode nan_mode = QueryNanMode::Mutual;
    // Subtract the training-time statistic at lambda instead of the
    // statistic at the query's k. Shifts reported scores by a constant per
    // query; the predicted label is unaffected.
    bool base_at_lambda = false;
    bool parallel = true;  // batch prediction uses OpenMP when available
};

struct EnanModel {
    Dataset train;
    NaturalNeighborModel nan;
    WeightedKnnGraph graph;
    ClasswiseStats stats;
    std::vector<double> training_T;  // statistic at k = lambda
    std::optional<MinMaxScale> scale;

    int lambda() const { return nan.lambda; }
};

struct EnnFixedModel {
    Dataset train;
    WeightedKnnGraph graph;
    ClasswiseStats stats;
    std::vector<double> training_T;  // statistic at k
    int k = 0;
    std::optional<MinMaxScale> scale;
};

EnanModel train_enan(Dataset ds, const NanSearchOptions& opts = {});
EnnFixedModel train_enn_fixed(Dataset ds, int k);

// k = max(1, floor(sqrt(m))) for the sqrt-of-training-size column.
int sqrt_rule_k(std::size_t train_size);

// Membership-assumption rule: assume the query in each class in turn,
// update the class-wise statistics incrementally (only the query's own
// neighbor row and the training points whose k-NN lists the query enters
// change), and pick the class with the largest aggregate statistic shift.
// Ties break to the lowest class id.
ClassId enn_predict(const EnanModel& model, std::span<const double> z, int k);
ClassId enn_predict(const EnnFixedModel& model, std::span<const double> z);

// Per-class statistics with z assumed in class `assumed`, at neighborhood
// size k. Exposed for auditing; enn_predict maximizes their aggregate.
std::vector<double> classwise_statistic_with_query(const EnanModel& model,
                                                   std::span<const double> z, ClassId assumed,
                                                   int k);

std::vector<ClassId> predict_enan(const EnanModel& model, const PointMatrix& queries,
                                  const PredictOptions& opts = {},
                                  std::vector<int>* k_used = nullptr);
std::vector<ClassId> predict_enn_fixed(const EnnFixedModel& model, const PointMatrix& queries,
                                       const PredictOptions& opts = {});

// Plain majority vote among the k nearest training points.
ClassId knn_classify(const KdTree& index, std::span<const ClassId> labels, ClassId num_classes,
                     std::span<const double> z, int k);
std::vector<ClassId> knn_classify_batch(const KdTree& index, std::span<const ClassId> labels,
                                        ClassId num_classes, const PointMatrix& queries, int k,
                                        const PredictOptions& opts = {});

// Versioned JSON dump sufficient to reload and predict without retraining.
void save_model(const EnanModel& model, const std::string& path);
void save_model(const EnnFixedModel& model, const std::string& path);
using AnyModel = std::variant<EnanModel, EnnFixedModel>;
AnyModel load_model(const std::string& path);

}  // namespace enan
