#include "enan/classification.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace enan {

WeightedKnnGraph build_knn_graph(const KdTree& index, std::span<const ClassId> labels, int k) {
    if (k < 1) throw std::invalid_argument("build_knn_graph: k must be >= 1");
    const std::size_t m = index.point_count();
    WeightedKnnGraph g;
    g.k_max = std::min<int>(k, static_cast<int>(m) - 1);
    g.labels.assign(labels.begin(), labels.end());
    g.neighbors.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        g.neighbors[i] = index.knn(index.points().row(i), g.k_max, static_cast<PointId>(i));
    return g;
}

WeightedKnnGraph graph_from_nan_model(const NaturalNeighborModel& nan,
                                      std::span<const ClassId> labels) {
    WeightedKnnGraph g;
    g.k_max = nan.lambda;
    g.labels.assign(labels.begin(), labels.end());
    g.neighbors = nan.knn_lists;
    return g;
}

int indicator(const WeightedKnnGraph& g, PointId i, int r) {
    if (r < 1 || r > static_cast<int>(g.neighbors[i].size()))
        throw std::out_of_range("indicator: rank out of range");
    return g.labels[g.neighbors[i][r - 1].id] == g.labels[i] ? 1 : 0;
}

ClasswiseStats compute_stats(const WeightedKnnGraph& g, ClassId num_classes) {
    const std::size_t m = g.size();
    ClasswiseStats s;
    s.k_max = g.k_max;
    s.class_sizes.assign(num_classes, 0);
    s.class_hits.assign(num_classes, std::vector<std::int64_t>(g.k_max, 0));
    s.class_len.assign(num_classes, std::vector<std::int64_t>(g.k_max, 0));
    s.prefix_hits.resize(m);

    for (std::size_t i = 0; i < m; ++i) {
        const ClassId c = g.labels[i];
        ++s.class_sizes[c];
        const auto& nbrs = g.neighbors[i];
        auto& pref = s.prefix_hits[i];
        pref.resize(nbrs.size());
        std::int32_t acc = 0;
        for (std::size_t r = 0; r < nbrs.size(); ++r) {
            acc += (g.labels[nbrs[r].id] == c) ? 1 : 0;
            pref[r] = acc;
        }
        for (int k = 1; k <= g.k_max; ++k) {
            const int take = std::min<int>(k, static_cast<int>(nbrs.size()));
            s.class_hits[c][k - 1] += take > 0 ? pref[take - 1] : 0;
            s.class_len[c][k - 1] += take;
        }
    }
    return s;
}

std::vector<double> classwise_statistic(const ClasswiseStats& stats, int k) {
    if (k < 1 || k > stats.k_max)
        throw std::out_of_range("classwise_statistic: k out of range");
    std::vector<double> t(stats.class_sizes.size());
    for (std::size_t c = 0; c < t.size(); ++c)
        t[c] = static_cast<double>(stats.class_hits[c][k - 1]) /
               static_cast<double>(stats.class_len[c][k - 1]);
    return t;
}

int sqrt_rule_k(std::size_t train_size) {
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(train_size)))));
}

namespace {

// Reused per-query buffers; each prediction thread owns one.
struct PredictScratch {
    std::vector<double> dist;
    std::vector<PointId> order;
    std::vector<std::int32_t> z_hits;    // per class: z's same-class neighbors within k
    std::vector<std::int32_t> adj_gain;  // per class: affected points (z joins their list)
    std::vector<std::int32_t> adj_lost;  // per class: rank-k hits those points lose
};

struct EnnCoreView {
    const PointMatrix& points;
    const WeightedKnnGraph& graph;
    const ClasswiseStats& stats;
};

void fill_distances(const PointMatrix& points, std::span<const double> z,
                    std::vector<double>& dist) {
    dist.resize(points.rows());
    for (std::size_t j = 0; j < points.rows(); ++j)
        dist[j] = euclidean(z, points.row(j));
}

// Aggregate statistic shift for one assumed class, written into t_out when
// non-null. Integer numerators keep the incremental path exact.
double assumed_class_score(const EnnCoreView& v, const PredictScratch& s, ClassId assumed, int k,
                           std::span<const double> base, std::vector<double>* t_out) {
    const ClassId C = v.stats.num_classes();
    double score = 0.0;
    for (ClassId c = 0; c < C; ++c) {
        std::int64_t num = v.stats.class_hits[c][k - 1] - s.adj_lost[c];
        std::int64_t den = v.stats.class_len[c][k - 1];
        if (c == assumed) {
            num += s.adj_gain[c] + s.z_hits[c];
            den += k;
        }
        const double t = static_cast<double>(num) / static_cast<double>(den);
        if (t_out) (*t_out)[c] = t;
        score += t - base[c];
    }
    return score;
}

// Tallies everything that changes when the query joins the training set at
// neighborhood size k. dist must already hold the query's distances to
// every training point.
void prepare_query_tallies(const EnnCoreView& v, int k, PredictScratch& s) {
    const std::size_t m = v.points.rows();
    const ClassId C = v.stats.num_classes();

    // z's own neighbor row: class counts among its k nearest training points
    s.order.resize(m);
    std::iota(s.order.begin(), s.order.end(), 0);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), m);
    std::nth_element(s.order.begin(), s.order.begin() + take - 1, s.order.end(),
                     [&](PointId a, PointId b) {
                         return neighbor_before(s.dist[a], a, s.dist[b], b);
                     });
    s.z_hits.assign(C, 0);
    for (std::size_t t = 0; t < take; ++t) ++s.z_hits[v.graph.labels[s.order[t]]];

    // training points whose k-NN list z enters (strict: z loses ties)
    s.adj_gain.assign(C, 0);
    s.adj_lost.assign(C, 0);
    for (std::size_t j = 0; j < m; ++j) {
        if (s.dist[j] < v.graph.kth_distance(static_cast<PointId>(j), k)) {
            const ClassId c = v.graph.labels[j];
            ++s.adj_gain[c];
            const auto& pref = v.stats.prefix_hits[j];
            s.adj_lost[c] += pref[k - 1] - (k >= 2 ? pref[k - 2] : 0);
        }
    }
}

// One membership-assumption prediction.
ClassId enn_predict_core(const EnnCoreView& v, int k, PredictScratch& s,
                         std::span<const double> base) {
    prepare_query_tallies(v, k, s);
    ClassId best = 0;
    double best_score = assumed_class_score(v, s, 0, k, base, nullptr);
    for (ClassId j = 1; j < v.stats.num_classes(); ++j) {
        const double score = assumed_class_score(v, s, j, k, base, nullptr);
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

ClassId predict_fixed_one(const EnnFixedModel& model, std::span<const double> z,
                          PredictScratch& s) {
    EnnCoreView v{model.train.points, model.graph, model.stats};
    fill_distances(model.train.points, z, s.dist);
    const auto base = classwise_statistic(model.stats, model.k);
    return enn_predict_core(v, model.k, s, base);
}

ClassId predict_enan_one(const EnanModel& model, std::span<const double> z,
                         const PredictOptions& opts, PredictScratch& s, int* k_used) {
    EnnCoreView v{model.train.points, model.graph, model.stats};
    fill_distances(model.train.points, z, s.dist);
    int k = num_natural_neighbors_from_distances(model.nan, s.dist, opts.nan_mode);
    if (k == 0) k = opts.fallback == ZeroNanFallback::Lambda ? model.lambda() : 1;
    if (k_used) *k_used = k;
    const auto base =
        opts.base_at_lambda ? model.training_T : classwise_statistic(model.stats, k);
    return enn_predict_core(v, k, s, base);
}

void check_query_dim(std::size_t query_dim, std::size_t model_dim, const char* what) {
    if (query_dim != model_dim)
        throw std::invalid_argument(std::string(what) + ": query dimension mismatch");
}

}  // namespace

EnanModel train_enan(Dataset ds, const NanSearchOptions& opts) {
    EnanModel model;
    KdTree index(ds.points);
    model.nan = compute_nane(index, opts);
    model.graph = graph_from_nan_model(model.nan, ds.labels);
    model.stats = compute_stats(model.graph, ds.num_classes());
    model.training_T = classwise_statistic(model.stats, model.nan.lambda);
    model.train = std::move(ds);
    return model;
}

EnnFixedModel train_enn_fixed(Dataset ds, int k) {
    if (k < 1 || k >= static_cast<int>(ds.size()))
        throw std::invalid_argument("train_enn_fixed: need 1 <= k < training size");
    EnnFixedModel model;
    KdTree index(ds.points);
    model.graph = build_knn_graph(index, ds.labels, k);
    model.stats = compute_stats(model.graph, ds.num_classes());
    model.training_T = classwise_statistic(model.stats, k);
    model.k = k;
    model.train = std::move(ds);
    return model;
}

ClassId enn_predict(const EnanModel& model, std::span<const double> z, int k) {
    check_query_dim(z.size(), model.train.dimension(), "enn_predict");
    if (k < 1 || k > model.graph.k_max)
        throw std::out_of_range("enn_predict: k out of range for model graph");
    PredictScratch s;
    EnnCoreView v{model.train.points, model.graph, model.stats};
    fill_distances(model.train.points, z, s.dist);
    const auto base = classwise_statistic(model.stats, k);
    return enn_predict_core(v, k, s, base);
}

ClassId enn_predict(const EnnFixedModel& model, std::span<const double> z) {
    check_query_dim(z.size(), model.train.dimension(), "enn_predict");
    PredictScratch s;
    return predict_fixed_one(model, z, s);
}

std::vector<double> classwise_statistic_with_query(const EnanModel& model,
                                                   std::span<const double> z, ClassId assumed,
                                                   int k) {
    check_query_dim(z.size(), model.train.dimension(), "classwise_statistic_with_query");
    if (assumed < 0 || assumed >= model.train.num_classes())
        throw std::out_of_range("classwise_statistic_with_query: assumed class out of range");
    if (k < 1 || k > model.graph.k_max)
        throw std::out_of_range("classwise_statistic_with_query: k out of range");
    PredictScratch s;
    EnnCoreView v{model.train.points, model.graph, model.stats};
    fill_distances(model.train.points, z, s.dist);
    prepare_query_tallies(v, k, s);
    std::vector<double> base(model.train.num_classes(), 0.0);
    std::vector<double> t(model.train.num_classes(), 0.0);
    assumed_class_score(v, s, assumed, k, base, &t);
    return t;
}

std::vector<ClassId> predict_enan(const EnanModel& model, const PointMatrix& queries,
                                  const PredictOptions& opts, std::vector<int>* k_used) {
    check_query_dim(queries.cols(), model.train.dimension(), "predict_enan");
    const std::size_t n = queries.rows();
    std::vector<ClassId> out(n);
    if (k_used) k_used->assign(n, 0);

#ifdef _OPENMP
    if (opts.parallel) {
#pragma omp parallel
        {
            PredictScratch s;
#pragma omp for schedule(dynamic, 16)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
                out[i] = predict_enan_one(model, queries.row(i), opts, s,
                                          k_used ? &(*k_used)[i] : nullptr);
        }
        return out;
    }
#endif
    PredictScratch s;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = predict_enan_one(model, queries.row(i), opts, s,
                                  k_used ? &(*k_used)[i] : nullptr);
    return out;
}

std::vector<ClassId> predict_enn_fixed(const EnnFixedModel& model, const PointMatrix& queries,
                                       const PredictOptions& opts) {
    check_query_dim(queries.cols(), model.train.dimension(), "predict_enn_fixed");
    const std::size_t n = queries.rows();
    std::vector<ClassId> out(n);

#ifdef _OPENMP
    if (opts.parallel) {
#pragma omp parallel
        {
            PredictScratch s;
#pragma omp for schedule(dynamic, 16)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
                out[i] = predict_fixed_one(model, queries.row(i), s);
        }
        return out;
    }
#endif
    PredictScratch s;
    for (std::size_t i = 0; i < n; ++i) out[i] = predict_fixed_one(model, queries.row(i), s);
    return out;
}

ClassId knn_classify(const KdTree& index, std::span<const ClassId> labels, ClassId num_classes,
                     std::span<const double> z, int k) {
    check_query_dim(z.size(), index.dimension(), "knn_classify");
    if (k < 1 || k > static_cast<int>(index.point_count()))
        throw std::invalid_argument("knn_classify: need 1 <= k <= training size");
    const NeighborList nn = index.knn(z, k);
    std::vector<int> votes(num_classes, 0);
    for (const auto& nb : nn) ++votes[labels[nb.id]];
    return static_cast<ClassId>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
}

namespace {

using nlohmann::json;

json graph_to_json(const WeightedKnnGraph& g) {
    json ids = json::array();
    json dists = json::array();
    for (const auto& list : g.neighbors) {
        json row_ids = json::array();
        json row_d = json::array();
        for (const auto& nb : list) {
            row_ids.push_back(nb.id);
            row_d.push_back(nb.distance);
        }
        ids.push_back(std::move(row_ids));
        dists.push_back(std::move(row_d));
    }
    return json{{"k_max", g.k_max}, {"neighbor_ids", std::move(ids)},
                {"neighbor_dists", std::move(dists)}};
}

json common_to_json(const Dataset& train, const WeightedKnnGraph& graph,
                    const ClasswiseStats& stats, const std::optional<MinMaxScale>& scale) {
    json points = json::array();
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto row = train.points.row(i);
        points.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json j{{"format", "enan-model"},
           {"version", 1},
           {"name", train.name},
           {"classes", train.class_names},
           {"labels", train.labels},
           {"points", std::move(points)},
           {"graph", graph_to_json(graph)},
           {"prefix_hits", stats.prefix_hits}};
    if (scale) {
        j["scale_min"] = scale->min;
        j["scale_max"] = scale->max;
    }
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump() << '\n';
}

struct CommonParts {
    Dataset train;
    WeightedKnnGraph graph;
    ClasswiseStats stats;
    std::optional<MinMaxScale> scale;
};

ClasswiseStats stats_from_prefix(const WeightedKnnGraph& g,
                                 std::vector<std::vector<std::int32_t>> prefix_hits,
                                 ClassId num_classes) {
    ClasswiseStats s;
    s.k_max = g.k_max;
    s.prefix_hits = std::move(prefix_hits);
    s.class_sizes.assign(num_classes, 0);
    s.class_hits.assign(num_classes, std::vector<std::int64_t>(g.k_max, 0));
    s.class_len.assign(num_classes, std::vector<std::int64_t>(g.k_max, 0));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const ClassId c = g.labels[i];
        ++s.class_sizes[c];
        const auto& pref = s.prefix_hits[i];
        for (int k = 1; k <= g.k_max; ++k) {
            const int take = std::min<int>(k, static_cast<int>(pref.size()));
            s.class_hits[c][k - 1] += take > 0 ? pref[take - 1] : 0;
            s.class_len[c][k - 1] += take;
        }
    }
    return s;
}

CommonParts common_from_json(const json& j) {
    CommonParts p;
    p.train.name = j.at("name").get<std::string>();
    p.train.class_names = j.at("classes").get<std::vector<std::string>>();
    p.train.labels = j.at("labels").get<std::vector<ClassId>>();

    const auto& pts = j.at("points");
    const std::size_t m = pts.size();
    const std::size_t d = m > 0 ? pts.at(0).size() : 0;
    p.train.points = PointMatrix(m, d);
    for (std::size_t i = 0; i < m; ++i) {
        auto row = pts.at(i).get<std::vector<double>>();
        std::copy(row.begin(), row.end(), p.train.points.row(i).begin());
    }

    const auto& gj = j.at("graph");
    p.graph.k_max = gj.at("k_max").get<int>();
    p.graph.labels = p.train.labels;
    const auto& ids = gj.at("neighbor_ids");
    const auto& dists = gj.at("neighbor_dists");
    p.graph.neighbors.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row_ids = ids.at(i);
        const auto& row_d = dists.at(i);
        p.graph.neighbors[i].resize(row_ids.size());
        for (std::size_t r = 0; r < row_ids.size(); ++r)
            p.graph.neighbors[i][r] = {row_ids.at(r).get<PointId>(),
                                       row_d.at(r).get<double>()};
    }

    p.stats = stats_from_prefix(p.graph,
                                j.at("prefix_hits").get<std::vector<std::vector<std::int32_t>>>(),
                                p.train.num_classes());
    if (j.contains("scale_min")) {
        MinMaxScale s;
        s.min = j.at("scale_min").get<std::vector<double>>();
        s.max = j.at("scale_max").get<std::vector<double>>();
        p.scale = std::move(s);
    }
    return p;
}

}  // namespace

void save_model(const EnanModel& model, const std::string& path) {
    json j = common_to_json(model.train, model.graph, model.stats, model.scale);
    j["kind"] = "enan";
    j["lambda"] = model.nan.lambda;
    j["lambda_capped"] = model.nan.lambda_capped;
    j["nan_counts"] = model.nan.nan_counts;
    j["nan_sets"] = model.nan.nan_sets;
    j["rounds_log"] = model.nan.rounds_log;
    write_json(j, path);
}

void save_model(const EnnFixedModel& model, const std::string& path) {
    json j = common_to_json(model.train, model.graph, model.stats, model.scale);
    j["kind"] = "enn-fixed";
    j["k"] = model.k;
    write_json(j, path);
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    in >> j;
    if (j.value("format", "") != "enan-model")
        throw std::runtime_error("not a model file: " + path);
    if (j.value("version", 0) != 1)
        throw std::runtime_error("unsupported model version in " + path);

    CommonParts p = common_from_json(j);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "enan") {
        EnanModel model;
        model.train = std::move(p.train);
        model.graph = std::move(p.graph);
        model.stats = std::move(p.stats);
        model.scale = std::move(p.scale);
        model.nan.lambda = j.at("lambda").get<int>();
        model.nan.lambda_capped = j.at("lambda_capped").get<bool>();
        model.nan.nan_counts = j.at("nan_counts").get<std::vector<std::int32_t>>();
        model.nan.nan_sets = j.at("nan_sets").get<std::vector<std::vector<PointId>>>();
        model.nan.rounds_log = j.at("rounds_log").get<std::vector<std::int32_t>>();
        model.nan.knn_lists = model.graph.neighbors;  // identical by construction
        model.training_T = classwise_statistic(model.stats, model.nan.lambda);
        return model;
    }
    if (kind == "enn-fixed") {
        EnnFixedModel model;
        model.train = std::move(p.train);
        model.graph = std::move(p.graph);
        model.stats = std::move(p.stats);
        model.scale = std::move(p.scale);
        model.k = j.at("k").get<int>();
        model.training_T = classwise_statistic(model.stats, model.k);
        return model;
    }
    throw std::runtime_error("unknown model kind '" + kind + "' in " + path);
}

std::vector<ClassId> knn_classify_batch(const KdTree& index, std::span<const ClassId> labels,
                                        ClassId num_classes, const PointMatrix& queries, int k,
                                        const PredictOptions& opts) {
    check_query_dim(queries.cols(), index.dimension(), "knn_classify_batch");
    const std::size_t n = queries.rows();
    std::vector<ClassId> out(n);

#ifdef _OPENMP
    if (opts.parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            out[i] = knn_classify(index, labels, num_classes, queries.row(i), k);
        return out;
    }
#endif
    for (std::size_t i = 0; i < n; ++i)
        out[i] = knn_classify(index, labels, num_classes, queries.row(i), k);
    return out;
}

}  // namespace enan
