#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "enan/classification.hpp"
#include "reference/reference.hpp"
#include "testutil.hpp"

using namespace enan;
using testutil::from_rows;
using testutil::gaussian_pair;
using testutil::random_points;

TEST_CASE("indicator is 1 everywhere on single-class data") {
    auto ds = from_rows({{0}, {1}, {2}, {5}}, {0, 0, 0, 0}, 1);
    KdTree tree(ds.points);
    auto g = build_knn_graph(tree, ds.labels, 3);
    for (PointId i = 0; i < 4; ++i)
        for (int r = 1; r <= 3; ++r) CHECK(indicator(g, i, r) == 1);
}

TEST_CASE("indicator is 0 for an opposite-class nearest neighbor") {
    auto ds = from_rows({{0}, {1}}, {0, 1}, 2);
    KdTree tree(ds.points);
    auto g = build_knn_graph(tree, ds.labels, 1);
    CHECK(indicator(g, 0, 1) == 0);
    CHECK(indicator(g, 1, 1) == 0);
    CHECK_THROWS_AS(indicator(g, 0, 2), std::out_of_range);
}

TEST_CASE("indicator table on an eight-point line matches the hand evaluation") {
    // classes a a a a | b b b b at unit spacing. Neighbor orders (ties to
    // the lower id): 0:[1,2,3] 1:[0,2,3] 2:[1,3,0] 3:[2,4,1] 4:[3,5,2]
    // 5:[4,6,3] 6:[5,7,4] 7:[6,5,4]
    auto ds = from_rows({{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}},
                        {0, 0, 0, 0, 1, 1, 1, 1}, 2);
    KdTree tree(ds.points);
    auto g = build_knn_graph(tree, ds.labels, 3);
    const int expected[8][3] = {
        {1, 1, 1},
        {1, 1, 1},
        {1, 1, 1},
        {1, 0, 1},
        {0, 1, 0},
        {1, 1, 0},
        {1, 1, 1},
        {1, 1, 1},
    };
    for (PointId i = 0; i < 8; ++i)
        for (int r = 1; r <= 3; ++r) CHECK(indicator(g, i, r) == expected[i][r - 1]);
}

TEST_CASE("classwise statistic saturates at 1 on single-class data") {
    auto ds = from_rows({{0}, {1}, {2}, {4}}, {0, 0, 0, 0}, 1);
    KdTree tree(ds.points);
    auto stats = compute_stats(build_knn_graph(tree, ds.labels, 3), 1);
    for (int k = 1; k <= 3; ++k) {
        auto t = classwise_statistic(stats, k);
        REQUIRE(t.size() == 1);
        CHECK(t[0] == 1.0);
    }
}

TEST_CASE("classwise statistic is 0 when every nearest neighbor crosses class") {
    auto ds = from_rows({{0}, {1}}, {0, 1}, 2);
    KdTree tree(ds.points);
    auto stats = compute_stats(build_knn_graph(tree, ds.labels, 1), 2);
    auto t = classwise_statistic(stats, 1);
    CHECK(t == std::vector<double>{0.0, 0.0});
}

TEST_CASE("classwise statistic equals the direct double sum") {
    auto ds = from_rows({{0, 0}, {1, 0}, {0, 1}, {4, 4}, {5, 4}, {4, 5}},
                        {0, 0, 1, 1, 0, 1}, 2);
    KdTree tree(ds.points);
    auto stats = compute_stats(build_knn_graph(tree, ds.labels, 2), 2);
    auto got = classwise_statistic(stats, 2);
    auto want = ref::classwise_statistic_direct(ds.points, ds.labels, 2, 2);
    REQUIRE(got.size() == want.size());
    for (std::size_t c = 0; c < got.size(); ++c)
        CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-12));
}

TEST_CASE("classwise statistic stays in [0,1] and matches the oracle on random data") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        auto ds = testutil::random_dataset(rng, 10 + rng() % 80, 1 + rng() % 4,
                                           1 + static_cast<ClassId>(rng() % 3));
        KdTree tree(ds.points);
        const int kmax = 1 + static_cast<int>(rng() % std::min<std::size_t>(8, ds.size() - 1));
        auto stats = compute_stats(build_knn_graph(tree, ds.labels, kmax), ds.num_classes());
        for (int k = 1; k <= kmax; ++k) {
            auto got = classwise_statistic(stats, k);
            auto want = ref::classwise_statistic_direct(ds.points, ds.labels,
                                                        ds.num_classes(), k);
            for (std::size_t c = 0; c < got.size(); ++c) {
                CHECK(got[c] >= 0.0);
                CHECK(got[c] <= 1.0);
                CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("statistic concentrates near 1/C on label-shuffled data") {
    std::mt19937_64 rng(67);
    auto ds = testutil::random_dataset(rng, 2000, 3, 2);
    // rebalance labels exactly then shuffle assignment
    for (std::size_t i = 0; i < ds.size(); ++i) ds.labels[i] = i % 2;
    for (std::size_t i = ds.size(); i > 1; --i) std::swap(ds.labels[i - 1], ds.labels[rng() % i]);
    KdTree tree(ds.points);
    auto stats = compute_stats(build_knn_graph(tree, ds.labels, 8), 2);
    for (double t : classwise_statistic(stats, 8)) CHECK(t == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("single-class training forces the prediction") {
    auto ds = from_rows({{0.0}, {1.0}, {2.0}}, {0, 0, 0}, 1);
    auto model = train_enan(ds);
    const double q = 77.0;
    CHECK(enn_predict(model, std::span(&q, 1), 1) == 0);
    auto labels = predict_enan(model, testutil::matrix_1d({-5.0, 0.5, 99.0}));
    CHECK(labels == std::vector<ClassId>{0, 0, 0});
}

TEST_CASE("two cross-class points: lambda 1, one edge each way, zero statistic") {
    auto ds = from_rows({{0.0}, {1.0}}, {0, 1}, 2);
    auto model = train_enan(ds);
    CHECK(model.lambda() == 1);
    CHECK(model.graph.k_max == 1);
    CHECK(model.graph.neighbors[0].size() == 1);
    CHECK(model.graph.neighbors[0][0].id == 1);
    CHECK(model.graph.neighbors[1][0].id == 0);
    CHECK(model.training_T == std::vector<double>{0.0, 0.0});
}

TEST_CASE("two same-class points: statistic saturates") {
    auto ds = from_rows({{0.0}, {1.0}}, {0, 0}, 1);
    auto model = train_enan(ds);
    CHECK(model.training_T == std::vector<double>{1.0});
    auto fixed = train_enn_fixed(ds, 1);
    CHECK(fixed.training_T == std::vector<double>{1.0});
}

TEST_CASE("deep-interior query lands in its cluster") {
    std::mt19937_64 rng(71);
    auto ds = gaussian_pair(rng, 40, 2, 10.0);
    auto model = train_enan(ds);
    // query on top of training point 5 (class 0, interior by construction)
    std::vector<double> q(ds.points.row(5).begin(), ds.points.row(5).end());
    CHECK(enn_predict(model, q, 3) == 0);
    PointMatrix queries(1, 2);
    std::copy(q.begin(), q.end(), queries.row(0).begin());
    CHECK(predict_enan(model, queries)[0] == 0);
}

TEST_CASE("membership-assumption predictions equal the physical-insertion oracle") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 10; ++trial) {
        auto ds = testutil::random_dataset(rng, 12, 2, 2);
        auto model = train_enan(ds);
        for (int q = 0; q < 5; ++q) {
            auto query = random_points(rng, 1, 2);
            for (int k = 1; k <= std::min(3, model.graph.k_max); ++k) {
                const ClassId got = enn_predict(model, query.row(0), k);
                const ClassId want = ref::enn_predict_inserted(ds.points, ds.labels,
                                                               ds.num_classes(), query.row(0), k);
                CHECK(got == want);
            }
        }
    }
}

TEST_CASE("incremental per-class statistics agree with full recomputation to 1e-9") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 15; ++trial) {
        auto ds = testutil::random_dataset(rng, 20 + rng() % 120, 1 + rng() % 4,
                                           1 + static_cast<ClassId>(rng() % 3));
        auto model = train_enan(ds);
        auto query = random_points(rng, 1, ds.dimension());
        const int k = 1 + static_cast<int>(rng() % model.graph.k_max);

        std::vector<std::vector<double>> want;
        ref::enn_predict_inserted(ds.points, ds.labels, ds.num_classes(), query.row(0), k,
                                  &want);
        for (ClassId assumed = 0; assumed < ds.num_classes(); ++assumed) {
            auto got = classwise_statistic_with_query(model, query.row(0), assumed, k);
            for (ClassId c = 0; c < ds.num_classes(); ++c)
                CHECK(got[c] == doctest::Approx(want[assumed][c]).epsilon(1e-9));
        }
    }
}

TEST_CASE("outlier query falls back to the lambda-sized neighborhood") {
    std::mt19937_64 rng(83);
    auto ds = gaussian_pair(rng, 30, 2, 6.0);
    auto model = train_enan(ds);
    PointMatrix far(1, 2);
    far(0, 0) = 1e5;
    far(0, 1) = -1e5;
    std::vector<int> k_used;
    auto labels = predict_enan(model, far, {}, &k_used);
    CHECK(k_used[0] == model.lambda());
    CHECK(labels[0] == enn_predict(model, far.row(0), model.lambda()));

    PredictOptions one;
    one.fallback = ZeroNanFallback::One;
    predict_enan(model, far, one, &k_used);
    CHECK(k_used[0] == 1);
}

TEST_CASE("end-to-end adaptive predictions equal the full oracle pipeline") {
    std::mt19937_64 rng(89);
    auto ds = gaussian_pair(rng, 35, 2, 7.0);
    auto model = train_enan(ds);
    auto queries = random_points(rng, 40, 2, -4.0, 11.0);

    PredictOptions serial;
    serial.parallel = false;
    auto got = predict_enan(model, queries, serial);
    auto want = ref::predict_enan_full(ds.points, ds.labels, ds.num_classes(), queries);
    CHECK(got == want);
}

TEST_CASE("adaptive k stays within [1, lambda]") {
    std::mt19937_64 rng(97);
    auto ds = gaussian_pair(rng, 50, 3, 5.0);
    auto model = train_enan(ds);
    auto queries = random_points(rng, 60, 3, -5.0, 10.0);
    std::vector<int> k_used;
    predict_enan(model, queries, {}, &k_used);
    for (int k : k_used) {
        CHECK(k >= 1);
        CHECK(k <= model.lambda());
    }
}

TEST_CASE("base statistic flag shifts scores but never the label") {
    std::mt19937_64 rng(101);
    auto ds = testutil::random_dataset(rng, 60, 2, 3);
    auto model = train_enan(ds);
    auto queries = random_points(rng, 30, 2);
    PredictOptions a, b;
    a.parallel = b.parallel = false;
    b.base_at_lambda = true;
    CHECK(predict_enan(model, queries, a) == predict_enan(model, queries, b));
}

TEST_CASE("parallel batch prediction matches the serial loop") {
    std::mt19937_64 rng(103);
    auto ds = testutil::random_dataset(rng, 150, 3, 3);
    auto model = train_enan(ds);
    auto queries = random_points(rng, 200, 3);
    PredictOptions serial, parallel;
    serial.parallel = false;
    parallel.parallel = true;
    std::vector<int> k_serial, k_parallel;
    auto a = predict_enan(model, queries, serial, &k_serial);
    auto b = predict_enan(model, queries, parallel, &k_parallel);
    CHECK(a == b);
    CHECK(k_serial == k_parallel);

    auto fixed = train_enn_fixed(ds, 4);
    CHECK(predict_enn_fixed(fixed, queries, serial) == predict_enn_fixed(fixed, queries, parallel));

    KdTree tree(ds.points);
    CHECK(knn_classify_batch(tree, ds.labels, 3, queries, 5, serial) ==
          knn_classify_batch(tree, ds.labels, 3, queries, 5, parallel));
}

TEST_CASE("majority vote behavior and oracle agreement") {
    auto ds = from_rows({{0.0}, {0.2}, {0.9}}, {0, 0, 1}, 2);
    KdTree tree(ds.points);
    const double q1 = 0.85;
    CHECK(knn_classify(tree, ds.labels, 2, std::span(&q1, 1), 1) == 1);  // nearest label
    CHECK(knn_classify(tree, ds.labels, 2, std::span(&q1, 1), 3) == 0);  // (a,a,b) -> a

    std::mt19937_64 rng(107);
    auto big = testutil::random_dataset(rng, 300, 2, 3);
    KdTree big_tree(big.points);
    for (int q = 0; q < 30; ++q) {
        auto query = random_points(rng, 1, 2);
        CHECK(knn_classify(big_tree, big.labels, 3, query.row(0), 5) ==
              ref::knn_vote(big.points, big.labels, 3, query.row(0), 5));
    }
}

TEST_CASE("fixed-k training validates k and applies the sqrt rule") {
    std::mt19937_64 rng(109);
    auto ds = testutil::random_dataset(rng, 100, 2, 2);
    CHECK_THROWS_AS(train_enn_fixed(ds, 0), std::invalid_argument);
    CHECK_THROWS_AS(train_enn_fixed(ds, 100), std::invalid_argument);
    CHECK(sqrt_rule_k(100) == 10);
    CHECK(sqrt_rule_k(2) == 1);
    CHECK(sqrt_rule_k(120) == 10);
}

TEST_CASE("fixed-k predictions equal the insertion oracle at the same k") {
    std::mt19937_64 rng(113);
    auto ds = testutil::random_dataset(rng, 12, 2, 2);
    for (int k = 1; k <= 3; ++k) {
        auto model = train_enn_fixed(ds, k);
        for (int q = 0; q < 5; ++q) {
            auto query = random_points(rng, 1, 2);
            CHECK(enn_predict(model, query.row(0)) ==
                  ref::enn_predict_inserted(ds.points, ds.labels, 2, query.row(0), k));
        }
    }
}

TEST_CASE("predictions are invariant under training permutation") {
    std::mt19937_64 rng(127);
    auto ds = testutil::random_dataset(rng, 80, 2, 3);
    auto queries = random_points(rng, 25, 2);

    std::vector<std::int32_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    auto shuffled = subset(ds, perm);

    PredictOptions serial;
    serial.parallel = false;
    auto a = predict_enan(train_enan(ds), queries, serial);
    auto b = predict_enan(train_enan(shuffled), queries, serial);
    CHECK(a == b);
}

TEST_CASE("predictions are invariant under translation") {
    // dyadic coordinates and an integer shift keep every distance bit-exact
    std::mt19937_64 rng(131);
    auto ds = testutil::random_dataset(rng, 70, 3, 2);
    for (auto& v : ds.points.data()) v = std::floor(v * 256.0) / 64.0;
    auto queries = random_points(rng, 20, 3);
    for (auto& v : queries.data()) v = std::floor(v * 256.0) / 64.0;

    Dataset moved = ds;
    PointMatrix moved_queries = queries;
    const double shift[3] = {5.0, -12.0, 3.0};
    for (std::size_t i = 0; i < moved.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c) moved.points(i, c) += shift[c];
    for (std::size_t i = 0; i < moved_queries.rows(); ++i)
        for (std::size_t c = 0; c < 3; ++c) moved_queries(i, c) += shift[c];

    PredictOptions serial;
    serial.parallel = false;
    CHECK(predict_enan(train_enan(ds), queries, serial) ==
          predict_enan(train_enan(moved), moved_queries, serial));

    auto fixed_a = train_enn_fixed(ds, 3);
    auto fixed_b = train_enn_fixed(moved, 3);
    CHECK(predict_enn_fixed(fixed_a, queries, serial) ==
          predict_enn_fixed(fixed_b, moved_queries, serial));
}

TEST_CASE("model save/load round trip predicts identically") {
    std::mt19937_64 rng(137);
    auto ds = testutil::random_dataset(rng, 60, 3, 3);
    auto queries = random_points(rng, 30, 3);
    const std::string path =
        (std::filesystem::temp_directory_path() / "enan_model_roundtrip.json").string();

    {
        auto model = train_enan(ds);
        save_model(model, path);
        auto loaded = load_model(path);
        auto* back = std::get_if<EnanModel>(&loaded);
        REQUIRE(back != nullptr);
        CHECK(back->lambda() == model.lambda());
        CHECK(back->graph.neighbors[0][0].distance == model.graph.neighbors[0][0].distance);
        CHECK(predict_enan(*back, queries) == predict_enan(model, queries));
    }
    {
        auto model = train_enn_fixed(ds, 4);
        save_model(model, path);
        auto loaded = load_model(path);
        auto* back = std::get_if<EnnFixedModel>(&loaded);
        REQUIRE(back != nullptr);
        CHECK(back->k == 4);
        CHECK(predict_enn_fixed(*back, queries) == predict_enn_fixed(model, queries));
    }
    std::remove(path.c_str());
}

TEST_CASE("degenerate inputs stay defined") {
    // duplicates
    auto dup = from_rows({{1, 1}, {1, 1}, {1, 1}, {4, 4}, {5, 5}, {4, 5}},
                         {0, 0, 0, 1, 1, 1}, 2);
    auto model = train_enan(dup);
    CHECK(model.lambda() >= 1);
    std::vector<double> q{1.0, 1.0};
    CHECK(enn_predict(model, q, 1) == 0);

    // constant feature column
    auto flat = from_rows({{0, 7}, {1, 7}, {2, 7}, {10, 7}, {11, 7}, {12, 7}},
                          {0, 0, 0, 1, 1, 1}, 2);
    auto flat_model = train_enan(minmax_normalize(flat));
    PointMatrix probe(1, 2);
    probe(0, 0) = 0.05;
    probe(0, 1) = 0.0;
    CHECK(predict_enan(flat_model, probe)[0] == 0);
}
