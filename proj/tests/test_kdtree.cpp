#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "enan/kdtree.hpp"
#include "reference/reference.hpp"
#include "testutil.hpp"

using namespace enan;
using testutil::matrix_1d;
using testutil::random_points;

namespace {

void require_same(const NeighborList& a, const NeighborList& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].distance == b[i].distance);
    }
}

}  // namespace

TEST_CASE("single point index answers every query with that point") {
    KdTree tree(matrix_1d({2.5}));
    CHECK(tree.point_count() == 1);
    const double q = -1.0;
    auto nn = tree.knn(std::span(&q, 1), 3);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0].id == 0);
    CHECK(nn[0].distance == doctest::Approx(3.5));
}

TEST_CASE("1-d hand case with self-exclusion") {
    KdTree tree(matrix_1d({0.0, 1.0, 3.0}));
    const double q = 0.0;
    auto nn = tree.knn(std::span(&q, 1), 2, /*exclude=*/0);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].id == 1);
    CHECK(nn[0].distance == 1.0);
    CHECK(nn[1].id == 2);
    CHECK(nn[1].distance == 3.0);
}

TEST_CASE("equidistant candidates resolve to the lower id") {
    KdTree tree(matrix_1d({-1.0, 1.0}));
    const double q = 0.0;
    auto nn = tree.knn(std::span(&q, 1), 1);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0].id == 0);
}

TEST_CASE("knn matches brute-force scan on random 2-d data") {
    std::mt19937_64 rng(7);
    auto points = random_points(rng, 1000, 2);
    KdTree tree(points);
    CHECK(tree.point_count() == 1000);
    for (int trial = 0; trial < 100; ++trial) {
        auto q = random_points(rng, 1, 2);
        require_same(tree.knn(q.row(0), 10), ref::knn_scan(points, q.row(0), 10));
    }
}

TEST_CASE("knn matches brute-force scan on random 5-d data") {
    std::mt19937_64 rng(11);
    auto points = random_points(rng, 500, 5);
    KdTree tree(points);
    for (int trial = 0; trial < 50; ++trial) {
        auto q = random_points(rng, 1, 5);
        require_same(tree.knn(q.row(0), 7), ref::knn_scan(points, q.row(0), 7));
    }
}

TEST_CASE("oracle equivalence including duplicates and exclusion") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 120;
        const std::size_t d = 1 + rng() % 4;
        auto points = random_points(rng, n, d);
        // duplicate a few rows so coincident points are exercised
        for (std::size_t i = 0; i + 1 < n && i < 4; i += 2) {
            auto src = points.row(i);
            std::copy(src.begin(), src.end(), points.row(i + 1).begin());
        }
        KdTree tree(points);
        const int k = 1 + static_cast<int>(rng() % n);
        const PointId excl = static_cast<PointId>(rng() % n);
        for (std::size_t i = 0; i < 5; ++i) {
            auto q = random_points(rng, 1, d);
            require_same(tree.knn(q.row(0), k, excl), ref::knn_scan(points, q.row(0), k, excl));
        }
    }
}

TEST_CASE("knn(k) is a prefix of knn(k+1)") {
    std::mt19937_64 rng(5);
    auto points = random_points(rng, 300, 3);
    KdTree tree(points);
    for (int trial = 0; trial < 20; ++trial) {
        auto q = random_points(rng, 1, 3);
        auto big = tree.knn(q.row(0), 12);
        for (int k = 1; k < 12; ++k) {
            auto small = tree.knn(q.row(0), k);
            REQUIRE(small.size() == static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) CHECK(small[i].id == big[i].id);
        }
    }
}

TEST_CASE("rth_neighbor equals the last element of knn(r)") {
    std::mt19937_64 rng(13);
    auto points = random_points(rng, 200, 3);
    KdTree tree(points);
    auto q = random_points(rng, 1, 3);
    for (int r = 1; r <= 10; ++r) {
        auto full = ref::knn_scan(points, q.row(0), r);
        auto got = tree.rth_neighbor(q.row(0), r);
        CHECK(got.id == full.back().id);
        CHECK(got.distance == full.back().distance);
    }
}

TEST_CASE("rth_neighbor hand case and range error") {
    KdTree tree(matrix_1d({0.0, 2.0, 5.0}));
    const double q = 0.0;
    auto second = tree.rth_neighbor(std::span(&q, 1), 2, /*exclude=*/0);
    CHECK(second.id == 2);
    CHECK(second.distance == 5.0);
    CHECK_THROWS_AS(tree.rth_neighbor(std::span(&q, 1), 3, 0), std::out_of_range);
}

TEST_CASE("build and query argument validation") {
    CHECK_THROWS_AS(KdTree(PointMatrix{}), std::invalid_argument);
    KdTree tree(matrix_1d({0.0, 1.0}));
    const std::vector<double> bad(2, 0.0);
    CHECK_THROWS_AS(tree.knn(bad, 1), std::invalid_argument);
    const double q = 0.0;
    CHECK_THROWS_AS(tree.knn(std::span(&q, 1), 0), std::invalid_argument);
}
