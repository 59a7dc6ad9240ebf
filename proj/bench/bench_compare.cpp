// Timing comparison between the production kernels and the serial
// reference implementations:
//   - k-d tree queries vs linear scans
//   - OpenMP batch prediction vs the single-thread loop
//   - incremental statistic updates vs physical-insertion recomputation
// Usage: enan_bench [m] [n_queries] [d]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "enan/classification.hpp"
#include "enan/kdtree.hpp"
#include "reference/reference.hpp"

using namespace enan;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

Dataset make_blobs(std::mt19937_64& rng, std::size_t n, std::size_t d, ClassId classes) {
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset ds;
    ds.name = "blobs";
    ds.points = PointMatrix(n, d);
    ds.labels.resize(n);
    for (ClassId c = 0; c < classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        const ClassId c = static_cast<ClassId>(i % classes);
        ds.labels[i] = c;
        auto row = ds.points.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = noise(rng) + 6.0 * static_cast<double>(c);
    }
    return ds;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t m = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4000;
    const std::size_t n_queries = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 1000;
    const std::size_t d = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 4;

    std::mt19937_64 rng(12345);
    Dataset ds = make_blobs(rng, m, d, 3);
    PointMatrix queries(n_queries, d);
    std::normal_distribution<double> spread(3.0, 4.0);
    for (auto& v : queries.data()) v = spread(rng);

#ifdef _OPENMP
    std::printf("training points: %zu, queries: %zu, dimension: %zu, threads: %d\n", m,
                n_queries, d, omp_get_max_threads());
#else
    std::printf("training points: %zu, queries: %zu, dimension: %zu, threads: 1 (no OpenMP)\n",
                m, n_queries, d);
#endif

    // --- neighbor search: tree vs scan ---------------------------------
    KdTree tree(ds.points);
    const int k = 10;
    volatile double sink = 0.0;
    const double t_tree = best_of(3, [&] {
        double acc = 0.0;
        for (std::size_t q = 0; q < n_queries; ++q)
            acc += tree.knn(queries.row(q), k).back().distance;
        sink = acc;
    });
    const double t_scan = best_of(3, [&] {
        double acc = 0.0;
        for (std::size_t q = 0; q < n_queries; ++q)
            acc += ref::knn_scan(ds.points, queries.row(q), k).back().distance;
        sink = acc;
    });
    std::printf("\n%-42s %10.4fs\n", "k-d tree, 10-NN over all queries", t_tree);
    std::printf("%-42s %10.4fs   (tree speedup %.1fx)\n", "linear scan, same queries", t_scan,
                t_scan / t_tree);

    // --- batch prediction: OpenMP vs serial ----------------------------
    EnanModel model = train_enan(ds);
    std::printf("\nadaptive neighborhood size lambda = %d\n", model.lambda());

    PredictOptions par, ser;
    par.parallel = true;
    ser.parallel = false;
    std::vector<ClassId> out_par, out_ser;
    const double t_par = best_of(3, [&] { out_par = predict_enan(model, queries, par); });
    const double t_ser = best_of(3, [&] { out_ser = predict_enan(model, queries, ser); });
    std::printf("%-42s %10.4fs\n", "batch predict, OpenMP", t_par);
    std::printf("%-42s %10.4fs   (parallel speedup %.1fx)\n", "batch predict, serial loop",
                t_ser, t_ser / t_par);
    if (out_par != out_ser) {
        std::printf("MISMATCH between parallel and serial predictions\n");
        return 1;
    }

    // --- incremental update vs physical insertion ----------------------
    const std::size_t oracle_queries = std::min<std::size_t>(n_queries, 50);
    const int k_small = std::min(model.graph.k_max, 5);
    std::vector<ClassId> inc(oracle_queries), full(oracle_queries);
    const double t_inc = best_of(3, [&] {
        for (std::size_t q = 0; q < oracle_queries; ++q)
            inc[q] = enn_predict(model, queries.row(q), k_small);
    });
    const double t_full = best_of(1, [&] {
        for (std::size_t q = 0; q < oracle_queries; ++q)
            full[q] = ref::enn_predict_inserted(ds.points, ds.labels, ds.num_classes(),
                                                queries.row(q), k_small);
    });
    std::printf("\n%-42s %10.4fs   (%zu queries)\n", "incremental class decision", t_inc,
                oracle_queries);
    std::printf("%-42s %10.4fs   (recompute slowdown %.0fx)\n",
                "physical-insertion recomputation", t_full, t_full / t_inc);
    if (inc != full) {
        std::printf("MISMATCH between incremental and recomputed predictions\n");
        return 1;
    }

    (void)sink;
    std::printf("\nall comparisons agree\n");
    return 0;
}
