#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "enan/classification.hpp"
#include "enan/dataset.hpp"

namespace enan {

struct DatasetSpec {
    std::string name;  // empty: derived from the file stem
    std::string path;
    LabelColumn label_column = LabelColumn::last();
    bool has_header = false;
};

enum class MethodKind { Knn, EnnFixed, Enan };

// One report column: a method plus (for the fixed-k methods) its k. When
// sqrt_rule is set, k is resolved per training fold as floor(sqrt(m)).
struct MethodColumn {
    MethodKind kind = MethodKind::Enan;
    int k = 0;
    bool sqrt_rule = false;
    std::string label;  // e.g. "enn_k3", "enn_ksqrt", "enan"
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<MethodColumn> methods;
    int n_folds = 10;
    std::uint64_t seed = 1;
    bool normalize = false;
    std::string output_dir = "results";
};

// Plain-text key-value config with [dataset] blocks; see the repository
// README for the format.
ExperimentConfig parse_config_file(const std::string& path);

// Expands method names (knn, enn, enan) against a k grid whose entries are
// integers or the token "sqrt".
std::vector<MethodColumn> expand_methods(const std::vector<std::string>& methods,
                                         const std::vector<std::string>& k_grid);

struct CellResult {
    std::string dataset;
    std::string method;
    bool valid = false;
    std::string error;
    std::vector<double> fold_accuracy;  // percent, one per fold
    double mean = 0.0;                  // percent
    double stddev = 0.0;                // percent, sample std over folds
    double runtime_seconds = 0.0;
};

struct EvalReport {
    std::vector<std::string> dataset_names;
    std::vector<std::string> method_labels;
    std::vector<std::vector<CellResult>> cells;  // [dataset][method]
    int n_folds = 0;
    std::uint64_t seed = 0;
    bool normalize = false;
};

// Full cross-validation benchmark. Writes report.txt, report.csv,
// runtimes.csv, fold plans and per-fold prediction dumps into
// config.output_dir (created if absent).
EvalReport run_benchmark(const ExperimentConfig& config);

// The deterministic table part of the text report (no timestamps).
std::string render_report_body(const EvalReport& report);
void write_report_files(const EvalReport& report, const std::string& out_dir);

struct SweepRow {
    int k = 0;
    double mean = 0.0;    // percent
    double stddev = 0.0;  // percent
};

// Accuracy-vs-k series for the fixed-k methods under the same fold plan as
// run_benchmark (identical dataset/seed/folds give identical folds).
std::vector<SweepRow> sweep_k(const Dataset& ds, MethodKind method, const std::vector<int>& ks,
                              int n_folds, std::uint64_t seed);
void write_sweep_csv(const std::vector<SweepRow>& rows, const Dataset& ds, MethodKind method,
                     int n_folds, std::uint64_t seed, const std::string& path);

// Plot-ready dumps of a trained model's neighbor structure: nan_edges.txt
// ("i j dist" per mutual pair), nan_counts.txt ("i count" per training
// point) and nan_meta.txt (single line with lambda).
void export_nan_artifacts(const EnanModel& model, const std::string& out_dir);

// Accuracy in percent, comparing by class name so differently-compacted
// id spaces still agree.
double accuracy_percent(const std::vector<std::string>& truth,
                        const std::vector<std::string>& predicted);

const char* method_kind_name(MethodKind kind);

}  // namespace enan
