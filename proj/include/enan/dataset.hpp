#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enan/types.hpp"

namespace enan {

// Labeled dataset. Feature vectors have a uniform dimension, labels are
// dense class ids in [0, num_classes()) assigned by first appearance,
// class_names maps an id back to the original label string.
struct Dataset {
    PointMatrix points;
    std::vector<ClassId> labels;
    std::vector<std::string> class_names;
    std::string name;

    std::size_t size() const { return points.rows(); }
    std::size_t dimension() const { return points.cols(); }
    ClassId num_classes() const { return static_cast<ClassId>(class_names.size()); }
};

// Which column of the CSV holds the class label.
struct LabelColumn {
    enum class Kind { Last, First, Index, Name };
    Kind kind = Kind::Last;
    int index = 0;      // for Kind::Index, 0-based
    std::string name;   // for Kind::Name, requires a header row

    static LabelColumn last() { return {}; }
    static LabelColumn first() { return {Kind::First, 0, {}}; }
    static LabelColumn at(int i) { return {Kind::Index, i, {}}; }
    static LabelColumn named(std::string n) { return {Kind::Name, 0, std::move(n)}; }
};

// Parse/load failure with the offending position. Rows count data rows
// (header excluded), 1-based; columns are 1-based.
class CsvError : public std::runtime_error {
public:
    CsvError(std::string msg, int row, int col)
        : std::runtime_error(std::move(msg)), row_(row), col_(col) {}
    int row() const { return row_; }
    int col() const { return col_; }

private:
    int row_;
    int col_;
};

Dataset load_csv(const std::string& path, const LabelColumn& label_column = LabelColumn::last(),
                 bool has_header = false);

// Feature-only variant (no label column), e.g. for unlabeled query files.
PointMatrix load_points_csv(const std::string& path, bool has_header = false);

// Writes "f0,f1,...,label" rows, no header, doubles in shortest round-trip
// form so a reload reproduces the dataset exactly.
void save_csv(const Dataset& ds, const std::string& path);

// Per-column affine map fitted on one dataset and applicable to another
// (e.g. apply a training-time fit to query points).
struct MinMaxScale {
    std::vector<double> min;
    std::vector<double> max;
};

MinMaxScale minmax_fit(const Dataset& ds);
PointMatrix minmax_apply(const PointMatrix& points, const MinMaxScale& scale);
// Maps every column to [0,1]; constant columns map to 0.
Dataset minmax_normalize(const Dataset& ds);

// Deterministic stratified cross-validation plan: per class, a seeded
// shuffle followed by round-robin fold assignment.
struct FoldPlan {
    std::vector<std::vector<std::int32_t>> test_folds;  // disjoint, union = all rows
    std::uint64_t seed = 0;
    int n_folds = 0;

    std::vector<std::int32_t> train_indices(int fold) const;
    const std::vector<std::int32_t>& test_indices(int fold) const { return test_folds[fold]; }
};

FoldPlan stratified_kfold(const Dataset& ds, int n_folds, std::uint64_t seed);

// Two-column audit file: "row_index fold_id", one line per dataset row.
void export_fold_plan(const FoldPlan& plan, const std::string& path);

Dataset subset(const Dataset& ds, std::span<const std::int32_t> rows);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace enan
