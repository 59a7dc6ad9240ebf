#include "enan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace enan {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

int resolve_label_column(const LabelColumn& sel, const std::vector<std::string>& header,
                         int n_cols, bool has_header) {
    switch (sel.kind) {
        case LabelColumn::Kind::Last:
            return n_cols - 1;
        case LabelColumn::Kind::First:
            return 0;
        case LabelColumn::Kind::Index:
            if (sel.index < 0 || sel.index >= n_cols)
                throw CsvError("label column index " + std::to_string(sel.index) +
                                   " out of range for " + std::to_string(n_cols) + " columns",
                               0, sel.index + 1);
            return sel.index;
        case LabelColumn::Kind::Name: {
            if (!has_header)
                throw CsvError("label column by name '" + sel.name + "' requires a header row", 0, 0);
            for (int c = 0; c < n_cols; ++c)
                if (header[c] == sel.name) return c;
            throw CsvError("label column '" + sel.name + "' not found in header", 0, 0);
        }
    }
    throw CsvError("invalid label column selector", 0, 0);
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Dataset load_csv(const std::string& path, const LabelColumn& label_column, bool has_header) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file: " + path, 0, 0);

    std::string line;
    std::vector<std::string> header;
    if (has_header) {
        if (!std::getline(in, line)) throw CsvError("empty file: " + path, 0, 0);
        header = split_row(line);
    }

    Dataset ds;
    {
        auto slash = path.find_last_of('/');
        auto stem = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = stem.find_last_of('.');
        ds.name = dot == std::string::npos ? stem : stem.substr(0, dot);
    }

    std::unordered_map<std::string, ClassId> label_ids;
    std::vector<double> values;
    int n_cols = -1;
    int label_col = -1;
    int row = 0;

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;  // skip blank lines
        ++row;
        auto cells = split_row(line);
        if (n_cols < 0) {
            n_cols = static_cast<int>(cells.size());
            if (n_cols < 2)
                throw CsvError("need at least one feature column and a label column", row, 1);
            if (has_header && static_cast<int>(header.size()) != n_cols)
                throw CsvError("header has " + std::to_string(header.size()) +
                                   " columns but row 1 has " + std::to_string(n_cols),
                               1, 1);
            label_col = resolve_label_column(label_column, header, n_cols, has_header);
        }
        if (static_cast<int>(cells.size()) != n_cols)
            throw CsvError("ragged row: expected " + std::to_string(n_cols) + " columns, got " +
                               std::to_string(cells.size()),
                           row, static_cast<int>(cells.size()));

        for (int c = 0; c < n_cols; ++c) {
            if (c == label_col) {
                const std::string& lab = cells[c];
                if (lab.empty()) throw CsvError("missing label value", row, c + 1);
                auto [it, inserted] = label_ids.try_emplace(
                    lab, static_cast<ClassId>(ds.class_names.size()));
                if (inserted) ds.class_names.push_back(lab);
                ds.labels.push_back(it->second);
            } else {
                const std::string& cell = cells[c];
                if (cell.empty()) throw CsvError("missing feature value", row, c + 1);
                double v = 0.0;
                auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                    throw CsvError("non-numeric feature value '" + cell + "'", row, c + 1);
                if (!std::isfinite(v))
                    throw CsvError("non-finite feature value '" + cell + "'", row, c + 1);
                values.push_back(v);
            }
        }
    }

    if (row == 0) throw CsvError("empty file: " + path, 0, 0);

    const std::size_t d = static_cast<std::size_t>(n_cols - 1);
    PointMatrix points(static_cast<std::size_t>(row), d);
    std::copy(values.begin(), values.end(), points.data().begin());
    ds.points = std::move(points);
    return ds;
}

PointMatrix load_points_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file: " + path, 0, 0);
    std::string line;
    if (has_header && !std::getline(in, line)) throw CsvError("empty file: " + path, 0, 0);

    std::vector<double> values;
    int n_cols = -1;
    int row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split_row(line);
        if (n_cols < 0) n_cols = static_cast<int>(cells.size());
        if (static_cast<int>(cells.size()) != n_cols)
            throw CsvError("ragged row: expected " + std::to_string(n_cols) + " columns, got " +
                               std::to_string(cells.size()),
                           row, static_cast<int>(cells.size()));
        for (int c = 0; c < n_cols; ++c) {
            const std::string& cell = cells[c];
            if (cell.empty()) throw CsvError("missing feature value", row, c + 1);
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw CsvError("non-numeric feature value '" + cell + "'", row, c + 1);
            if (!std::isfinite(v)) throw CsvError("non-finite feature value '" + cell + "'", row, c + 1);
            values.push_back(v);
        }
    }
    if (row == 0) throw CsvError("empty file: " + path, 0, 0);
    PointMatrix points(static_cast<std::size_t>(row), static_cast<std::size_t>(n_cols));
    std::copy(values.begin(), values.end(), points.data().begin());
    return points;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write file: " + path, 0, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto p = ds.points.row(i);
        for (double v : p) out << format_double(v) << ',';
        out << ds.class_names[ds.labels[i]] << '\n';
    }
}

MinMaxScale minmax_fit(const Dataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("minmax_fit: empty dataset");
    const std::size_t d = ds.dimension();
    MinMaxScale s;
    s.min.assign(d, 0.0);
    s.max.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double lo = ds.points(0, c), hi = ds.points(0, c);
        for (std::size_t i = 1; i < ds.size(); ++i) {
            lo = std::min(lo, ds.points(i, c));
            hi = std::max(hi, ds.points(i, c));
        }
        s.min[c] = lo;
        s.max[c] = hi;
    }
    return s;
}

PointMatrix minmax_apply(const PointMatrix& points, const MinMaxScale& scale) {
    PointMatrix out(points.rows(), points.cols());
    for (std::size_t c = 0; c < points.cols(); ++c) {
        const double range = scale.max[c] - scale.min[c];
        for (std::size_t i = 0; i < points.rows(); ++i)
            out(i, c) = range == 0.0 ? 0.0 : (points(i, c) - scale.min[c]) / range;
    }
    return out;
}

Dataset minmax_normalize(const Dataset& ds) {
    Dataset out = ds;
    out.points = minmax_apply(ds.points, minmax_fit(ds));
    return out;
}

namespace {

// Explicit Fisher-Yates: std::shuffle output is not pinned across standard
// library implementations, and fold plans must be reproducible everywhere.
void deterministic_shuffle(std::vector<std::int32_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

FoldPlan stratified_kfold(const Dataset& ds, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("stratified_kfold: n_folds must be >= 2");
    if (static_cast<std::size_t>(n_folds) > ds.size())
        throw std::invalid_argument("stratified_kfold: n_folds exceeds dataset size");

    FoldPlan plan;
    plan.seed = seed;
    plan.n_folds = n_folds;
    plan.test_folds.assign(static_cast<std::size_t>(n_folds), {});

    std::vector<std::vector<std::int32_t>> by_class(ds.class_names.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        by_class[ds.labels[i]].push_back(static_cast<std::int32_t>(i));

    std::mt19937_64 rng(seed);
    for (auto& members : by_class) {
        deterministic_shuffle(members, rng);
        for (std::size_t t = 0; t < members.size(); ++t)
            plan.test_folds[t % n_folds].push_back(members[t]);
    }
    for (auto& fold : plan.test_folds) std::sort(fold.begin(), fold.end());
    return plan;
}

std::vector<std::int32_t> FoldPlan::train_indices(int fold) const {
    std::vector<std::int32_t> out;
    for (int f = 0; f < n_folds; ++f) {
        if (f == fold) continue;
        out.insert(out.end(), test_folds[f].begin(), test_folds[f].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void export_fold_plan(const FoldPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::vector<std::pair<std::int32_t, int>> rows;
    for (int f = 0; f < plan.n_folds; ++f)
        for (auto i : plan.test_folds[f]) rows.emplace_back(i, f);
    std::sort(rows.begin(), rows.end());
    for (auto [i, f] : rows) out << i << ' ' << f << '\n';
}

Dataset subset(const Dataset& ds, std::span<const std::int32_t> rows) {
    // Class ids are re-densified over the classes actually present (in
    // original id order) so per-class statistics never see an empty class.
    std::vector<bool> present(ds.class_names.size(), false);
    for (auto r : rows) present[ds.labels[r]] = true;

    Dataset out;
    out.name = ds.name;
    std::vector<ClassId> remap(ds.class_names.size(), -1);
    for (std::size_t c = 0; c < remap.size(); ++c) {
        if (present[c]) {
            remap[c] = static_cast<ClassId>(out.class_names.size());
            out.class_names.push_back(ds.class_names[c]);
        }
    }
    out.points = PointMatrix(rows.size(), ds.dimension());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto src = ds.points.row(static_cast<std::size_t>(rows[r]));
        std::copy(src.begin(), src.end(), out.points.row(r).begin());
        out.labels.push_back(remap[ds.labels[rows[r]]]);
    }
    return out;
}

}  // namespace enan
