#include "enan/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "enan/kdtree.hpp"

namespace enan {

const char* method_kind_name(MethodKind kind) {
    switch (kind) {
        case MethodKind::Knn: return "knn";
        case MethodKind::EnnFixed: return "enn";
        case MethodKind::Enan: return "enan";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!tok.empty()) out.push_back(tok);
            tok.clear();
        } else {
            tok += c;
        }
    }
    if (!tok.empty()) out.push_back(tok);
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw std::runtime_error("config: bad boolean for '" + key + "': " + v);
}

LabelColumn parse_label_column(const std::string& v) {
    if (v == "last") return LabelColumn::last();
    if (v == "first") return LabelColumn::first();
    bool numeric = !v.empty() && (std::isdigit(static_cast<unsigned char>(v[0])) ||
                                  (v[0] == '-' && v.size() > 1));
    if (numeric) return LabelColumn::at(std::stoi(v));
    return LabelColumn::named(v);
}

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string cell_text(const CellResult& cell) {
    if (!cell.valid) return "--";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f%%", cell.mean, cell.stddev);
    return buf;
}

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_and_sample_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

}  // namespace

std::vector<MethodColumn> expand_methods(const std::vector<std::string>& methods,
                                         const std::vector<std::string>& k_grid) {
    std::vector<MethodColumn> out;
    for (const auto& m : methods) {
        if (m == "enan") {
            out.push_back({MethodKind::Enan, 0, false, "enan"});
            continue;
        }
        MethodKind kind;
        if (m == "knn")
            kind = MethodKind::Knn;
        else if (m == "enn")
            kind = MethodKind::EnnFixed;
        else
            throw std::runtime_error("config: unknown method '" + m + "'");
        if (k_grid.empty())
            throw std::runtime_error("config: method '" + m + "' needs a k_grid");
        for (const auto& tok : k_grid) {
            MethodColumn col;
            col.kind = kind;
            if (tok == "sqrt") {
                col.sqrt_rule = true;
                col.label = std::string(method_kind_name(kind)) + "_ksqrt";
            } else {
                col.k = std::stoi(tok);
                if (col.k < 1) throw std::runtime_error("config: k must be >= 1, got " + tok);
                col.label = std::string(method_kind_name(kind)) + "_k" + tok;
            }
            out.push_back(col);
        }
    }
    if (out.empty()) throw std::runtime_error("config: no methods configured");
    return out;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    ExperimentConfig cfg;
    std::vector<std::string> methods{"enn", "enan"};
    std::vector<std::string> k_grid{"1", "3", "5", "sqrt"};

    DatasetSpec* current = nullptr;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s == "[dataset]") {
            cfg.datasets.emplace_back();
            current = &cfg.datasets.back();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));

        if (current) {
            if (key == "name") current->name = value;
            else if (key == "path") current->path = value;
            else if (key == "label_column") current->label_column = parse_label_column(value);
            else if (key == "header") current->has_header = parse_bool(value, key);
            else
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unknown dataset key '" + key + "'");
        } else {
            if (key == "folds") cfg.n_folds = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "normalize") cfg.normalize = parse_bool(value, key);
            else if (key == "methods") methods = split_tokens(value);
            else if (key == "k_grid") k_grid = split_tokens(value);
            else if (key == "output_dir") cfg.output_dir = value;
            else
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unknown key '" + key + "'");
        }
    }
    if (cfg.datasets.empty()) throw std::runtime_error("config: no [dataset] blocks in " + path);
    for (const auto& d : cfg.datasets)
        if (d.path.empty()) throw std::runtime_error("config: dataset block without a path");
    if (cfg.n_folds < 2) throw std::runtime_error("config: folds must be >= 2");
    cfg.methods = expand_methods(methods, k_grid);
    return cfg;
}

double accuracy_percent(const std::vector<std::string>& truth,
                        const std::vector<std::string>& predicted) {
    if (truth.empty() || truth.size() != predicted.size())
        throw std::invalid_argument("accuracy_percent: size mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == predicted[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

namespace {

// Train on the fold's training subset and predict the test rows, returning
// predicted class names.
std::vector<std::string> run_method_on_fold(const MethodColumn& method, const Dataset& train,
                                            const PointMatrix& test_points) {
    const int k = method.sqrt_rule ? sqrt_rule_k(train.size()) : method.k;
    std::vector<ClassId> ids;

    switch (method.kind) {
        case MethodKind::Knn: {
            if (k > static_cast<int>(train.size()))
                throw std::invalid_argument("knn: k exceeds training size");
            KdTree index(train.points);
            ids = knn_classify_batch(index, train.labels, train.num_classes(), test_points, k);
            break;
        }
        case MethodKind::EnnFixed:
            ids = predict_enn_fixed(train_enn_fixed(train, k), test_points);
            break;
        case MethodKind::Enan:
            ids = predict_enan(train_enan(train), test_points);
            break;
    }
    // model id spaces equal the training subset's id space
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (ClassId id : ids) out.push_back(train.class_names[id]);
    return out;
}

void dump_predictions(const std::string& path, std::span<const std::int32_t> rows,
                      const std::vector<std::string>& truth,
                      const std::vector<std::string>& predicted) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "row_index,true,predicted\n";
    for (std::size_t i = 0; i < truth.size(); ++i)
        out << rows[i] << ',' << truth[i] << ',' << predicted[i] << '\n';
}

}  // namespace

EvalReport run_benchmark(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);

    EvalReport report;
    report.n_folds = config.n_folds;
    report.seed = config.seed;
    report.normalize = config.normalize;
    for (const auto& m : config.methods) report.method_labels.push_back(m.label);

    for (const auto& spec : config.datasets) {
        Dataset ds;
        try {
            ds = load_csv(spec.path, spec.label_column, spec.has_header);
        } catch (const std::exception& e) {
            throw std::runtime_error("dataset '" +
                                     (spec.name.empty() ? spec.path : spec.name) +
                                     "' failed to load: " + e.what());
        }
        if (!spec.name.empty()) ds.name = spec.name;
        if (config.normalize) ds = minmax_normalize(ds);

        const FoldPlan plan = stratified_kfold(ds, config.n_folds, config.seed);
        export_fold_plan(plan, config.output_dir + "/folds_" + ds.name + ".txt");

        report.dataset_names.push_back(ds.name);
        report.cells.emplace_back();
        auto& row = report.cells.back();

        for (const auto& method : config.methods) {
            CellResult cell;
            cell.dataset = ds.name;
            cell.method = method.label;
            cell.valid = true;
            const auto t0 = std::chrono::steady_clock::now();

            for (int f = 0; f < config.n_folds && cell.valid; ++f) {
                const auto train_idx = plan.train_indices(f);
                const auto& test_idx = plan.test_indices(f);
                const Dataset train = subset(ds, train_idx);
                const Dataset test = subset(ds, test_idx);

                std::vector<std::string> truth;
                truth.reserve(test.size());
                for (auto l : test.labels) truth.push_back(test.class_names[l]);

                try {
                    auto predicted = run_method_on_fold(method, train, test.points);
                    cell.fold_accuracy.push_back(accuracy_percent(truth, predicted));
                    dump_predictions(config.output_dir + "/predictions_" + ds.name + "_" +
                                         method.label + "_" + std::to_string(f) + ".csv",
                                     test_idx, truth, predicted);
                } catch (const std::exception& e) {
                    cell.valid = false;
                    cell.error = e.what();
                }
            }
            if (cell.valid) {
                const auto ms = mean_and_sample_std(cell.fold_accuracy);
                cell.mean = ms.mean;
                cell.stddev = ms.stddev;
            }
            cell.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.push_back(std::move(cell));
        }
    }

    write_report_files(report, config.output_dir);
    return report;
}

namespace {

// column width in glyphs, not bytes (cells contain the two-byte ± sign)
std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++w;
    return w;
}

}  // namespace

std::string render_report_body(const EvalReport& report) {
    std::vector<std::size_t> widths;
    widths.push_back(std::string("dataset").size());
    for (const auto& name : report.dataset_names)
        widths[0] = std::max(widths[0], display_width(name));
    widths[0] = std::max(widths[0], std::string("OVERALL").size());

    std::vector<std::vector<std::string>> table;  // [dataset][method]
    for (const auto& row : report.cells) {
        table.emplace_back();
        for (const auto& cell : row) table.back().push_back(cell_text(cell));
    }
    std::vector<std::string> overall;
    for (std::size_t m = 0; m < report.method_labels.size(); ++m) {
        bool all_valid = !report.cells.empty();
        double mean_sum = 0.0, std_sum = 0.0;
        for (const auto& row : report.cells) {
            if (!row[m].valid) all_valid = false;
            else {
                mean_sum += row[m].mean;
                std_sum += row[m].stddev;
            }
        }
        if (all_valid) {
            CellResult c;
            c.valid = true;
            c.mean = mean_sum / static_cast<double>(report.cells.size());
            c.stddev = std_sum / static_cast<double>(report.cells.size());
            overall.push_back(cell_text(c));
        } else {
            overall.push_back("--");
        }
    }
    for (std::size_t m = 0; m < report.method_labels.size(); ++m) {
        std::size_t w = display_width(report.method_labels[m]);
        for (const auto& row : table) w = std::max(w, display_width(row[m]));
        w = std::max(w, display_width(overall[m]));
        widths.push_back(w);
    }

    auto pad = [](const std::string& s, std::size_t w) {
        const std::size_t d = display_width(s);
        return s + std::string(w > d ? w - d : 0, ' ');
    };

    std::ostringstream out;
    out << pad("dataset", widths[0]);
    for (std::size_t m = 0; m < report.method_labels.size(); ++m)
        out << "  " << pad(report.method_labels[m], widths[m + 1]);
    out << '\n';
    for (std::size_t d = 0; d < report.dataset_names.size(); ++d) {
        out << pad(report.dataset_names[d], widths[0]);
        for (std::size_t m = 0; m < report.method_labels.size(); ++m)
            out << "  " << pad(table[d][m], widths[m + 1]);
        out << '\n';
    }
    out << pad("OVERALL", widths[0]);
    for (std::size_t m = 0; m < report.method_labels.size(); ++m)
        out << "  " << pad(overall[m], widths[m + 1]);
    out << '\n';
    return out.str();
}

void write_report_files(const EvalReport& report, const std::string& out_dir) {
    {
        std::ofstream txt(out_dir + "/report.txt");
        if (!txt) throw std::runtime_error("cannot write " + out_dir + "/report.txt");
        txt << "# cross-validation accuracy, percent, mean±std over folds\n";
        txt << "# generated: " << timestamp_utc() << "\n";
        txt << "# folds=" << report.n_folds << " seed=" << report.seed
            << " normalize=" << (report.normalize ? "on" : "off") << "\n";
        txt << render_report_body(report);
    }
    {
        std::ofstream csv(out_dir + "/report.csv");
        if (!csv) throw std::runtime_error("cannot write " + out_dir + "/report.csv");
        csv << "dataset,method,mean,std,folds\n";
        std::vector<double> mean_sum(report.method_labels.size(), 0.0);
        std::vector<double> std_sum(report.method_labels.size(), 0.0);
        std::vector<bool> all_valid(report.method_labels.size(), true);
        for (std::size_t d = 0; d < report.dataset_names.size(); ++d) {
            for (std::size_t m = 0; m < report.method_labels.size(); ++m) {
                const auto& cell = report.cells[d][m];
                csv << report.dataset_names[d] << ',' << report.method_labels[m] << ',';
                if (cell.valid) {
                    csv << two_decimals(cell.mean) << ',' << two_decimals(cell.stddev);
                    mean_sum[m] += cell.mean;
                    std_sum[m] += cell.stddev;
                } else {
                    csv << ",";
                    all_valid[m] = false;
                }
                csv << ',' << report.n_folds << '\n';
            }
        }
        const double n = static_cast<double>(report.dataset_names.size());
        for (std::size_t m = 0; m < report.method_labels.size(); ++m) {
            csv << "OVERALL," << report.method_labels[m] << ',';
            if (all_valid[m] && n > 0)
                csv << two_decimals(mean_sum[m] / n) << ',' << two_decimals(std_sum[m] / n);
            else
                csv << ",";
            csv << ',' << report.n_folds << '\n';
        }
    }
    {
        std::ofstream rt(out_dir + "/runtimes.csv");
        if (!rt) throw std::runtime_error("cannot write " + out_dir + "/runtimes.csv");
        rt << "dataset,method,seconds\n";
        for (std::size_t d = 0; d < report.dataset_names.size(); ++d)
            for (std::size_t m = 0; m < report.method_labels.size(); ++m) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", report.cells[d][m].runtime_seconds);
                rt << report.dataset_names[d] << ',' << report.method_labels[m] << ',' << buf
                   << '\n';
            }
    }
}

std::vector<SweepRow> sweep_k(const Dataset& ds, MethodKind method, const std::vector<int>& ks,
                              int n_folds, std::uint64_t seed) {
    if (ks.empty()) throw std::invalid_argument("sweep_k: empty k range");
    if (method == MethodKind::Enan)
        throw std::invalid_argument("sweep_k: the adaptive method has no k to sweep");

    const FoldPlan plan = stratified_kfold(ds, n_folds, seed);
    std::size_t min_train = ds.size();
    for (int f = 0; f < n_folds; ++f)
        min_train = std::min(min_train, ds.size() - plan.test_indices(f).size());
    const int max_k = *std::max_element(ks.begin(), ks.end());
    if (max_k >= static_cast<int>(min_train))
        throw std::invalid_argument("sweep_k: max k must be smaller than every training fold");

    std::vector<SweepRow> rows;
    for (int k : ks) {
        std::vector<double> acc;
        for (int f = 0; f < n_folds; ++f) {
            const Dataset train = subset(ds, plan.train_indices(f));
            const Dataset test = subset(ds, plan.test_indices(f));
            MethodColumn col;
            col.kind = method;
            col.k = k;
            auto predicted = run_method_on_fold(col, train, test.points);
            std::vector<std::string> truth;
            for (auto l : test.labels) truth.push_back(test.class_names[l]);
            acc.push_back(accuracy_percent(truth, predicted));
        }
        const auto ms = mean_and_sample_std(acc);
        rows.push_back({k, ms.mean, ms.stddev});
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const Dataset& ds, MethodKind method,
                     int n_folds, std::uint64_t seed, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# accuracy vs k via " << n_folds << "-fold cross-validation, seed " << seed
        << ", dataset " << ds.name << ", method " << method_kind_name(method) << "\n";
    out << "k,mean,std\n";
    for (const auto& row : rows)
        out << row.k << ',' << two_decimals(row.mean) << ',' << two_decimals(row.stddev) << '\n';
}

void export_nan_artifacts(const EnanModel& model, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto& nan = model.nan;

    {
        std::ofstream edges(out_dir + "/nan_edges.txt");
        if (!edges) throw std::runtime_error("cannot write " + out_dir + "/nan_edges.txt");
        for (std::size_t i = 0; i < nan.size(); ++i) {
            for (PointId j : nan.nan_sets[i]) {
                if (j <= static_cast<PointId>(i)) continue;  // one line per undirected edge
                double dist = -1.0;
                for (const auto& nb : nan.knn_lists[i])
                    if (nb.id == j) {
                        dist = nb.distance;
                        break;
                    }
                edges << i << ' ' << j << ' ' << format_double(dist) << '\n';
            }
        }
    }
    {
        std::ofstream counts(out_dir + "/nan_counts.txt");
        if (!counts) throw std::runtime_error("cannot write " + out_dir + "/nan_counts.txt");
        for (std::size_t i = 0; i < nan.size(); ++i) counts << i << ' ' << nan.nan_counts[i] << '\n';
    }
    {
        std::ofstream meta(out_dir + "/nan_meta.txt");
        if (!meta) throw std::runtime_error("cannot write " + out_dir + "/nan_meta.txt");
        meta << "lambda " << nan.lambda << '\n';
    }
}

}  // namespace enan
