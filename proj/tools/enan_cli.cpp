// Command-line front end: cross-validation benchmarks, accuracy-vs-k
// sweeps, model training/prediction and neighbor-graph export.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "enan/classification.hpp"
#include "enan/dataset.hpp"
#include "enan/harness.hpp"
#include "enan/kdtree.hpp"
#include "enan/natural_neighbor.hpp"

namespace {

using namespace enan;

struct CommonDataArgs {
    std::string path;
    std::string label_column = "last";
    bool header = false;
};

void add_data_options(CLI::App* cmd, CommonDataArgs& args) {
    cmd->add_option("--data", args.path, "input CSV file")->required();
    cmd->add_option("--label-column", args.label_column,
                    "label column: last, first, a 0-based index, or a header name");
    cmd->add_flag("--header", args.header, "first row is a header");
}

LabelColumn to_label_column(const std::string& v) {
    if (v == "last") return LabelColumn::last();
    if (v == "first") return LabelColumn::first();
    bool numeric = !v.empty() && (std::isdigit(static_cast<unsigned char>(v[0])) ||
                                  (v[0] == '-' && v.size() > 1));
    if (numeric) return LabelColumn::at(std::stoi(v));
    return LabelColumn::named(v);
}

Dataset load_from_args(const CommonDataArgs& args) {
    return load_csv(args.path, to_label_column(args.label_column), args.header);
}

int cmd_bench(const std::string& config_path, int folds_override, std::int64_t seed_override,
              int normalize_override, const std::string& out_override) {
    ExperimentConfig cfg = parse_config_file(config_path);
    if (folds_override > 0) cfg.n_folds = folds_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (normalize_override >= 0) cfg.normalize = normalize_override != 0;
    if (!out_override.empty()) cfg.output_dir = out_override;

    EvalReport report = run_benchmark(cfg);
    std::cout << render_report_body(report);
    std::cout << "report written to " << cfg.output_dir << "/report.txt\n";
    for (const auto& row : report.cells)
        for (const auto& cell : row)
            if (!cell.valid)
                std::cerr << "warning: cell " << cell.dataset << "/" << cell.method
                          << " invalid: " << cell.error << "\n";
    return 0;
}

int cmd_sweep(const CommonDataArgs& data, const std::string& method_name, std::vector<int> ks,
              int k_max, int folds, std::int64_t seed, bool normalize,
              const std::string& out_dir) {
    if (ks.empty()) {
        if (k_max < 1) throw std::runtime_error("sweep: provide --k values or --k-max");
        for (int k = 1; k <= k_max; ++k) ks.push_back(k);
    }
    MethodKind kind;
    if (method_name == "knn") kind = MethodKind::Knn;
    else if (method_name == "enn") kind = MethodKind::EnnFixed;
    else throw std::runtime_error("sweep: method must be knn or enn");

    Dataset ds = load_from_args(data);
    if (normalize) ds = minmax_normalize(ds);
    auto rows = sweep_k(ds, kind, ks, folds, static_cast<std::uint64_t>(seed));

    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/sweep_" + ds.name + ".csv";
    write_sweep_csv(rows, ds, kind, folds, static_cast<std::uint64_t>(seed), path);
    for (const auto& row : rows)
        std::cout << "k=" << row.k << " mean=" << row.mean << " std=" << row.stddev << "\n";
    std::cout << "series written to " << path << "\n";
    return 0;
}

int cmd_train(const CommonDataArgs& data, const std::string& method, int k, bool normalize,
              const std::string& out_path) {
    Dataset ds = load_from_args(data);
    std::optional<MinMaxScale> scale;
    if (normalize) {
        scale = minmax_fit(ds);
        ds.points = minmax_apply(ds.points, *scale);
    }
    if (method == "enan") {
        EnanModel model = train_enan(std::move(ds));
        model.scale = scale;
        if (model.nan.lambda_capped)
            std::cerr << "warning: neighbor search hit the depth cap; lambda="
                      << model.lambda() << " is a floor, not a stable value\n";
        save_model(model, out_path);
        std::cout << "trained adaptive model: lambda=" << model.lambda() << ", saved to "
                  << out_path << "\n";
    } else if (method == "enn") {
        if (k < 1) throw std::runtime_error("train: --k is required for method enn");
        EnnFixedModel model = train_enn_fixed(std::move(ds), k);
        model.scale = scale;
        save_model(model, out_path);
        std::cout << "trained fixed-k model: k=" << model.k << ", saved to " << out_path << "\n";
    } else {
        throw std::runtime_error("train: method must be enan or enn");
    }
    return 0;
}

int cmd_predict(const std::string& model_path, const CommonDataArgs& data,
                const std::string& out_path) {
    AnyModel any = load_model(model_path);

    PointMatrix queries;
    std::vector<std::string> truth;
    if (data.label_column == "none") {
        queries = load_points_csv(data.path, data.header);
    } else {
        Dataset qs = load_csv(data.path, to_label_column(data.label_column), data.header);
        queries = qs.points;
        for (auto l : qs.labels) truth.push_back(qs.class_names[l]);
    }

    std::vector<std::string> predicted;
    std::visit(
        [&](const auto& model) {
            PointMatrix scaled =
                model.scale ? minmax_apply(queries, *model.scale) : queries;
            std::vector<ClassId> ids;
            if constexpr (std::is_same_v<std::decay_t<decltype(model)>, EnanModel>)
                ids = predict_enan(model, scaled);
            else
                ids = predict_enn_fixed(model, scaled);
            for (ClassId id : ids) predicted.push_back(model.train.class_names[id]);
        },
        any);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << (truth.empty() ? "row_index,predicted" : "row_index,predicted,true") << "\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        out << i << ',' << predicted[i];
        if (!truth.empty()) out << ',' << truth[i];
        out << '\n';
    }
    std::cout << predicted.size() << " predictions written to " << out_path << "\n";
    if (!truth.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", accuracy_percent(truth, predicted));
        std::cout << "accuracy: " << buf << "%\n";
    }
    return 0;
}

int cmd_export_graph(const CommonDataArgs& data, bool normalize, const std::string& out_dir) {
    Dataset ds = load_from_args(data);
    if (normalize) ds = minmax_normalize(ds);
    EnanModel model = train_enan(std::move(ds));
    export_nan_artifacts(model, out_dir);
    std::cout << "lambda=" << model.lambda() << ", artifacts written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"natural-neighbor and extended-nearest-neighbor classification toolkit"};
    app.require_subcommand(1);

    // bench
    auto* bench = app.add_subcommand("bench", "cross-validation benchmark from a config file");
    std::string config_path;
    int folds_override = -1;
    std::int64_t seed_override = -1;
    std::string out_override;
    bool norm_on = false, norm_off = false;
    bench->add_option("--config", config_path, "experiment config file")->required();
    bench->add_option("--folds", folds_override, "override fold count");
    bench->add_option("--seed", seed_override, "override shuffle seed");
    bench->add_option("--out", out_override, "override output directory");
    bench->add_flag("--normalize", norm_on, "force min-max normalization on");
    bench->add_flag("--no-normalize", norm_off, "force normalization off");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "accuracy-vs-k series for knn or enn");
    CommonDataArgs sweep_data;
    add_data_options(sweep, sweep_data);
    std::string sweep_method = "enn";
    std::vector<int> sweep_ks;
    int sweep_kmax = -1;
    int sweep_folds = 10;
    std::int64_t sweep_seed = 1;
    bool sweep_norm = false;
    std::string sweep_out = "results";
    sweep->add_option("--method", sweep_method, "knn or enn");
    sweep->add_option("--k", sweep_ks, "explicit k values");
    sweep->add_option("--k-max", sweep_kmax, "sweep k = 1..k-max");
    sweep->add_option("--folds", sweep_folds, "fold count");
    sweep->add_option("--seed", sweep_seed, "shuffle seed");
    sweep->add_flag("--normalize", sweep_norm, "min-max normalize features");
    sweep->add_option("--out", sweep_out, "output directory");

    // train
    auto* train = app.add_subcommand("train", "train a model and save it");
    CommonDataArgs train_data;
    add_data_options(train, train_data);
    std::string train_method = "enan";
    int train_k = -1;
    bool train_norm = false;
    std::string train_out = "model.json";
    train->add_option("--method", train_method, "enan or enn");
    train->add_option("--k", train_k, "neighborhood size for method enn");
    train->add_flag("--normalize", train_norm, "min-max normalize features (stored in the model)");
    train->add_option("--out", train_out, "model output path");

    // predict
    auto* predict = app.add_subcommand("predict", "predict labels with a saved model");
    std::string predict_model;
    CommonDataArgs predict_data;
    std::string predict_out = "predictions.csv";
    predict->add_option("--model", predict_model, "model file from train")->required();
    predict->add_option("--data", predict_data.path, "query CSV file")->required();
    predict->add_option("--label-column", predict_data.label_column,
                        "label column of the query file, or 'none' for unlabeled queries");
    predict->add_flag("--header", predict_data.header, "first row is a header");
    predict->add_option("--out", predict_out, "predictions output path");

    // export-graph
    auto* exportg = app.add_subcommand("export-graph",
                                       "train on a full dataset and export the neighbor graph");
    CommonDataArgs export_data;
    add_data_options(exportg, export_data);
    bool export_norm = false;
    std::string export_out = "graph";
    exportg->add_flag("--normalize", export_norm, "min-max normalize features");
    exportg->add_option("--out", export_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) {
            int norm_override = -1;
            if (norm_on) norm_override = 1;
            if (norm_off) norm_override = 0;
            return cmd_bench(config_path, folds_override, seed_override, norm_override,
                             out_override);
        }
        if (sweep->parsed())
            return cmd_sweep(sweep_data, sweep_method, sweep_ks, sweep_kmax, sweep_folds,
                             sweep_seed, sweep_norm, sweep_out);
        if (train->parsed())
            return cmd_train(train_data, train_method, train_k, train_norm, train_out);
        if (predict->parsed()) return cmd_predict(predict_model, predict_data, predict_out);
        if (exportg->parsed()) return cmd_export_graph(export_data, export_norm, export_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
