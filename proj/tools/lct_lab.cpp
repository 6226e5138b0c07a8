// Command-line front end: dataset generation, single runs, grid sweeps,
// and report/plot-data extraction over a finished result store.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lct/harness.hpp"
#include "lct/serialize.hpp"

namespace fs = std::filesystem;
using lct::json;

namespace {

int cmd_generate_data(const std::string& config_path, std::uint64_t seed,
                      const std::string& out_dir) {
    json j = lct::load_json_file(config_path);
    lct::SyntheticSpec spec = lct::synthetic_spec_from_json(
        j.contains("synthetic") ? j.at("synthetic") : j);
    if (seed != 0) spec.seed = seed;
    lct::SyntheticData data = lct::generate_synthetic(spec);
    fs::create_directories(out_dir);
    lct::write_csv(data.train, (fs::path(out_dir) / "train.csv").string());
    lct::write_csv(data.test, (fs::path(out_dir) / "test.csv").string());
    std::cout << "train: " << data.train.labels.size() << " rows (n_neg=" << data.train.n_neg()
              << ", n_pos=" << data.train.n_pos() << ", beta=" << data.train.beta() << ")\n"
              << "test:  " << data.test.labels.size() << " rows (balanced)\n"
              << "wrote " << out_dir << "/train.csv and test.csv\n";
    return 0;
}

lct::Dataset load_train_dataset(const json& j, const std::string& who) {
    if (!j.contains("dataset"))
        throw std::invalid_argument(who + ": config needs a 'dataset' entry");
    const json& ds = j.at("dataset");
    if (ds.contains("synthetic"))
        return lct::generate_synthetic(lct::synthetic_spec_from_json(ds.at("synthetic"))).train;
    const std::string label = ds.value("label_column", std::string("label"));
    return lct::load_csv(ds.at("train_csv").get<std::string>(), label);
}

int cmd_train(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
    json j = lct::load_json_file(config_path);
    lct::TrainConfig cfg = lct::train_config_from_json(j.at("train"));
    if (seed != 0) cfg.seed = seed;
    fs::create_directories(out_dir);
    if (cfg.trace_path.empty()) cfg.trace_path = (fs::path(out_dir) / "trace.jsonl").string();

    lct::Dataset train_ds = load_train_dataset(j, "train");
    lct::TrainedModel model = lct::train(cfg, train_ds);
    const std::string checkpoint = (fs::path(out_dir) / "checkpoint.json").string();
    lct::save_model(model, checkpoint);
    std::cout << "trained " << to_string(cfg.method) << " / " << to_string(cfg.family)
              << " for " << cfg.epochs << " epochs (beta=" << model.beta << ")\n"
              << "final mean loss " << model.epoch_losses.back() << "\n"
              << "checkpoint: " << checkpoint << "\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_dir) {
    json j = lct::load_json_file(config_path);
    lct::TrainedModel model = lct::load_model(j.at("checkpoint").get<std::string>());

    lct::Dataset test_ds;
    const json& ds = j.at("dataset");
    if (ds.contains("synthetic"))
        test_ds = lct::generate_synthetic(lct::synthetic_spec_from_json(ds.at("synthetic"))).test;
    else {
        // Replays the model's stored label mapping and standardization.
        lct::Dataset reference;
        reference.pos_label = model.pos_label;
        reference.neg_label = model.neg_label;
        reference.feat_mean = model.feat_mean;
        reference.feat_std = model.feat_std;
        test_ds = lct::load_csv(ds.at("test_csv").get<std::string>(),
                                ds.value("label_column", std::string("label")), reference);
    }

    std::vector<lct::LambdaVec> grid;
    if (j.contains("lambda_grid"))
        for (const json& entry : j.at("lambda_grid"))
            grid.push_back(entry.get<lct::LambdaVec>());
    else
        grid.push_back(model.config.lambda_dist.is_point()
                           ? model.config.lambda_dist.point_value()
                           : lct::LambdaVec(model.net_config.lambda_dim, 0.0));

    const auto reports = lct::evaluate(model, test_ds, grid);
    fs::create_directories(out_dir);
    json out = json::array();
    for (std::size_t k = 0; k < reports.size(); ++k) {
        out.push_back(json{{"lambda", reports[k].lambda},
                           {"scalars", lct::scalars_to_json(reports[k].scalars)}});
        char name[32];
        std::snprintf(name, sizeof(name), "eval_%03zu", k);
        {
            std::ofstream roc(fs::path(out_dir) / (std::string(name) + "_roc.csv"));
            lct::write_curve_csv(reports[k].roc, roc);
        }
        std::ofstream pr(fs::path(out_dir) / (std::string(name) + "_pr.csv"));
        lct::write_curve_csv(reports[k].pr, pr);
    }
    lct::write_json_file(out, (fs::path(out_dir) / "report.json").string());
    for (std::size_t k = 0; k < reports.size(); ++k)
        std::cout << "lambda=(" << [&] {
            std::string s;
            for (std::size_t i = 0; i < reports[k].lambda.size(); ++i)
                s += (i ? "," : "") + std::to_string(reports[k].lambda[i]);
            return s;
        }() << ") auc=" << reports[k].scalars.auc << " ap=" << reports[k].scalars.ap
                  << " brier=" << reports[k].scalars.brier << "\n";
    std::cout << "report: " << out_dir << "/report.json\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, unsigned workers) {
    json j = lct::load_json_file(config_path);
    lct::SweepSpec spec = lct::sweep_spec_from_json(j);
    if (!out_dir.empty()) spec.out_dir = out_dir;
    lct::ResultStore store = lct::run_sweep(spec, workers);
    std::cout << "sweep complete; results in " << store.root << "\n"
              << "aggregates: " << store.root << "/aggregates\n";
    return 0;
}

int cmd_report(const std::string& store_dir, const std::string& metric,
               const std::string& direction, bool curves) {
    lct::ResultStore store = lct::ResultStore::open(store_dir);
    lct::write_aggregates(store);
    const auto best = lct::best_per_method(store, metric, direction);
    std::printf("%-24s %-10s %-12s %-24s %s\n", "method", "beta", metric.c_str(),
                "eval_lambda", "train_hyper");
    for (const auto& cell : best) {
        std::string lam;
        for (std::size_t i = 0; i < cell.eval_lambda.size(); ++i)
            lam += (i ? "," : "") + std::to_string(cell.eval_lambda[i]);
        std::printf("%-24s %-10g %-12.6f %-24s %s\n", cell.method.c_str(), cell.beta,
                    cell.value, lam.c_str(), cell.hyper.c_str());
    }
    if (curves) {
        lct::emit_curves(store, lct::CurveSelection{metric, direction, {}});
        std::cout << "curves: " << store_dir << "/curves\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training laboratory for binary classification under severe class imbalance"};
    app.require_subcommand(1);

    std::string config_path, out_dir, store_dir;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string metric = "auc", direction = "max";
    bool curves = false;

    auto* gen = app.add_subcommand("generate-data", "Write a synthetic dataset as CSV");
    gen->add_option("--config", config_path, "synthetic spec JSON")->required();
    gen->add_option("--seed", seed, "override the spec seed");
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* tr = app.add_subcommand("train", "Train one model");
    tr->add_option("--config", config_path, "train config JSON")->required();
    tr->add_option("--seed", seed, "override the config seed");
    tr->add_option("--out", out_dir, "output directory")->required();

    auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint over a lambda grid");
    ev->add_option("--config", config_path, "eval config JSON")->required();
    ev->add_option("--out", out_dir, "output directory")->required();

    auto* sw = app.add_subcommand("sweep", "Run a full method/hyperparameter/seed grid");
    sw->add_option("--config", config_path, "sweep spec JSON")->required();
    sw->add_option("--out", out_dir, "override the spec out_dir");
    sw->add_option("--workers", workers, "parallel training workers");

    auto* rp = app.add_subcommand("report", "Aggregate a result store and print the best cells");
    rp->add_option("--store", store_dir, "result store directory")->required();
    rp->add_option("--metric", metric, "metric name (default auc)");
    rp->add_option("--direction", direction, "max or min (use min for brier)");
    rp->add_flag("--curves", curves, "also emit ROC/PR/precision-at-recall CSVs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate_data(config_path, seed, out_dir);
        if (tr->parsed()) return cmd_train(config_path, seed, out_dir);
        if (ev->parsed()) return cmd_evaluate(config_path, out_dir);
        if (sw->parsed()) return cmd_sweep(config_path, out_dir, workers);
        if (rp->parsed()) return cmd_report(store_dir, metric, direction, curves);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
