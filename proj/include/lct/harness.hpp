#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lct/serialize.hpp"
#include "lct/trainer.hpp"

namespace lct {

// One row of the training-method table: a loss family, an optimizer, and
// whether lambda is a single value (baseline) or sampled from per-coordinate
// distributions (LCT, with or without the conditioning layer).
struct MethodSpec {
    std::string name; // e.g. "VS", "VS+LCT", "VS+SAM+LCT", "Focal+LCT"
    LossFamily family = LossFamily::vs;
    TrainMethod method = TrainMethod::baseline;
    OptimizerConfig optimizer;
    LambdaMapping mapping = LambdaMapping::full(LossFamily::vs);
    // One axis per lambda coordinate; training cells are the cross product.
    // Baselines use point masses here.
    std::vector<std::vector<LinearPdf>> train_axes;
    // Inference lambda grid axes (LCT methods only).
    std::vector<std::vector<double>> eval_axes;
};

// Parses "VS", "Focal+LCT", "VS+SAM+LCT", "VS+LCT-noFiLM", ... into the
// (family, optimizer, method) triple. Case-insensitive, spaces ignored.
MethodSpec method_spec_from_name(const std::string& name);

struct DatasetSource {
    bool synthetic = true;
    SyntheticSpec spec;
    std::string train_csv;
    std::string test_csv;
    std::string label_column = "label";
};

struct SweepSpec {
    DatasetSource dataset;
    std::vector<double> betas; // empty = keep the dataset's own ratio
    std::vector<MethodSpec> methods;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    // Trainer settings shared by every cell.
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double clip_norm = 0.5;
    double lr_drop_fraction = 0.8;
    double lr_drop_factor = 0.1;
    std::vector<std::size_t> trunk = {32, 32, 16};
    std::size_t film_hidden = 128;
    std::uint64_t data_seed = 1234; // drives CSV subsampling only
    std::vector<double> recall_grid = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99};
    std::string out_dir = "results";

    void validate() const;
};

SweepSpec sweep_spec_from_json(const json& j);
json sweep_spec_to_json(const SweepSpec& spec);

// On-disk results: one directory per (beta, method, train-hyper) with one
// subdirectory per seed holding the checkpoint, the training trace, and one
// JSON report file per evaluation lambda. manifest.json indexes every cell;
// aggregate tables are derived from cell files alone and can be rebuilt at
// any time.
struct ResultStore {
    std::string root;
    json manifest;

    static ResultStore open(const std::string& root);
};

// Trains and evaluates every (beta x method x train-hyper x seed) cell,
// then writes the aggregate tables. Failures are recorded per cell
// (error.json) and do not stop the sweep. Cells run on `workers` threads;
// results are independent of the schedule.
ResultStore run_sweep(const SweepSpec& spec, unsigned workers = 1);

// Rebuilds aggregates/<metric>.csv and aggregates/summary.json from the
// cell files.
void write_aggregates(const ResultStore& store);

struct BestCell {
    std::string method;
    double beta = 0.0;
    std::string hyper;  // train-hyper axes, rendered as strings
    LambdaVec eval_lambda;
    double value = 0.0;
    std::string cell_dir;
};

// Best seed-averaged value of `metric` per method over all train-hypers and
// eval lambdas. direction is "max" or "min" (Brier wants min).
std::vector<BestCell> best_per_method(const ResultStore& store, const std::string& metric,
                                      const std::string& direction);

struct CurveSelection {
    std::string metric = "auc";
    std::string direction = "max";
    std::vector<std::string> methods; // empty = every method in the store
};

// For each selected method's best cell: per-seed ROC/PR curves, a
// precision-at-recall table over the sweep's recall grid, and one scatter
// row per evaluation lambda (the adaptability plot data). Written under
// <root>/curves/.
void emit_curves(const ResultStore& store, const CurveSelection& selection);

} // namespace lct
