#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lct/data.hpp"
#include "lct/film_net.hpp"
#include "lct/losses.hpp"
#include "lct/metrics.hpp"
#include "lct/optim.hpp"
#include "lct/sampler.hpp"

namespace lct {

// baseline: one fixed lambda, fed to both loss and network.
// lct: lambda drawn per mini-batch, fed to both loss and network.
// lct_no_film: lambda drawn per mini-batch, fed to the loss only; the
//              network never sees it and ignores it at inference.
enum class TrainMethod { baseline, lct, lct_no_film };

TrainMethod train_method_from_string(const std::string& s);
std::string to_string(TrainMethod m);

struct OptimizerConfig {
    enum class Base { sgd, adam };
    Base base = Base::sgd;
    bool sam = false;
    double lr = 0.05;
    double momentum = 0.9;
    double rho = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainConfig {
    TrainMethod method = TrainMethod::baseline;
    LossFamily family = LossFamily::vs;
    LambdaMapping mapping = LambdaMapping::full(LossFamily::vs);
    // Point masses for baseline; genuine pdfs for lct / lct_no_film.
    LambdaDistribution lambda_dist;
    OptimizerConfig optimizer;
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double clip_norm = 0.5;
    // Single step-down schedule: lr multiplied by lr_drop_factor once the
    // epoch index reaches lr_drop_fraction * epochs. Fraction >= 1 keeps the
    // learning rate constant.
    double lr_drop_fraction = 0.8;
    double lr_drop_factor = 0.1;
    std::vector<std::size_t> trunk = {32, 32, 16};
    std::size_t film_hidden = 128;
    std::uint64_t seed = 1;
    std::string trace_path; // JSON-lines training trace; empty disables it

    void validate() const;
};

struct TrainedModel {
    FilmMlpConfig net_config;
    std::vector<double> params;
    TrainConfig config;
    double beta = 1.0; // imbalance ratio frozen from the training set
    std::vector<double> epoch_losses;
    // Standardization replay data copied from the training set.
    std::vector<double> feat_mean;
    std::vector<double> feat_std;
    std::string pos_label;
    std::string neg_label;
};

// One full training run; deterministic given (config, dataset).
TrainedModel train(const TrainConfig& cfg, const Dataset& ds);

// Scalar slice of one evaluation. *_best values are maxima over all decision
// thresholds; the plain entries are taken at the default threshold t = 0
// (softmax 0.5). precision_at_recall99 is the best precision among
// thresholds reaching recall >= 0.99.
struct EvalScalars {
    double auc = 0.0;
    double ap = 0.0;
    double brier = 0.0;
    double f1_best = 0.0;
    double balanced_acc_best = 0.0;
    double precision_at_recall99 = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double precision = 0.0;
    double overall_acc = 0.0;
    double balanced_acc = 0.0;
    double f1 = 0.0;
    double g_mean = 0.0;
};

// Named access used by report tables; throws on unknown names.
double eval_scalar(const EvalScalars& s, const std::string& name);
const std::vector<std::string>& eval_scalar_names();

struct EvalReport {
    LambdaVec lambda;
    EvalScalars scalars;
    Curve roc;
    Curve pr;
};

// Scores the dataset once per grid entry. Baseline models accept only a
// singleton grid and substitute their stored training lambda for the entry;
// lct_no_film models ignore lambda entirely at forward time.
std::vector<EvalReport> evaluate(const TrainedModel& model, const Dataset& ds,
                                 const std::vector<LambdaVec>& lambda_grid);

// Raw positive-class scores for one lambda (the building block of evaluate).
ScoredSet score_dataset(const TrainedModel& model, const Dataset& ds,
                        const LambdaVec& lambda);

struct SeedAveragedReport {
    LambdaVec lambda;
    EvalScalars mean;
    std::vector<EvalScalars> per_seed;
};

// Arithmetic mean of each scalar across seeds; grids must match exactly.
// Curves stay with the per-seed reports.
std::vector<SeedAveragedReport>
seed_average(const std::vector<std::vector<EvalReport>>& reports_per_seed);

} // namespace lct
