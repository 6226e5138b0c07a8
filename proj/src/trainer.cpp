#include "lct/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lct {

TrainMethod train_method_from_string(const std::string& s) {
    if (s == "baseline") return TrainMethod::baseline;
    if (s == "lct") return TrainMethod::lct;
    if (s == "lct_no_film") return TrainMethod::lct_no_film;
    throw std::invalid_argument("unknown training method: '" + s + "'");
}

std::string to_string(TrainMethod m) {
    switch (m) {
    case TrainMethod::baseline: return "baseline";
    case TrainMethod::lct: return "lct";
    case TrainMethod::lct_no_film: return "lct_no_film";
    }
    return "?";
}

void TrainConfig::validate() const {
    mapping.validate();
    if (mapping.family != family)
        throw std::invalid_argument("TrainConfig: mapping family does not match loss family");
    if (static_cast<int>(lambda_dist.coords.size()) != mapping.lambda_dim())
        throw std::invalid_argument("TrainConfig: lambda distribution has " +
                                    std::to_string(lambda_dist.coords.size()) +
                                    " coordinates, mapping expects " +
                                    std::to_string(mapping.lambda_dim()));
    if (method == TrainMethod::baseline && !lambda_dist.is_point())
        throw std::invalid_argument("TrainConfig: baseline requires a point lambda");
    if (epochs == 0 || batch_size == 0)
        throw std::invalid_argument("TrainConfig: epochs and batch_size must be positive");
    if (!(clip_norm > 0.0))
        throw std::invalid_argument("TrainConfig: clip_norm must be positive");
    if (!(optimizer.lr > 0.0))
        throw std::invalid_argument("TrainConfig: learning rate must be positive");
    // Sampled hyperparameters must stay inside the family's domain.
    for (std::size_t i = 0; i < lambda_dist.coords.size(); ++i) {
        const auto& pdf = lambda_dist.coords[i];
        if (pdf.a() < 0.0)
            throw std::invalid_argument("TrainConfig: lambda coordinate " + std::to_string(i) +
                                        " can go negative, outside the loss domain");
        if (family == LossFamily::focal) {
            // Find which focal coordinate this lambda entry drives.
            for (int k = 0; k < 2; ++k)
                if (mapping.lambda_index[k] == static_cast<int>(i) && k == 0 && pdf.b() > 1.0)
                    throw std::invalid_argument("TrainConfig: alpha distribution exceeds [0,1]");
        }
    }
}

namespace {

Optimizer make_inner(const OptimizerConfig& oc) {
    if (oc.base == OptimizerConfig::Base::sgd)
        return Optimizer{SgdState{oc.lr, oc.momentum, {}}};
    return Optimizer{AdamState{oc.lr, oc.adam_beta1, oc.adam_beta2, oc.adam_eps, {}, {}, 0}};
}

void set_lr(Optimizer& opt, double lr) {
    if (auto* sgd = std::get_if<SgdState>(&opt.state))
        sgd->lr = lr;
    else
        std::get<AdamState>(opt.state).lr = lr;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx,
                   std::size_t begin, std::size_t end) {
    Matrix out(end - begin, src.cols());
    for (std::size_t i = begin; i < end; ++i)
        std::copy(src.row(idx[i]), src.row(idx[i]) + src.cols(), out.row(i - begin));
    return out;
}

struct BatchEval {
    double mean_loss = 0.0;
    ParamVec grad;
};

BatchEval batch_loss_and_grad(const FilmMlp& net, const ParamVec& theta,
                              const Matrix& x, const std::vector<Label>& y,
                              const LambdaVec& lambda2, LossFamily family, double beta,
                              const LambdaVec& net_lambda, bool film_enabled) {
    FilmMlp probe(net.config(), theta);
    ForwardTape tape;
    const Matrix logits = probe.forward(x, net_lambda, film_enabled, &tape);
    const std::size_t n = x.rows();
    Matrix upstream(n, 2);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Logits z{logits(i, 0), logits(i, 1)};
        loss_sum += loss_value(family, y[i], z, lambda2, beta);
        const LogitGrad g = loss_grad(family, y[i], z, lambda2, beta);
        upstream(i, 0) = g.d_neg;
        upstream(i, 1) = g.d_pos;
    }
    BatchEval out;
    out.mean_loss = loss_sum / static_cast<double>(n);
    out.grad = probe.backward(tape, upstream);
    return out;
}

std::string json_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

TrainedModel train(const TrainConfig& cfg, const Dataset& ds) {
    cfg.validate();
    ds.validate();
    const double beta = ds.beta();
    const std::size_t n = ds.labels.size();

    Rng root(cfg.seed);
    Rng init_rng = root.split(0);
    Rng shuffle_rng = root.split(1);
    Rng lambda_rng = root.split(2);

    FilmMlpConfig net_cfg;
    net_cfg.input_dim = ds.features.cols();
    net_cfg.trunk = cfg.trunk;
    net_cfg.film_hidden = cfg.film_hidden;
    net_cfg.lambda_dim = static_cast<std::size_t>(cfg.mapping.lambda_dim());
    FilmMlp net(net_cfg, init_rng);

    const bool film_enabled = cfg.method != TrainMethod::lct_no_film;
    const bool use_sam = cfg.optimizer.sam;
    SamConfig sam{cfg.optimizer.rho, make_inner(cfg.optimizer)};
    Optimizer plain = make_inner(cfg.optimizer);

    std::ofstream trace;
    if (!cfg.trace_path.empty()) {
        trace.open(cfg.trace_path);
        if (!trace)
            throw std::runtime_error("train: cannot open trace file '" + cfg.trace_path + "'");
    }

    const std::size_t drop_epoch = cfg.lr_drop_fraction >= 1.0
        ? cfg.epochs
        : static_cast<std::size_t>(static_cast<double>(cfg.epochs) * cfg.lr_drop_fraction);

    ParamVec theta = net.params();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> epoch_losses;
    epoch_losses.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.optimizer.lr * (epoch >= drop_epoch ? cfg.lr_drop_factor : 1.0);
        set_lr(use_sam ? sam.inner : plain, lr);
        shuffle_indices(order, shuffle_rng);

        double loss_sum = 0.0;
        double grad_norm_sum = 0.0, grad_norm_max = 0.0;
        LambdaVec lambda_sum(cfg.lambda_dist.coords.size(), 0.0);
        std::size_t batches = 0;

        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, n);
            const Matrix x = gather_rows(ds.features, order, begin, end);
            std::vector<Label> y(end - begin);
            for (std::size_t i = begin; i < end; ++i) y[i - begin] = ds.labels[order[i]];

            // One lambda per mini-batch, shared by loss and (when enabled) net.
            const LambdaVec lambda = sample_lambda(cfg.lambda_dist, lambda_rng);
            const auto lambda2_arr = cfg.mapping.resolve(lambda);
            const LambdaVec lambda2{lambda2_arr[0], lambda2_arr[1]};

            double pre_clip_norm = -1.0; // recorded on the first objective call
            auto lag = [&](const ParamVec& p) {
                BatchEval ev = batch_loss_and_grad(net, p, x, y, lambda2, cfg.family, beta,
                                                   lambda, film_enabled);
                if (pre_clip_norm < 0.0) pre_clip_norm = l2_norm(ev.grad);
                return std::make_pair(ev.mean_loss, std::move(ev.grad));
            };

            auto abort_with = [&](const std::string& why) {
                std::string lam;
                for (std::size_t i = 0; i < lambda.size(); ++i)
                    lam += (i ? "," : "") + json_number(lambda[i]);
                throw std::runtime_error("train: " + why + " at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batches) + ", lambda (" + lam +
                                         "), grad norm " + json_number(pre_clip_norm));
            };

            double batch_loss;
            try {
                if (use_sam) {
                    batch_loss = sam_step(sam, theta, lag, cfg.clip_norm);
                } else {
                    auto [l0, g0] = lag(theta);
                    batch_loss = l0;
                    ParamVec g = clip_grad(std::move(g0), cfg.clip_norm);
                    plain.step(theta, g);
                }
            } catch (const std::invalid_argument& e) {
                // Divergence surfaces as non-finite logits inside the loss.
                abort_with(std::string("loss evaluation failed (") + e.what() + ")");
                throw; // unreachable
            }

            if (!std::isfinite(batch_loss))
                abort_with("non-finite loss");

            loss_sum += batch_loss * static_cast<double>(end - begin);
            grad_norm_sum += pre_clip_norm;
            grad_norm_max = std::max(grad_norm_max, pre_clip_norm);
            for (std::size_t i = 0; i < lambda.size(); ++i) lambda_sum[i] += lambda[i];
            ++batches;
        }

        const double epoch_loss = loss_sum / static_cast<double>(n);
        epoch_losses.push_back(epoch_loss);
        if (trace.is_open()) {
            trace << "{\"epoch\":" << epoch << ",\"mean_loss\":" << json_number(epoch_loss)
                  << ",\"lr\":" << json_number(lr)
                  << ",\"grad_norm_mean\":"
                  << json_number(grad_norm_sum / static_cast<double>(batches))
                  << ",\"grad_norm_max\":" << json_number(grad_norm_max)
                  << ",\"lambda_mean\":[";
            for (std::size_t i = 0; i < lambda_sum.size(); ++i)
                trace << (i ? "," : "")
                      << json_number(lambda_sum[i] / static_cast<double>(batches));
            trace << "]}\n";
        }
    }

    TrainedModel model;
    model.net_config = net_cfg;
    model.params = std::move(theta);
    model.config = cfg;
    model.beta = beta;
    model.epoch_losses = std::move(epoch_losses);
    model.feat_mean = ds.feat_mean;
    model.feat_std = ds.feat_std;
    model.pos_label = ds.pos_label;
    model.neg_label = ds.neg_label;
    return model;
}

ScoredSet score_dataset(const TrainedModel& model, const Dataset& ds,
                        const LambdaVec& lambda) {
    FilmMlp net(model.net_config, model.params);
    const bool film_enabled = model.config.method != TrainMethod::lct_no_film;
    const Matrix logits = net.forward(ds.features, lambda, film_enabled);
    ScoredSet set;
    set.scores.reserve(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        set.scores.push_back(positive_score({logits(i, 0), logits(i, 1)}));
    set.labels = ds.labels;
    return set;
}

std::vector<EvalReport> evaluate(const TrainedModel& model, const Dataset& ds,
                                 const std::vector<LambdaVec>& lambda_grid) {
    if (lambda_grid.empty())
        throw std::invalid_argument("evaluate: empty lambda grid");
    const std::size_t lambda_dim = model.net_config.lambda_dim;
    const bool baseline = model.config.method == TrainMethod::baseline;
    if (baseline && lambda_grid.size() != 1)
        throw std::invalid_argument("evaluate: baseline models take a singleton lambda grid");
    for (const auto& l : lambda_grid)
        if (l.size() != lambda_dim)
            throw std::invalid_argument("evaluate: lambda grid entry has size " +
                                        std::to_string(l.size()) + ", expected " +
                                        std::to_string(lambda_dim));

    std::vector<EvalReport> reports;
    reports.reserve(lambda_grid.size());
    for (const auto& grid_lambda : lambda_grid) {
        // Baseline models always run at their stored training lambda; the
        // supplied entry is ignored at forward time.
        const LambdaVec lambda =
            baseline ? model.config.lambda_dist.point_value() : grid_lambda;
        const ScoredSet scored = score_dataset(model, ds, lambda);

        EvalReport rep;
        rep.lambda = lambda;
        auto [roc_curve, auc] = roc_auc(scored);
        auto [pr_curve, ap] = pr_ap(scored);
        rep.roc = std::move(roc_curve);
        rep.pr = std::move(pr_curve);
        rep.scalars.auc = auc;
        rep.scalars.ap = ap;
        rep.scalars.brier = brier(scored);
        rep.scalars.precision_at_recall99 = precision_at_recall(scored, 0.99);

        double best_f1 = 0.0, best_bal = 0.0;
        for (const auto& step : threshold_sweep(scored)) {
            const ScalarMetrics m = scalar_metrics(step.confusion);
            best_f1 = std::max(best_f1, m.f1);
            best_bal = std::max(best_bal, m.balanced_acc);
        }
        rep.scalars.f1_best = best_f1;
        rep.scalars.balanced_acc_best = best_bal;

        const ScalarMetrics at_default = scalar_metrics(confusion_at(scored, 0.5));
        rep.scalars.tpr = at_default.tpr;
        rep.scalars.fpr = at_default.fpr;
        rep.scalars.precision = at_default.precision;
        rep.scalars.overall_acc = at_default.overall_acc;
        rep.scalars.balanced_acc = at_default.balanced_acc;
        rep.scalars.f1 = at_default.f1;
        rep.scalars.g_mean = at_default.g_mean;

        reports.push_back(std::move(rep));
    }
    return reports;
}

namespace {

struct ScalarField {
    const char* name;
    double EvalScalars::* member;
};

constexpr ScalarField kScalarFields[] = {
    {"auc", &EvalScalars::auc},
    {"ap", &EvalScalars::ap},
    {"brier", &EvalScalars::brier},
    {"f1_best", &EvalScalars::f1_best},
    {"balanced_acc_best", &EvalScalars::balanced_acc_best},
    {"precision_at_recall99", &EvalScalars::precision_at_recall99},
    {"tpr", &EvalScalars::tpr},
    {"fpr", &EvalScalars::fpr},
    {"precision", &EvalScalars::precision},
    {"overall_acc", &EvalScalars::overall_acc},
    {"balanced_acc", &EvalScalars::balanced_acc},
    {"f1", &EvalScalars::f1},
    {"g_mean", &EvalScalars::g_mean},
};

} // namespace

double eval_scalar(const EvalScalars& s, const std::string& name) {
    for (const auto& f : kScalarFields)
        if (name == f.name) return s.*(f.member);
    throw std::invalid_argument("unknown metric: '" + name + "'");
}

const std::vector<std::string>& eval_scalar_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : kScalarFields) v.emplace_back(f.name);
        return v;
    }();
    return names;
}

std::vector<SeedAveragedReport>
seed_average(const std::vector<std::vector<EvalReport>>& reports_per_seed) {
    if (reports_per_seed.empty())
        throw std::invalid_argument("seed_average: need at least one seed");
    const std::size_t grid = reports_per_seed.front().size();
    for (const auto& seed_reports : reports_per_seed) {
        if (seed_reports.size() != grid)
            throw std::invalid_argument("seed_average: seeds have mismatched lambda grids");
        for (std::size_t k = 0; k < grid; ++k)
            if (seed_reports[k].lambda != reports_per_seed.front()[k].lambda)
                throw std::invalid_argument("seed_average: seeds have mismatched lambda grids");
    }

    const double inv = 1.0 / static_cast<double>(reports_per_seed.size());
    std::vector<SeedAveragedReport> out(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        out[k].lambda = reports_per_seed.front()[k].lambda;
        for (const auto& seed_reports : reports_per_seed)
            out[k].per_seed.push_back(seed_reports[k].scalars);
        for (const auto& f : kScalarFields) {
            double acc = 0.0;
            for (const auto& s : out[k].per_seed) acc += s.*(f.member);
            out[k].mean.*(f.member) = acc * inv;
        }
    }
    return out;
}

} // namespace lct
