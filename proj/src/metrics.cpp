#include "lct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace lct {

long ScoredSet::n_pos() const {
    return std::count(labels.begin(), labels.end(), Label::pos);
}

long ScoredSet::n_neg() const {
    return static_cast<long>(labels.size()) - n_pos();
}

void ScoredSet::validate() const {
    if (scores.size() != labels.size())
        throw std::invalid_argument("ScoredSet: scores and labels differ in length");
    if (scores.empty())
        throw std::invalid_argument("ScoredSet: empty set");
    for (double s : scores)
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("ScoredSet: scores must lie in [0,1]");
}

Confusion confusion_at(const ScoredSet& s, double threshold) {
    s.validate();
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("confusion_at: threshold must lie in [0,1]");
    Confusion c;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        const bool pred_pos = s.scores[i] > threshold;
        if (s.labels[i] == Label::pos)
            pred_pos ? ++c.tp : ++c.fn;
        else
            pred_pos ? ++c.fp : ++c.tn;
    }
    return c;
}

std::vector<ThresholdStep> threshold_sweep(const ScoredSet& s) {
    s.validate();
    const long total_pos = s.n_pos();
    const long total_neg = s.n_neg();

    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });

    std::vector<ThresholdStep> steps;
    auto push = [&](double threshold, long tp, long fp) {
        steps.push_back({threshold, Confusion{tp, fp, total_neg - fp, total_pos - tp}});
    };
    push(1.0, 0, 0); // nothing predicted positive: score > 1 is impossible

    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double group_score = s.scores[order[i]];
        while (i < order.size() && s.scores[order[i]] == group_score) {
            if (s.labels[order[i]] == Label::pos) ++tp; else ++fp;
            ++i;
        }
        double threshold;
        if (i < order.size()) {
            threshold = 0.5 * (group_score + s.scores[order[i]]);
        } else {
            // Below the lowest score. When that score is exactly 0 the
            // strict rule cannot reach it inside [0,1]; a negative sentinel
            // keeps the step list strictly ordered.
            threshold = group_score > 0.0 ? 0.5 * group_score : -1.0;
        }
        push(threshold, tp, fp);
    }
    return steps;
}

ScalarMetrics scalar_metrics(const Confusion& c, double beta_f) {
    const long n_pos = c.n_pos();
    const long n_neg = c.n_neg();
    if (n_pos < 1 || n_neg < 1)
        throw std::invalid_argument("scalar_metrics: both classes must be present");
    ScalarMetrics m;
    m.tpr = static_cast<double>(c.tp) / n_pos;
    m.fpr = static_cast<double>(c.fp) / n_neg;
    m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    m.overall_acc = static_cast<double>(c.tp + c.tn) / (n_pos + n_neg);
    const double tnr = static_cast<double>(c.tn) / n_neg;
    m.balanced_acc = 0.5 * (m.tpr + tnr);
    const double recall = m.tpr;
    m.f1 = (m.precision + recall) > 0.0
               ? 2.0 * m.precision * recall / (m.precision + recall)
               : 0.0;
    const double b2 = beta_f * beta_f;
    const double fb_den = b2 * m.precision + recall;
    m.f_beta = fb_den > 0.0 ? (1.0 + b2) * m.precision * recall / fb_den : 0.0;
    m.g_mean = std::sqrt(m.tpr * tnr);
    return m;
}

std::pair<Curve, double> roc_auc(const ScoredSet& s) {
    const auto steps = threshold_sweep(s);
    const long n_pos = s.n_pos();
    const long n_neg = s.n_neg();
    if (n_pos < 1 || n_neg < 1)
        throw std::domain_error("roc_auc: undefined unless both classes are present");

    Curve curve;
    curve.points.reserve(steps.size());
    // Trapezoid area accumulated over raw counts: each tied group advances
    // tp and fp together, so ties contribute exactly half a pair each and
    // the result equals the Mann-Whitney statistic.
    long long twice_area = 0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& c = steps[k].confusion;
        curve.points.push_back({steps[k].threshold,
                                static_cast<double>(c.fp) / n_neg,
                                static_cast<double>(c.tp) / n_pos});
        if (k > 0) {
            const auto& prev = steps[k - 1].confusion;
            twice_area += static_cast<long long>(c.fp - prev.fp) * (prev.tp + c.tp);
        }
    }
    const double auc = static_cast<double>(twice_area) /
                       (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return {std::move(curve), auc};
}

std::pair<Curve, double> pr_ap(const ScoredSet& s) {
    const auto steps = threshold_sweep(s);
    const long n_pos = s.n_pos();
    if (n_pos < 1)
        throw std::domain_error("pr_ap: undefined without positive samples");

    Curve curve;
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 1; k < steps.size(); ++k) {
        const auto& c = steps[k].confusion;
        const double recall = static_cast<double>(c.tp) / n_pos;
        const double precision = static_cast<double>(c.tp) / (c.tp + c.fp);
        curve.points.push_back({steps[k].threshold, recall, precision});
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return {std::move(curve), ap};
}

double precision_at_recall(const ScoredSet& s, double min_recall) {
    if (!(min_recall > 0.0 && min_recall <= 1.0))
        throw std::invalid_argument("precision_at_recall: min_recall must lie in (0,1]");
    const auto steps = threshold_sweep(s);
    const long n_pos = s.n_pos();
    if (n_pos < 1)
        throw std::domain_error("precision_at_recall: undefined without positive samples");
    double best = 0.0;
    for (std::size_t k = 1; k < steps.size(); ++k) {
        const auto& c = steps[k].confusion;
        const double recall = static_cast<double>(c.tp) / n_pos;
        if (recall + 1e-15 >= min_recall) {
            const double precision = static_cast<double>(c.tp) / (c.tp + c.fp);
            best = std::max(best, precision);
        }
    }
    return best;
}

double brier(const ScoredSet& s) {
    s.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        const double y = s.labels[i] == Label::pos ? 1.0 : 0.0;
        const double d = y - s.scores[i];
        acc += d * d;
    }
    return acc / static_cast<double>(s.scores.size());
}

void write_curve_csv(const Curve& curve, std::ostream& out) {
    out << "threshold,x,y\n";
    char buf[96];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.x, p.y);
        out << buf;
    }
}

} // namespace lct
