#pragma once

#include <iosfwd>
#include <vector>

#include "lct/losses.hpp"

namespace lct {

// Scored test set: per-sample positive-class probabilities plus labels.
struct ScoredSet {
    std::vector<double> scores; // p_pos in [0, 1]
    std::vector<Label> labels;

    long n_pos() const;
    long n_neg() const;
    void validate() const;
};

struct Confusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;
    long n_pos() const { return tp + fn; }
    long n_neg() const { return fp + tn; }
};

// Counts at a single decision threshold; predicted positive iff score > t
// (strict, matching the thresholded logit rule).
Confusion confusion_at(const ScoredSet& s, double threshold);

// One point per distinct-score group, thresholds descending. The first step
// is the empty prediction set; each later step admits one more group of
// tied scores. Thresholds sit strictly between distinct score values so
// tied scores always move together.
struct ThresholdStep {
    double threshold = 0.0;
    Confusion confusion;
};
std::vector<ThresholdStep> threshold_sweep(const ScoredSet& s);

struct ScalarMetrics {
    double tpr = 0.0;          // recall / minority-class accuracy
    double fpr = 0.0;
    double precision = 0.0;    // defined as 0 when nothing is predicted positive
    double overall_acc = 0.0;
    double balanced_acc = 0.0; // 0.5 * (tp/n_pos + tn/n_neg)
    double f1 = 0.0;
    double f_beta = 0.0;       // beta_f = recall-vs-precision importance ratio
    double g_mean = 0.0;       // sqrt(tpr * tnr)
};
ScalarMetrics scalar_metrics(const Confusion& c, double beta_f = 1.0);

// Ordered curve points; x nondecreasing, thresholds strictly decreasing.
struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0;
    double y = 0.0;
};
struct Curve {
    std::vector<CurvePoint> points;
};

// ROC over all distinct score thresholds plus endpoints; the area uses the
// trapezoid rule, accumulated over integer counts so tied scores contribute
// exactly half. Requires both classes present.
std::pair<Curve, double> roc_auc(const ScoredSet& s);

// Precision-recall points at each threshold step and the step-sum
// average precision AP = sum (R_n - R_{n-1}) P_n, no interpolation.
// Requires at least one positive.
std::pair<Curve, double> pr_ap(const ScoredSet& s);

// Maximum precision over all thresholds whose recall >= min_recall.
double precision_at_recall(const ScoredSet& s, double min_recall);

// Mean squared error between labels (0/1) and scores; lower is better.
double brier(const ScoredSet& s);

// CSV with header "threshold,x,y".
void write_curve_csv(const Curve& curve, std::ostream& out);

} // namespace lct
