#pragma once

#include <string>
#include <vector>

#include "lct/losses.hpp"
#include "lct/ndmath.hpp"

namespace lct {

// Feature/label table. The positive class is the minority by construction.
// feat_mean/feat_std record the standardization applied to features (all
// zeros / ones when no standardization took place) so models can replay it
// on fresh data.
struct Dataset {
    Matrix features;
    std::vector<Label> labels;
    std::vector<double> feat_mean;
    std::vector<double> feat_std;
    std::string pos_label; // source label strings for CSV data, empty otherwise
    std::string neg_label;

    long n_pos() const;
    long n_neg() const;
    double beta() const; // n_neg / n_pos
    void validate() const;
};

// Two isotropic Gaussian blobs in d dimensions; the class means sit at
// +/- (separation/2) along the normalized all-ones direction, so
// `separation` is the Euclidean distance between them regardless of d
// (smaller separation = more class overlap).
struct SyntheticSpec {
    std::size_t dim = 10;
    double separation = 2.0;
    double noise_neg = 1.0; // per-class isotropic standard deviations
    double noise_pos = 1.0;
    std::size_t n_majority = 5000;
    double beta_target = 100.0;
    std::size_t n_test_per_class = 1000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticData {
    Dataset train; // subsampled to beta_target
    Dataset test;  // balanced: n_test_per_class of each class
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Randomly drops minority samples until n_neg/n_pos matches beta (nearest
// integer count); majority rows are untouched and row order is preserved.
Dataset subsample_to_beta(const Dataset& ds, double beta, Rng& rng);

// Loads a headed CSV ("." decimal separator), maps the rarer label string to
// the positive class, and standardizes features to train-set mean/std
// (constant columns get std clamped to 1). The stats are stored on the
// returned Dataset for test-time reuse.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Same parse, but replays the label mapping and standardization statistics
// of `reference` (typically the training set) instead of computing fresh ones.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const Dataset& reference);

// Writes a dataset back out as CSV with the given label column name.
void write_csv(const Dataset& ds, const std::string& path,
               const std::string& label_column = "label");

} // namespace lct
