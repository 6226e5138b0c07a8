#include "lct/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lct {

long Dataset::n_pos() const {
    return std::count(labels.begin(), labels.end(), Label::pos);
}

long Dataset::n_neg() const {
    return static_cast<long>(labels.size()) - n_pos();
}

double Dataset::beta() const {
    const long np = n_pos();
    if (np == 0)
        throw std::invalid_argument("Dataset: beta undefined without positive samples");
    return static_cast<double>(n_neg()) / static_cast<double>(np);
}

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw std::invalid_argument("Dataset: feature rows and labels differ in length");
    if (!features.is_finite())
        throw std::invalid_argument("Dataset: features contain NaN/Inf");
    if (n_pos() == 0 || n_neg() == 0)
        throw std::invalid_argument("Dataset: both classes must be present");
    if (n_pos() > n_neg())
        throw std::invalid_argument("Dataset: positive class must be the minority");
}

void SyntheticSpec::validate() const {
    if (dim == 0)
        throw std::invalid_argument("SyntheticSpec: dim must be positive");
    if (!(noise_neg > 0.0) || !(noise_pos > 0.0))
        throw std::invalid_argument("SyntheticSpec: degenerate covariance (noise must be > 0)");
    if (!(beta_target >= 1.0))
        throw std::invalid_argument("SyntheticSpec: beta_target must be >= 1");
    if (n_majority == 0 || static_cast<double>(n_majority) / beta_target < 1.0)
        throw std::invalid_argument("SyntheticSpec: n_majority/beta_target must be >= 1");
    if (n_test_per_class == 0)
        throw std::invalid_argument("SyntheticSpec: n_test_per_class must be positive");
}

namespace {

void fill_gaussian_rows(Matrix& m, std::size_t row_begin, std::size_t count,
                        double mean_shift, double noise, Rng& rng) {
    const std::size_t d = m.cols();
    const double shift = mean_shift / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < count; ++i) {
        double* row = m.row(row_begin + i);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = shift + noise * rng.normal();
    }
}

Dataset make_blobs(const SyntheticSpec& spec, std::size_t n_neg, std::size_t n_pos, Rng& rng) {
    Dataset ds;
    ds.features = Matrix(n_neg + n_pos, spec.dim);
    ds.labels.assign(n_neg + n_pos, Label::neg);
    fill_gaussian_rows(ds.features, 0, n_neg, -spec.separation / 2.0, spec.noise_neg, rng);
    fill_gaussian_rows(ds.features, n_neg, n_pos, spec.separation / 2.0, spec.noise_pos, rng);
    std::fill(ds.labels.begin() + n_neg, ds.labels.end(), Label::pos);
    ds.feat_mean.assign(spec.dim, 0.0);
    ds.feat_std.assign(spec.dim, 1.0);
    return ds;
}

} // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng root(spec.seed);
    Rng train_rng = root.split(0);
    Rng test_rng = root.split(1);
    Rng subsample_rng = root.split(2);

    SyntheticData out;
    // Balanced pool first, then thin the minority; beta only affects the
    // number of minority samples in the training set.
    Dataset pool = make_blobs(spec, spec.n_majority, spec.n_majority, train_rng);
    out.train = spec.beta_target > 1.0
                    ? subsample_to_beta(pool, spec.beta_target, subsample_rng)
                    : std::move(pool);
    out.test = make_blobs(spec, spec.n_test_per_class, spec.n_test_per_class, test_rng);
    return out;
}

Dataset subsample_to_beta(const Dataset& ds, double beta, Rng& rng) {
    if (!(beta >= 1.0))
        throw std::invalid_argument("subsample_to_beta: beta must be >= 1");
    const long n_neg = ds.n_neg();
    const long keep = std::llround(static_cast<double>(n_neg) / beta);
    if (keep < 1)
        throw std::invalid_argument("subsample_to_beta: target beta " + std::to_string(beta) +
                                    " unachievable with " + std::to_string(n_neg) +
                                    " majority samples");
    std::vector<std::size_t> pos_rows;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] == Label::pos) pos_rows.push_back(i);
    if (keep > static_cast<long>(pos_rows.size()))
        throw std::invalid_argument("subsample_to_beta: dataset has only " +
                                    std::to_string(pos_rows.size()) +
                                    " minority samples, need " + std::to_string(keep));

    shuffle_indices(pos_rows, rng);
    pos_rows.resize(static_cast<std::size_t>(keep));
    std::vector<bool> keep_row(ds.labels.size(), false);
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] == Label::neg) keep_row[i] = true;
    for (std::size_t r : pos_rows) keep_row[r] = true;

    Dataset out;
    out.features = Matrix(n_neg + keep, ds.features.cols());
    out.labels.reserve(n_neg + keep);
    std::size_t w = 0;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (!keep_row[i]) continue;
        std::copy(ds.features.row(i), ds.features.row(i) + ds.features.cols(),
                  out.features.row(w));
        out.labels.push_back(ds.labels[i]);
        ++w;
    }
    out.feat_mean = ds.feat_mean;
    out.feat_std = ds.feat_std;
    out.pos_label = ds.pos_label;
    out.neg_label = ds.neg_label;
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.push_back("");
    return fields;
}

std::string strip(const std::string& s) {
    std::size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    std::size_t last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct RawCsv {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
};

RawCsv parse_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || strip(line).empty())
        throw std::invalid_argument("load_csv: '" + path + "' is empty or lacks a header row");
    auto header = split_csv_line(line);
    for (auto& h : header) h = strip(h);
    long label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = static_cast<long>(i);
    if (label_idx < 0)
        throw std::invalid_argument("load_csv: no column named '" + label_column + "' in '" +
                                    path + "'");

    RawCsv raw;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<long>(i) != label_idx) raw.feature_names.push_back(header[i]);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("load_csv: line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string value = strip(fields[i]);
            if (static_cast<long>(i) == label_idx) {
                if (value.empty())
                    throw std::invalid_argument("load_csv: missing label at line " +
                                                std::to_string(line_no));
                raw.raw_labels.push_back(value);
                continue;
            }
            if (value.empty())
                throw std::invalid_argument("load_csv: missing value at line " +
                                            std::to_string(line_no) + ", column '" +
                                            header[i] + "'");
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != value.size() || !std::isfinite(v))
                throw std::invalid_argument("load_csv: non-numeric value '" + value +
                                            "' at line " + std::to_string(line_no) +
                                            ", column '" + header[i] + "'");
            row.push_back(v);
        }
        raw.rows.push_back(std::move(row));
    }
    if (raw.rows.empty())
        throw std::invalid_argument("load_csv: '" + path + "' has no data rows");
    return raw;
}

Dataset assemble(const RawCsv& raw, const std::string& pos_label,
                 const std::string& neg_label) {
    Dataset ds;
    const std::size_t n = raw.rows.size();
    const std::size_t d = raw.rows[0].size();
    ds.features = Matrix(n, d);
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(raw.rows[i].begin(), raw.rows[i].end(), ds.features.row(i));
        if (raw.raw_labels[i] == pos_label)
            ds.labels.push_back(Label::pos);
        else if (raw.raw_labels[i] == neg_label)
            ds.labels.push_back(Label::neg);
        else
            throw std::invalid_argument("load_csv: unexpected label '" + raw.raw_labels[i] +
                                        "' (classes are '" + pos_label + "' and '" +
                                        neg_label + "')");
    }
    ds.pos_label = pos_label;
    ds.neg_label = neg_label;
    return ds;
}

void apply_standardization(Dataset& ds, const std::vector<double>& mean,
                           const std::vector<double>& stdev) {
    const std::size_t n = ds.features.rows();
    const std::size_t d = ds.features.cols();
    if (mean.size() != d || stdev.size() != d)
        throw std::invalid_argument("load_csv: standardization stats have wrong dimension");
    for (std::size_t i = 0; i < n; ++i) {
        double* row = ds.features.row(i);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = (row[j] - mean[j]) / stdev[j];
    }
    ds.feat_mean = mean;
    ds.feat_std = stdev;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    RawCsv raw = parse_csv(path, label_column);

    std::map<std::string, long> counts;
    for (const auto& l : raw.raw_labels) ++counts[l];
    if (counts.size() != 2)
        throw std::invalid_argument("load_csv: expected exactly 2 classes in '" + label_column +
                                    "', found " + std::to_string(counts.size()));
    // Rarer label becomes the positive class; ties break toward the
    // lexicographically larger string so the mapping stays deterministic.
    auto it = counts.begin();
    auto [label_a, count_a] = *it;
    auto [label_b, count_b] = *std::next(it);
    std::string pos = count_a < count_b ? label_a : label_b;
    std::string neg = count_a < count_b ? label_b : label_a;
    if (count_a == count_b) {
        pos = std::max(label_a, label_b);
        neg = std::min(label_a, label_b);
    }

    Dataset ds = assemble(raw, pos, neg);
    const std::size_t n = ds.features.rows();
    const std::size_t d = ds.features.cols();
    std::vector<double> mean(d, 0.0), stdev(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += ds.features(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = ds.features(i, j) - mean[j];
            stdev[j] += dlt * dlt;
        }
    for (double& v : stdev) {
        v = std::sqrt(v / static_cast<double>(n));
        if (v < 1e-12) v = 1.0; // constant column: clamp so the feature maps to 0
    }
    apply_standardization(ds, mean, stdev);
    return ds;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const Dataset& reference) {
    if (reference.pos_label.empty())
        throw std::invalid_argument("load_csv: reference dataset carries no label mapping");
    RawCsv raw = parse_csv(path, label_column);
    Dataset ds = assemble(raw, reference.pos_label, reference.neg_label);
    apply_standardization(ds, reference.feat_mean, reference.feat_std);
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
    const std::size_t d = ds.features.cols();
    for (std::size_t j = 0; j < d; ++j) out << "x" << j << ",";
    out << label_column << "\n";
    char buf[40];
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
            out << buf << ",";
        }
        out << (ds.labels[i] == Label::pos ? 1 : 0) << "\n";
    }
}

} // namespace lct
