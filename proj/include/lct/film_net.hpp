#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lct/losses.hpp"
#include "lct/ndmath.hpp"

namespace lct {

// Architecture of the predictor: a ReLU MLP trunk whose last hidden layer
// (width C = trunk.back()) is channel-wise modulated by a FiLM generator,
// followed by a linear head emitting two logits. The generator is a
// two-layer net lambda -> film_hidden -> 2C, split into scale sigma and
// shift mu; modulation applies f~ = sigma * f + mu elementwise.
struct FilmMlpConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> trunk = {32, 32, 16};
    std::size_t film_hidden = 128;
    std::size_t lambda_dim = 2;

    std::size_t channels() const { return trunk.back(); }
    void validate() const;
    std::size_t param_count() const;
};

// Cached intermediate values from one forward pass, consumed exactly once
// by backward().
struct ForwardTape {
    Matrix input;
    std::vector<Matrix> pre_acts;  // trunk pre-activations, one per layer
    std::vector<Matrix> acts;      // trunk post-ReLU activations
    std::vector<double> gen_pre;   // FiLM generator hidden pre-activation
    std::vector<double> gen_hidden;
    std::vector<double> sigma;
    std::vector<double> mu;
    Matrix modulated;              // sigma * h_last + mu
    LambdaVec lambda;
    bool film_enabled = false;
    std::size_t param_count = 0;
    bool consumed = false;
};

// All parameters live in one flat vector so optimizers and checkpoints can
// treat the network as a plain point in R^n. Layout: trunk (W, b) pairs in
// order, head (W, b), then generator (W1, b1, W2, b2).
class FilmMlp {
public:
    // He-uniform trunk/head; FiLM generator final layer zeroed with bias
    // emitting (sigma, mu) = (1, 0), so training starts at the
    // unconditioned network.
    FilmMlp(FilmMlpConfig config, Rng& rng);
    FilmMlp(FilmMlpConfig config, std::vector<double> params);

    const FilmMlpConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Flat-vector slice holding the FiLM generator parameters.
    std::size_t film_offset() const { return film_offset_; }
    std::size_t film_size() const { return params_.size() - film_offset_; }

    // Logits for a batch (one row per sample). A single lambda is shared by
    // the whole batch. With film_enabled = false the generator is bypassed
    // entirely (sigma = 1, mu = 0) and lambda is not read.
    Matrix forward(const Matrix& x, const LambdaVec& lambda, bool film_enabled,
                   ForwardTape* tape = nullptr) const;

    // Gradient of the mean per-sample loss with respect to every parameter.
    // `upstream` holds one row per sample: the gradient of that sample's
    // loss with respect to its two logits (unscaled; the batch mean is
    // applied here). Gradient flows through sigma and mu into the generator
    // when the tape was recorded with FiLM enabled.
    std::vector<double> backward(ForwardTape& tape, const Matrix& upstream) const;

private:
    void compute_layout();
    const double* piece(std::size_t offset) const { return params_.data() + offset; }

    FilmMlpConfig config_;
    std::vector<double> params_;
    // offsets into params_
    std::vector<std::size_t> trunk_w_, trunk_b_;
    std::size_t head_w_ = 0, head_b_ = 0;
    std::size_t gen_w1_ = 0, gen_b1_ = 0, gen_w2_ = 0, gen_b2_ = 0;
    std::size_t film_offset_ = 0;
};

// Thresholded decision rule: positive iff z_pos > z_neg + t (strict).
Label predict(const Logits& z, double t = 0.0);

// Softmax score of the positive class, p_pos = sigmoid(z_pos - z_neg).
double positive_score(const Logits& z);

} // namespace lct
