#pragma once

#include <array>
#include <string>
#include <vector>

namespace lct {

enum class Label : int { neg = 0, pos = 1 };

// Unnormalized two-class network outputs (z_neg, z_pos).
struct Logits {
    double z_neg = 0.0;
    double z_pos = 0.0;
};

// Gradient of a scalar loss with respect to both logits.
struct LogitGrad {
    double d_neg = 0.0;
    double d_pos = 0.0;
};

// Conditioning hyperparameter vector fed to both the loss and the model.
using LambdaVec = std::vector<double>;

enum class LossFamily { focal, vs };

LossFamily loss_family_from_string(const std::string& s);
std::string to_string(LossFamily f);

// Focal loss hyperparameters. The class weights are derived, not stored:
// alpha_pos = alpha, alpha_neg = 1 - alpha.
struct FocalParams {
    double alpha = 0.25; // in [0, 1]
    double phi = 2.0;    // >= 0, focus strength
    void validate() const;
};

// Vector-scaling loss hyperparameters. The affine logit factors are derived
// from (gamma, tau, beta): delta_c = (n_c/n_neg)^gamma, iota_c = tau*log(n_c/n).
struct VsParams {
    double gamma = 0.0; // >= 0, multiplicative factor exponent
    double tau = 0.0;   // >= 0, additive factor scale
    double beta = 1.0;  // imbalance ratio n_neg/n_pos, >= 1, frozen from the training set
    void validate() const;
};

// log(1 + e^x) without overflow for large |x|.
double softplus(double x);
double sigmoid(double x);

// The scalar margin governing the binary VS loss:
// eta = z_pos / beta^gamma - (z_neg + tau * log(beta)).
double vs_eta(const Logits& z, const VsParams& p);

// -alpha_y * (1 - p_y)^phi * log(p_y) with p_y the binary softmax score of
// the target class. Evaluated in log-space; never takes log of an exact 0.
double focal_loss(Label y, const Logits& z, const FocalParams& p);

// Two-class softmax form with explicit per-class affine factors derived
// from the given counts. Kept as the reference route for the simplified
// binary form below.
double vs_loss_full(Label y, const Logits& z, const VsParams& p,
                    long n_minus, long n_plus);

// Binary simplification: loss(neg) = softplus(eta), loss(pos) = softplus(-eta).
double vs_loss_binary(Label y, const Logits& z, const VsParams& p);

// Closed-form gradients of the two families with respect to the logits.
LogitGrad focal_grad(Label y, const Logits& z, const FocalParams& p);
LogitGrad vs_grad(Label y, const Logits& z, const VsParams& p);

// Family dispatch on a resolved two-entry hyperparameter vector:
// (alpha, phi) for focal, (gamma, tau) for vs. `beta` is only read by vs.
double loss_value(LossFamily family, Label y, const Logits& z,
                  const LambdaVec& lambda, double beta);
LogitGrad loss_grad(LossFamily family, Label y, const Logits& z,
                    const LambdaVec& lambda, double beta);

// Maps a (possibly lower-dimensional) lambda vector onto the two loss-family
// coordinates. Each coordinate either indexes into lambda or is pinned to a
// fixed value, so one-dimensional conditioning variants reuse the same path.
struct LambdaMapping {
    LossFamily family = LossFamily::vs;
    std::array<int, 2> lambda_index = {0, 1}; // < 0 means "use fixed[i]"
    std::array<double, 2> fixed = {0.0, 0.0};

    // Both coordinates drawn from lambda: lambda = (alpha, phi) or (gamma, tau).
    static LambdaMapping full(LossFamily family);
    // Single-coordinate lambda; `varying` selects which of the two family
    // coordinates lambda drives (0 or 1), the other is pinned to fixed_value.
    static LambdaMapping single(LossFamily family, int varying, double fixed_value);

    int lambda_dim() const;
    // Resolves to the family's (first, second) parameter pair.
    std::array<double, 2> resolve(const LambdaVec& lambda) const;
    void validate() const;
};

} // namespace lct
