#include "lct/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lct {

LossFamily loss_family_from_string(const std::string& s) {
    if (s == "focal") return LossFamily::focal;
    if (s == "vs") return LossFamily::vs;
    throw std::invalid_argument("unknown loss family: '" + s + "' (expected 'focal' or 'vs')");
}

std::string to_string(LossFamily f) {
    return f == LossFamily::focal ? "focal" : "vs";
}

void FocalParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("FocalParams: alpha must lie in [0,1], got " +
                                    std::to_string(alpha));
    if (!(phi >= 0.0))
        throw std::invalid_argument("FocalParams: phi must be >= 0, got " +
                                    std::to_string(phi));
}

void VsParams::validate() const {
    if (!(gamma >= 0.0))
        throw std::invalid_argument("VsParams: gamma must be >= 0, got " +
                                    std::to_string(gamma));
    if (!(tau >= 0.0))
        throw std::invalid_argument("VsParams: tau must be >= 0, got " +
                                    std::to_string(tau));
    if (!(beta >= 1.0))
        throw std::invalid_argument("VsParams: beta must be >= 1, got " +
                                    std::to_string(beta));
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

void check_finite(const Logits& z) {
    if (!std::isfinite(z.z_neg) || !std::isfinite(z.z_pos))
        throw std::invalid_argument("loss: non-finite logits");
}

} // namespace

double vs_eta(const Logits& z, const VsParams& p) {
    return z.z_pos / std::pow(p.beta, p.gamma) - (z.z_neg + p.tau * std::log(p.beta));
}

double focal_loss(Label y, const Logits& z, const FocalParams& p) {
    check_finite(z);
    p.validate();
    // Margin of the target class; p_y = sigmoid(m).
    const double m = (y == Label::pos) ? z.z_pos - z.z_neg : z.z_neg - z.z_pos;
    const double alpha_y = (y == Label::pos) ? p.alpha : 1.0 - p.alpha;
    const double one_minus_p = sigmoid(-m);
    const double neg_log_p = softplus(-m);
    return alpha_y * std::pow(one_minus_p, p.phi) * neg_log_p;
}

double vs_loss_full(Label y, const Logits& z, const VsParams& p,
                    long n_minus, long n_plus) {
    check_finite(z);
    p.validate();
    if (n_plus <= 0)
        throw std::invalid_argument("vs_loss_full: n_plus must be positive (iota undefined)");
    if (n_minus <= 0)
        throw std::invalid_argument("vs_loss_full: n_minus must be positive");
    const double n = static_cast<double>(n_minus) + static_cast<double>(n_plus);
    const double delta_neg = 1.0; // (n_neg/n_neg)^gamma
    const double delta_pos = std::pow(static_cast<double>(n_plus) / n_minus, p.gamma);
    const double iota_neg = p.tau * std::log(n_minus / n);
    const double iota_pos = p.tau * std::log(n_plus / n);
    const double s_neg = delta_neg * z.z_neg + iota_neg;
    const double s_pos = delta_pos * z.z_pos + iota_pos;
    const double s_y = (y == Label::pos) ? s_pos : s_neg;
    const double hi = std::max(s_neg, s_pos);
    const double lse = hi + std::log(std::exp(s_neg - hi) + std::exp(s_pos - hi));
    return lse - s_y;
}

double vs_loss_binary(Label y, const Logits& z, const VsParams& p) {
    check_finite(z);
    p.validate();
    const double eta = vs_eta(z, p);
    return (y == Label::neg) ? softplus(eta) : softplus(-eta);
}

LogitGrad focal_grad(Label y, const Logits& z, const FocalParams& p) {
    check_finite(z);
    p.validate();
    const double m = (y == Label::pos) ? z.z_pos - z.z_neg : z.z_neg - z.z_pos;
    const double alpha_y = (y == Label::pos) ? p.alpha : 1.0 - p.alpha;
    const double py = sigmoid(m);
    const double q = sigmoid(-m); // 1 - p_y
    const double log_p = -softplus(-m);
    // d/dm of alpha_y*(1-p)^phi*(-log p), with the (1-p)^(phi-1) pole factored out.
    const double dm = alpha_y * (p.phi * py * std::pow(q, p.phi) * log_p -
                                 std::pow(q, p.phi + 1.0));
    if (y == Label::pos) return {-dm, dm};
    return {dm, -dm};
}

LogitGrad vs_grad(Label y, const Logits& z, const VsParams& p) {
    check_finite(z);
    p.validate();
    const double eta = vs_eta(z, p);
    const double scale_pos = 1.0 / std::pow(p.beta, p.gamma); // d(eta)/d(z_pos)
    if (y == Label::neg) {
        const double s = sigmoid(eta); // d softplus(eta)/d eta
        return {-s, scale_pos * s};
    }
    const double s = sigmoid(-eta);
    return {s, -scale_pos * s};
}

namespace {

void check_lambda_pair(const LambdaVec& lambda) {
    if (lambda.size() != 2)
        throw std::invalid_argument("loss dispatch expects a resolved 2-entry lambda, got size " +
                                    std::to_string(lambda.size()));
}

} // namespace

double loss_value(LossFamily family, Label y, const Logits& z,
                  const LambdaVec& lambda, double beta) {
    check_lambda_pair(lambda);
    switch (family) {
    case LossFamily::focal:
        return focal_loss(y, z, FocalParams{lambda[0], lambda[1]});
    case LossFamily::vs:
        return vs_loss_binary(y, z, VsParams{lambda[0], lambda[1], beta});
    }
    throw std::invalid_argument("loss_value: unknown loss family");
}

LogitGrad loss_grad(LossFamily family, Label y, const Logits& z,
                    const LambdaVec& lambda, double beta) {
    check_lambda_pair(lambda);
    switch (family) {
    case LossFamily::focal:
        return focal_grad(y, z, FocalParams{lambda[0], lambda[1]});
    case LossFamily::vs:
        return vs_grad(y, z, VsParams{lambda[0], lambda[1], beta});
    }
    throw std::invalid_argument("loss_grad: unknown loss family");
}

LambdaMapping LambdaMapping::full(LossFamily family) {
    LambdaMapping m;
    m.family = family;
    m.lambda_index = {0, 1};
    return m;
}

LambdaMapping LambdaMapping::single(LossFamily family, int varying, double fixed_value) {
    if (varying != 0 && varying != 1)
        throw std::invalid_argument("LambdaMapping::single: varying must be 0 or 1");
    LambdaMapping m;
    m.family = family;
    m.lambda_index = {varying == 0 ? 0 : -1, varying == 1 ? 0 : -1};
    m.fixed = {varying == 0 ? 0.0 : fixed_value, varying == 1 ? 0.0 : fixed_value};
    return m;
}

int LambdaMapping::lambda_dim() const {
    int dim = 0;
    for (int i : lambda_index) dim = std::max(dim, i + 1);
    return dim;
}

std::array<double, 2> LambdaMapping::resolve(const LambdaVec& lambda) const {
    if (static_cast<int>(lambda.size()) != lambda_dim())
        throw std::invalid_argument("LambdaMapping: lambda has size " +
                                    std::to_string(lambda.size()) + ", expected " +
                                    std::to_string(lambda_dim()));
    std::array<double, 2> out{};
    for (int i = 0; i < 2; ++i)
        out[i] = lambda_index[i] >= 0 ? lambda[lambda_index[i]] : fixed[i];
    return out;
}

void LambdaMapping::validate() const {
    for (int i : lambda_index)
        if (i > 1)
            throw std::invalid_argument("LambdaMapping: lambda index out of range");
    if (lambda_dim() == 0)
        throw std::invalid_argument("LambdaMapping: at least one coordinate must vary");
}

} // namespace lct
