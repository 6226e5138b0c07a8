#include "lct/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lct {

double l2_norm(const ParamVec& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

ParamVec clip_grad(ParamVec g, double max_norm) {
    if (!(max_norm > 0.0))
        throw std::invalid_argument("clip_grad: max_norm must be positive");
    double norm_sq = 0.0;
    for (double x : g) norm_sq += x * x;
    // The squared comparison carries a one-ulp-scale tolerance so that
    // re-clipping an already clipped vector is a bitwise no-op.
    if (norm_sq > max_norm * max_norm * (1.0 + 1e-14)) {
        const double scale = max_norm / std::sqrt(norm_sq);
        for (double& x : g) x *= scale;
    }
    return g;
}

namespace {

void check_shapes(std::size_t theta, std::size_t grad, const char* who) {
    if (theta != grad)
        throw std::logic_error(std::string(who) + ": gradient size " +
                               std::to_string(grad) + " does not match theta size " +
                               std::to_string(theta));
}

} // namespace

void sgd_step(SgdState& state, ParamVec& theta, const ParamVec& grad) {
    check_shapes(theta.size(), grad.size(), "sgd_step");
    if (state.velocity.empty()) state.velocity.assign(theta.size(), 0.0);
    check_shapes(theta.size(), state.velocity.size(), "sgd_step (velocity)");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.velocity[i] = state.momentum * state.velocity[i] + grad[i];
        theta[i] -= state.lr * state.velocity[i];
    }
}

void adam_step(AdamState& state, ParamVec& theta, const ParamVec& grad) {
    check_shapes(theta.size(), grad.size(), "adam_step");
    if (state.m.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    check_shapes(theta.size(), state.m.size(), "adam_step (moments)");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

void Optimizer::step(ParamVec& theta, const ParamVec& grad) {
    if (auto* sgd = std::get_if<SgdState>(&state))
        sgd_step(*sgd, theta, grad);
    else
        adam_step(std::get<AdamState>(state), theta, grad);
}

double sam_step(SamConfig& cfg, ParamVec& theta, const LossAndGrad& loss_and_grad,
                double clip_norm) {
    if (!(cfg.rho >= 0.0))
        throw std::invalid_argument("sam_step: rho must be >= 0");
    auto [loss, grad] = loss_and_grad(theta);
    if (clip_norm > 0.0) grad = clip_grad(std::move(grad), clip_norm);
    check_shapes(theta.size(), grad.size(), "sam_step");

    const double norm = l2_norm(grad);
    ParamVec second = std::move(grad);
    if (cfg.rho > 0.0 && norm > 0.0) {
        const double scale = cfg.rho / norm;
        ParamVec perturbed(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i)
            perturbed[i] = theta[i] + scale * second[i];
        auto [loss2, grad2] = loss_and_grad(perturbed);
        (void)loss2;
        second = std::move(grad2);
        if (clip_norm > 0.0) second = clip_grad(std::move(second), clip_norm);
        check_shapes(theta.size(), second.size(), "sam_step (phase 2)");
    }
    cfg.inner.step(theta, second);
    return loss;
}

} // namespace lct
