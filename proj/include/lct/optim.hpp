#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

namespace lct {

using ParamVec = std::vector<double>;

double l2_norm(const ParamVec& v);

// Scales g to max_norm when its global L2 norm exceeds max_norm; otherwise
// returns it unchanged. Direction-preserving and idempotent.
ParamVec clip_grad(ParamVec g, double max_norm);

struct SgdState {
    double lr = 0.05;
    double momentum = 0.9; // in [0, 1)
    ParamVec velocity;     // lazily sized to theta
};

struct AdamState {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    ParamVec m, v;
    long step = 0;
};

// v <- momentum * v + g; theta <- theta - lr * v.
void sgd_step(SgdState& state, ParamVec& theta, const ParamVec& grad);
// Bias-corrected Adam: theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, ParamVec& theta, const ParamVec& grad);

// Single-owner wrapper over the two inner optimizers.
struct Optimizer {
    std::variant<SgdState, AdamState> state;
    void step(ParamVec& theta, const ParamVec& grad);
};

// Evaluates the training objective and its gradient at a parameter point.
using LossAndGrad = std::function<std::pair<double, ParamVec>(const ParamVec&)>;

// Sharpness-aware minimization around the wrapped inner optimizer.
struct SamConfig {
    double rho = 0.1; // neighborhood radius; rho = 0 degenerates to the inner step
    Optimizer inner;
};

// Two-phase step: perturb theta by rho * g / ||g|| using the gradient at
// theta, re-evaluate the gradient at the perturbed point, then apply the
// inner optimizer at the original theta with that gradient. Both phases
// must see the same objective (same mini-batch, same lambda). A zero
// first-phase gradient skips the perturbation. When clip_norm > 0 both
// phase gradients are clipped (the perturbation direction is unaffected
// since clipping preserves direction).
// Returns the first-phase loss value.
double sam_step(SamConfig& cfg, ParamVec& theta, const LossAndGrad& loss_and_grad,
                double clip_norm = 0.0);

} // namespace lct
