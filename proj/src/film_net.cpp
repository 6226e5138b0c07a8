#include "lct/film_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lct {

void FilmMlpConfig::validate() const {
    if (input_dim == 0)
        throw std::invalid_argument("FilmMlpConfig: input_dim must be positive");
    if (trunk.empty())
        throw std::invalid_argument("FilmMlpConfig: trunk must have at least one layer");
    for (std::size_t w : trunk)
        if (w == 0) throw std::invalid_argument("FilmMlpConfig: trunk widths must be positive");
    if (film_hidden == 0)
        throw std::invalid_argument("FilmMlpConfig: film_hidden must be positive");
    if (lambda_dim == 0)
        throw std::invalid_argument("FilmMlpConfig: lambda_dim must be positive");
}

std::size_t FilmMlpConfig::param_count() const {
    std::size_t count = 0;
    std::size_t in = input_dim;
    for (std::size_t out : trunk) {
        count += in * out + out;
        in = out;
    }
    count += channels() * 2 + 2;                       // head
    count += lambda_dim * film_hidden + film_hidden;   // generator layer 1
    count += film_hidden * 2 * channels() + 2 * channels(); // generator layer 2
    return count;
}

void FilmMlp::compute_layout() {
    std::size_t off = 0;
    std::size_t in = config_.input_dim;
    trunk_w_.clear();
    trunk_b_.clear();
    for (std::size_t out : config_.trunk) {
        trunk_w_.push_back(off);
        off += in * out;
        trunk_b_.push_back(off);
        off += out;
        in = out;
    }
    const std::size_t c = config_.channels();
    head_w_ = off;
    off += c * 2;
    head_b_ = off;
    off += 2;
    film_offset_ = off;
    gen_w1_ = off;
    off += config_.lambda_dim * config_.film_hidden;
    gen_b1_ = off;
    off += config_.film_hidden;
    gen_w2_ = off;
    off += config_.film_hidden * 2 * c;
    gen_b2_ = off;
    off += 2 * c;
    if (off != config_.param_count())
        throw std::logic_error("FilmMlp: parameter layout mismatch");
}

namespace {

void he_uniform(double* w, std::size_t fan_in, std::size_t count, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i)
        w[i] = (2.0 * rng.uniform01() - 1.0) * limit;
}

} // namespace

FilmMlp::FilmMlp(FilmMlpConfig config, Rng& rng) : config_(std::move(config)) {
    config_.validate();
    params_.assign(config_.param_count(), 0.0);
    compute_layout();
    std::size_t in = config_.input_dim;
    for (std::size_t l = 0; l < config_.trunk.size(); ++l) {
        he_uniform(params_.data() + trunk_w_[l], in, in * config_.trunk[l], rng);
        in = config_.trunk[l];
    }
    const std::size_t c = config_.channels();
    he_uniform(params_.data() + head_w_, c, c * 2, rng);
    he_uniform(params_.data() + gen_w1_, config_.lambda_dim,
               config_.lambda_dim * config_.film_hidden, rng);
    // Generator output layer stays zero so sigma = 1, mu = 0 at the start;
    // the bias carries the identity modulation.
    for (std::size_t k = 0; k < c; ++k)
        params_[gen_b2_ + k] = 1.0;
}

FilmMlp::FilmMlp(FilmMlpConfig config, std::vector<double> params)
    : config_(std::move(config)), params_(std::move(params)) {
    config_.validate();
    if (params_.size() != config_.param_count())
        throw std::invalid_argument("FilmMlp: parameter vector has size " +
                                    std::to_string(params_.size()) + ", expected " +
                                    std::to_string(config_.param_count()));
    compute_layout();
}

Matrix FilmMlp::forward(const Matrix& x, const LambdaVec& lambda, bool film_enabled,
                        ForwardTape* tape) const {
    if (x.cols() != config_.input_dim)
        throw std::invalid_argument("FilmMlp::forward: input has " +
                                    std::to_string(x.cols()) + " columns, expected " +
                                    std::to_string(config_.input_dim));
    if (film_enabled && lambda.size() != config_.lambda_dim)
        throw std::invalid_argument("FilmMlp::forward: lambda has size " +
                                    std::to_string(lambda.size()) + ", expected " +
                                    std::to_string(config_.lambda_dim));
    const std::size_t n = x.rows();
    const std::size_t c = config_.channels();

    if (tape) {
        *tape = ForwardTape{};
        tape->input = x;
        tape->lambda = lambda;
        tape->film_enabled = film_enabled;
        tape->param_count = params_.size();
    }

    Matrix h = x;
    std::size_t in = config_.input_dim;
    for (std::size_t l = 0; l < config_.trunk.size(); ++l) {
        const std::size_t out = config_.trunk[l];
        const double* w = piece(trunk_w_[l]);
        const double* b = piece(trunk_b_[l]);
        Matrix pre(n, out);
        for (std::size_t i = 0; i < n; ++i) {
            const double* hrow = h.row(i);
            double* prow = pre.row(i);
            for (std::size_t j = 0; j < out; ++j) prow[j] = b[j];
            for (std::size_t k = 0; k < in; ++k) {
                const double hk = hrow[k];
                const double* wrow = w + k * out;
                for (std::size_t j = 0; j < out; ++j) prow[j] += hk * wrow[j];
            }
        }
        Matrix act(n, out);
        for (std::size_t i = 0; i < n * out; ++i)
            act.data()[i] = pre.data()[i] > 0.0 ? pre.data()[i] : 0.0;
        if (tape) {
            tape->pre_acts.push_back(pre);
            tape->acts.push_back(act);
        }
        h = std::move(act);
        in = out;
    }

    // FiLM modulation of the final hidden activations.
    std::vector<double> sigma(c, 1.0), mu(c, 0.0);
    if (film_enabled) {
        const std::size_t fh = config_.film_hidden;
        std::vector<double> gen_pre(fh, 0.0), gen_hidden(fh, 0.0);
        const double* w1 = piece(gen_w1_);
        const double* b1 = piece(gen_b1_);
        for (std::size_t j = 0; j < fh; ++j) gen_pre[j] = b1[j];
        for (std::size_t k = 0; k < config_.lambda_dim; ++k) {
            const double lk = lambda[k];
            const double* wrow = w1 + k * fh;
            for (std::size_t j = 0; j < fh; ++j) gen_pre[j] += lk * wrow[j];
        }
        for (std::size_t j = 0; j < fh; ++j)
            gen_hidden[j] = gen_pre[j] > 0.0 ? gen_pre[j] : 0.0;
        const double* w2 = piece(gen_w2_);
        const double* b2 = piece(gen_b2_);
        std::vector<double> sm(2 * c, 0.0);
        for (std::size_t j = 0; j < 2 * c; ++j) sm[j] = b2[j];
        for (std::size_t k = 0; k < fh; ++k) {
            const double gk = gen_hidden[k];
            const double* wrow = w2 + k * 2 * c;
            for (std::size_t j = 0; j < 2 * c; ++j) sm[j] += gk * wrow[j];
        }
        for (std::size_t j = 0; j < c; ++j) {
            sigma[j] = sm[j];
            mu[j] = sm[c + j];
        }
        if (tape) {
            tape->gen_pre = std::move(gen_pre);
            tape->gen_hidden = std::move(gen_hidden);
        }
    }

    Matrix modulated(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        const double* hrow = h.row(i);
        double* mrow = modulated.row(i);
        for (std::size_t j = 0; j < c; ++j) mrow[j] = sigma[j] * hrow[j] + mu[j];
    }

    const double* hw = piece(head_w_);
    const double* hb = piece(head_b_);
    Matrix logits(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double* mrow = modulated.row(i);
        double z0 = hb[0], z1 = hb[1];
        for (std::size_t k = 0; k < c; ++k) {
            z0 += mrow[k] * hw[k * 2];
            z1 += mrow[k] * hw[k * 2 + 1];
        }
        logits(i, 0) = z0;
        logits(i, 1) = z1;
    }

    if (tape) {
        tape->sigma = std::move(sigma);
        tape->mu = std::move(mu);
        tape->modulated = std::move(modulated);
    }
    return logits;
}

std::vector<double> FilmMlp::backward(ForwardTape& tape, const Matrix& upstream) const {
    if (tape.consumed)
        throw std::logic_error("FilmMlp::backward: tape already consumed");
    if (tape.param_count != params_.size())
        throw std::logic_error("FilmMlp::backward: tape does not match this network");
    const std::size_t n = tape.input.rows();
    if (upstream.rows() != n || upstream.cols() != 2)
        throw std::logic_error("FilmMlp::backward: upstream gradient has shape " +
                               upstream.shape_string() + ", expected " +
                               std::to_string(n) + "x2");
    tape.consumed = true;

    const std::size_t c = config_.channels();
    std::vector<double> grad(params_.size(), 0.0);

    // Head: logits = modulated * W_head + b_head.
    const double* hw = piece(head_w_);
    double* g_hw = grad.data() + head_w_;
    double* g_hb = grad.data() + head_b_;
    Matrix d_mod(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        const double u0 = upstream(i, 0);
        const double u1 = upstream(i, 1);
        const double* mrow = tape.modulated.row(i);
        double* drow = d_mod.row(i);
        g_hb[0] += u0;
        g_hb[1] += u1;
        for (std::size_t k = 0; k < c; ++k) {
            g_hw[k * 2] += mrow[k] * u0;
            g_hw[k * 2 + 1] += mrow[k] * u1;
            drow[k] = hw[k * 2] * u0 + hw[k * 2 + 1] * u1;
        }
    }

    // FiLM: modulated = sigma * h + mu (sigma, mu shared across the batch).
    const Matrix& h_last = tape.acts.back();
    Matrix d_h(n, c);
    std::vector<double> d_sigma(c, 0.0), d_mu(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* drow = d_mod.row(i);
        const double* hrow = h_last.row(i);
        double* dhrow = d_h.row(i);
        for (std::size_t k = 0; k < c; ++k) {
            dhrow[k] = drow[k] * tape.sigma[k];
            d_sigma[k] += drow[k] * hrow[k];
            d_mu[k] += drow[k];
        }
    }

    if (tape.film_enabled) {
        const std::size_t fh = config_.film_hidden;
        // Generator layer 2: (sigma, mu) = gen_hidden * W2 + b2.
        std::vector<double> d_sm(2 * c, 0.0);
        for (std::size_t k = 0; k < c; ++k) {
            d_sm[k] = d_sigma[k];
            d_sm[c + k] = d_mu[k];
        }
        const double* w2 = piece(gen_w2_);
        double* g_w2 = grad.data() + gen_w2_;
        double* g_b2 = grad.data() + gen_b2_;
        std::vector<double> d_hidden(fh, 0.0);
        for (std::size_t k = 0; k < fh; ++k) {
            const double gk = tape.gen_hidden[k];
            const double* wrow = w2 + k * 2 * c;
            double* grow = g_w2 + k * 2 * c;
            double acc = 0.0;
            for (std::size_t j = 0; j < 2 * c; ++j) {
                grow[j] += gk * d_sm[j];
                acc += wrow[j] * d_sm[j];
            }
            d_hidden[k] = acc;
        }
        for (std::size_t j = 0; j < 2 * c; ++j) g_b2[j] += d_sm[j];
        // Generator layer 1 through the hidden ReLU.
        double* g_w1 = grad.data() + gen_w1_;
        double* g_b1 = grad.data() + gen_b1_;
        for (std::size_t k = 0; k < fh; ++k) {
            const double d_pre = tape.gen_pre[k] > 0.0 ? d_hidden[k] : 0.0;
            g_b1[k] += d_pre;
            for (std::size_t j = 0; j < config_.lambda_dim; ++j)
                g_w1[j * fh + k] += tape.lambda[j] * d_pre;
        }
    }

    // Trunk, walking layers backwards.
    Matrix d_out = std::move(d_h);
    for (std::size_t li = config_.trunk.size(); li-- > 0;) {
        const std::size_t out = config_.trunk[li];
        const std::size_t in = li == 0 ? config_.input_dim : config_.trunk[li - 1];
        const Matrix& pre = tape.pre_acts[li];
        const Matrix& below = li == 0 ? tape.input : tape.acts[li - 1];
        // d_pre = d_out * relu'(pre)
        Matrix d_pre(n, out);
        for (std::size_t i = 0; i < n * out; ++i)
            d_pre.data()[i] = pre.data()[i] > 0.0 ? d_out.data()[i] : 0.0;
        const double* w = piece(trunk_w_[li]);
        double* g_w = grad.data() + trunk_w_[li];
        double* g_b = grad.data() + trunk_b_[li];
        Matrix d_below(n, in, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* dprow = d_pre.row(i);
            const double* brow = below.row(i);
            double* dbrow = d_below.row(i);
            for (std::size_t j = 0; j < out; ++j) g_b[j] += dprow[j];
            for (std::size_t k = 0; k < in; ++k) {
                const double bk = brow[k];
                const double* wrow = w + k * out;
                double* grow = g_w + k * out;
                double acc = 0.0;
                for (std::size_t j = 0; j < out; ++j) {
                    grow[j] += bk * dprow[j];
                    acc += wrow[j] * dprow[j];
                }
                dbrow[k] = acc;
            }
        }
        d_out = std::move(d_below);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : grad) g *= inv_n;
    return grad;
}

Label predict(const Logits& z, double t) {
    return z.z_pos > z.z_neg + t ? Label::pos : Label::neg;
}

double positive_score(const Logits& z) {
    return sigmoid(z.z_pos - z.z_neg);
}

} // namespace lct
