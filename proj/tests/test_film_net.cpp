#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lct/film_net.hpp"
#include "lct/losses.hpp"
#include "oracles.hpp"

using lct::FilmMlp;
using lct::FilmMlpConfig;
using lct::ForwardTape;
using lct::Label;
using lct::LambdaVec;
using lct::Matrix;

namespace {

FilmMlpConfig tiny_config() {
    FilmMlpConfig cfg;
    cfg.input_dim = 3;
    cfg.trunk = {4, 3};
    cfg.film_hidden = 4;
    cfg.lambda_dim = 2;
    return cfg;
}

Matrix random_batch(std::size_t n, std::size_t d, lct::Rng& rng) {
    Matrix x(n, d);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    return x;
}

// Mean loss over the batch as a function of the flat parameter vector;
// the independent path for gradient checking.
double mean_loss_at(const FilmMlpConfig& cfg, const std::vector<double>& theta,
                    const Matrix& x, const std::vector<Label>& y, const LambdaVec& lambda,
                    bool film, lct::LossFamily family, const LambdaVec& loss_lambda,
                    double beta) {
    FilmMlp net(cfg, theta);
    const Matrix logits = net.forward(x, lambda, film);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        acc += lct::loss_value(family, y[i], {logits(i, 0), logits(i, 1)}, loss_lambda, beta);
    return acc / static_cast<double>(x.rows());
}

} // namespace

TEST_CASE("freshly initialized generator emits the identity modulation") {
    lct::Rng rng(1);
    FilmMlp net(tiny_config(), rng);
    lct::Rng data_rng(2);
    const Matrix x = random_batch(6, 3, data_rng);
    const Matrix with_film = net.forward(x, {0.7, 2.3}, true);
    const Matrix without = net.forward(x, {}, false);
    for (std::size_t i = 0; i < with_film.size(); ++i)
        CHECK(with_film.data()[i] == without.data()[i]);
}

TEST_CASE("hand-computed 2-4-2 forward") {
    FilmMlpConfig cfg;
    cfg.input_dim = 2;
    cfg.trunk = {4};
    cfg.film_hidden = 2;
    cfg.lambda_dim = 1;
    std::vector<double> params(cfg.param_count(), 0.0);
    // Layout: W1 (2x4), b1 (4), W_head (4x2), b_head (2), generator.
    const double w1[] = { 0.5, -1.0, 0.25, 2.0,
                         -0.5,  1.0, 0.75, 0.0};
    const double b1[] = {0.1, 0.0, -0.2, -10.0};
    const double wh[] = {1.0, -1.0,
                         0.5,  0.5,
                         2.0,  0.0,
                         0.0,  1.0};
    const double bh[] = {0.05, -0.05};
    std::copy(std::begin(w1), std::end(w1), params.begin());
    std::copy(std::begin(b1), std::end(b1), params.begin() + 8);
    std::copy(std::begin(wh), std::end(wh), params.begin() + 12);
    std::copy(std::begin(bh), std::end(bh), params.begin() + 20);

    FilmMlp net(cfg, params);
    Matrix x{{1.0, 2.0}};
    // pre = x*W1 + b1 = (0.5-1.0+0.1, -1.0+2.0, 0.25+1.5-0.2, 2.0-10)
    //     = (-0.4, 1.0, 1.55, -8.0); relu -> (0, 1.0, 1.55, 0)
    // z0 = 0*1 + 1*0.5 + 1.55*2 + 0 + 0.05 = 3.65
    // z1 = 0*(-1) + 1*0.5 + 0 + 0 - 0.05 = 0.45
    const Matrix z = net.forward(x, {}, false);
    CHECK(z(0, 0) == doctest::Approx(3.65).epsilon(1e-12));
    CHECK(z(0, 1) == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("batched forward equals row-by-row forward") {
    lct::Rng rng(3);
    FilmMlp net(tiny_config(), rng);
    // Give the generator output weights some nonzero values so FiLM matters.
    for (std::size_t i = net.film_offset(); i < net.param_count(); ++i)
        net.params()[i] += 0.05 * rng.normal();
    lct::Rng data_rng(4);
    const Matrix batch = random_batch(128, 3, data_rng);
    const LambdaVec lambda{0.4, 1.1};
    const Matrix all = net.forward(batch, lambda, true);
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        Matrix row(1, 3);
        std::copy(batch.row(i), batch.row(i) + 3, row.row(0));
        const Matrix one = net.forward(row, lambda, true);
        CHECK(one(0, 0) == all(i, 0));
        CHECK(one(0, 1) == all(i, 1));
    }
}

TEST_CASE("lambda dimension mismatch raises a shape error") {
    lct::Rng rng(5);
    FilmMlp net(tiny_config(), rng);
    lct::Rng data_rng(6);
    const Matrix x = random_batch(2, 3, data_rng);
    CHECK_THROWS_AS(net.forward(x, {0.5}, true), std::invalid_argument);
    CHECK_THROWS_AS(net.forward(random_batch(2, 5, data_rng), {0.5, 0.5}, true),
                    std::invalid_argument);
}

TEST_CASE("zero upstream gradient yields zero parameter gradient") {
    lct::Rng rng(7);
    FilmMlp net(tiny_config(), rng);
    lct::Rng data_rng(8);
    const Matrix x = random_batch(5, 3, data_rng);
    ForwardTape tape;
    net.forward(x, {0.3, 0.9}, true, &tape);
    const Matrix upstream(5, 2, 0.0);
    const auto grad = net.backward(tape, upstream);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("tape is consumed exactly once") {
    lct::Rng rng(9);
    FilmMlp net(tiny_config(), rng);
    lct::Rng data_rng(10);
    const Matrix x = random_batch(2, 3, data_rng);
    ForwardTape tape;
    net.forward(x, {0.3, 0.9}, true, &tape);
    const Matrix upstream(2, 2, 0.1);
    net.backward(tape, upstream);
    CHECK_THROWS_AS(net.backward(tape, upstream), std::logic_error);
}

TEST_CASE("backward matches finite differences on a <=200 parameter net") {
    FilmMlpConfig cfg = tiny_config();
    lct::Rng rng(11);
    FilmMlp net(cfg, rng);
    REQUIRE(net.param_count() <= 200);
    // Shift every parameter (biases included) off zero: exact-zero
    // pre-activations sit on the ReLU kink where the subgradient and a
    // central difference legitimately disagree. Also moves sigma/mu off
    // the identity.
    for (std::size_t i = 0; i < net.param_count(); ++i)
        net.params()[i] += 0.1 * rng.normal();

    lct::Rng data_rng(12);
    const Matrix x = random_batch(7, 3, data_rng);
    std::vector<Label> y;
    for (std::size_t i = 0; i < 7; ++i)
        y.push_back(data_rng.uniform01() < 0.4 ? Label::pos : Label::neg);
    const LambdaVec lambda{0.4, 1.6};
    const double beta = 25.0;

    for (lct::LossFamily family : {lct::LossFamily::vs, lct::LossFamily::focal}) {
        const LambdaVec loss_lambda =
            family == lct::LossFamily::vs ? LambdaVec{0.3, 1.0} : LambdaVec{0.25, 2.0};
        ForwardTape tape;
        const Matrix logits = net.forward(x, lambda, true, &tape);
        Matrix upstream(7, 2);
        for (std::size_t i = 0; i < 7; ++i) {
            const auto g = lct::loss_grad(family, y[i], {logits(i, 0), logits(i, 1)},
                                          loss_lambda, beta);
            upstream(i, 0) = g.d_neg;
            upstream(i, 1) = g.d_pos;
        }
        const auto analytic = net.backward(tape, upstream);
        const auto numeric = oracle::fd_grad(
            [&](const std::vector<double>& theta) {
                return mean_loss_at(cfg, theta, x, y, lambda, true, family, loss_lambda, beta);
            },
            net.params());
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double scale = std::max({1e-6, std::abs(analytic[i]), std::abs(numeric[i])});
            CHECK(std::abs(analytic[i] - numeric[i]) / scale < 1e-4);
        }
    }
}

TEST_CASE("disabled FiLM leaves the generator gradient identically zero") {
    lct::Rng rng(13);
    FilmMlp net(tiny_config(), rng);
    lct::Rng data_rng(14);
    const Matrix x = random_batch(6, 3, data_rng);
    ForwardTape tape;
    net.forward(x, {}, false, &tape);
    Matrix upstream(6, 2);
    for (std::size_t i = 0; i < upstream.size(); ++i) upstream.data()[i] = data_rng.normal();
    const auto grad = net.backward(tape, upstream);
    for (std::size_t i = net.film_offset(); i < net.param_count(); ++i)
        CHECK(grad[i] == 0.0);
    // ... and some trunk gradient is nonzero.
    double trunk_abs = 0.0;
    for (std::size_t i = 0; i < net.film_offset(); ++i) trunk_abs += std::abs(grad[i]);
    CHECK(trunk_abs > 0.0);
}

TEST_CASE("predict follows the strict threshold rule") {
    CHECK(lct::predict({0.2, 0.5}, 0.0) == Label::pos);
    CHECK(lct::predict({0.5, 0.2}, 0.0) == Label::neg);
    // Boundary is strict: z_pos == z_neg + t goes negative.
    CHECK(lct::predict({0.5, 0.5}, 0.0) == Label::neg);
    CHECK(lct::predict({0.0, 1.0}, 1.0) == Label::neg);
    CHECK(lct::predict({0.0, 1.0 + 1e-12}, 1.0) == Label::pos);
}

TEST_CASE("t = 0 agrees with the softmax-0.5 rule") {
    lct::Rng rng(15);
    for (int i = 0; i < 500; ++i) {
        const lct::Logits z{3.0 * rng.normal(), 3.0 * rng.normal()};
        const bool by_rule = lct::predict(z, 0.0) == Label::pos;
        const bool by_score = lct::positive_score(z) > 0.5;
        CHECK(by_rule == by_score);
    }
}

TEST_CASE("threshold sweep of predict is monotone in t") {
    lct::Rng rng(16);
    std::vector<lct::Logits> zs;
    for (int i = 0; i < 100; ++i) zs.push_back({rng.normal(), rng.normal()});
    int prev = 101;
    for (double t = -4.0; t <= 4.0; t += 0.25) {
        int positives = 0;
        for (const auto& z : zs)
            if (lct::predict(z, t) == Label::pos) ++positives;
        CHECK(positives <= prev);
        prev = positives;
    }
}

TEST_CASE("parameter count formula matches the layout") {
    FilmMlpConfig cfg;
    cfg.input_dim = 10;
    cfg.trunk = {32, 32, 16};
    cfg.film_hidden = 128;
    cfg.lambda_dim = 2;
    // trunk: 10*32+32 + 32*32+32 + 32*16+16, head: 16*2+2,
    // generator: 2*128+128 + 128*32+32.
    CHECK(cfg.param_count() == 352 + 1056 + 528 + 34 + 384 + 4128);
    lct::Rng rng(17);
    FilmMlp net(cfg, rng);
    CHECK(net.param_count() == cfg.param_count());
}
