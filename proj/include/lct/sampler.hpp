#pragma once

#include <string>
#include <vector>

#include "lct/losses.hpp"
#include "lct/ndmath.hpp"

namespace lct {

// Linear probability density on [a, b]. The user picks the height h_b at b;
// the height h_a at a is derived so the area under the pdf is one:
// (h_a + h_b) * (b - a) / 2 = 1. Uniform when h_a == h_b, triangular when
// either endpoint height is zero. A degenerate a == b interval is a point
// mass, which lets a fixed hyperparameter flow through the same sampling
// path as a real distribution.
class LinearPdf {
public:
    static LinearPdf make(double a, double b, double h_b);
    static LinearPdf point(double value);

    // Accepts "L(a,b,h_b)" or a bare number (point mass).
    static LinearPdf parse(const std::string& text);
    std::string to_string() const;

    double a() const { return a_; }
    double b() const { return b_; }
    double height_a() const { return h_a_; }
    double height_b() const { return h_b_; }
    bool is_point() const { return a_ == b_; }

    double pdf(double x) const;
    double cdf(double x) const;
    // Solves F(x) = u for x in [a, b]; u = 0 maps to a and u = 1 to b
    // (b inclusive). Throws for u outside [0, 1].
    double inverse_cdf(double u) const;

private:
    LinearPdf() = default;
    double a_ = 0.0, b_ = 0.0, h_a_ = 0.0, h_b_ = 0.0;
};

// One LinearPdf per coordinate of lambda.
struct LambdaDistribution {
    std::vector<LinearPdf> coords;

    bool is_point() const;
    LambdaVec point_value() const;
    std::string to_string() const;
};

// One draw per coordinate via inverse-CDF of a uniform; advances the rng
// exactly coords.size() times even for point masses.
LambdaVec sample_lambda(const LambdaDistribution& dist, Rng& rng);

} // namespace lct
