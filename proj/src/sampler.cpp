#include "lct/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lct {

namespace {

constexpr double kSlopeTie = 1e-12; // |h_a - h_b| below this uses the linear branch

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

LinearPdf LinearPdf::make(double a, double b, double h_b) {
    if (!(b > a))
        throw std::invalid_argument("LinearPdf: need b > a, got [" + fmt(a) + ", " + fmt(b) + "]");
    const double h_max = 2.0 / (b - a);
    if (!(h_b >= 0.0) || !(h_b <= h_max))
        throw std::invalid_argument("LinearPdf: h_b must lie in [0, 2/(b-a)] = [0, " +
                                    fmt(h_max) + "], got " + fmt(h_b));
    LinearPdf p;
    p.a_ = a;
    p.b_ = b;
    p.h_b_ = h_b;
    p.h_a_ = h_max - h_b; // unit area
    return p;
}

LinearPdf LinearPdf::point(double value) {
    LinearPdf p;
    p.a_ = p.b_ = value;
    p.h_a_ = p.h_b_ = 0.0;
    return p;
}

LinearPdf LinearPdf::parse(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t");
    std::size_t last = text.find_last_not_of(" \t");
    if (first == std::string::npos)
        throw std::invalid_argument("LinearPdf: empty specifier");
    const std::string s = text.substr(first, last - first + 1);
    if (s.front() == 'L' || s.front() == 'l') {
        double a = 0, b = 0, h_b = 0;
        char close = 0;
        std::istringstream in(s.substr(1));
        char open = 0, c1 = 0, c2 = 0;
        if (!(in >> open >> a >> c1 >> b >> c2 >> h_b >> close) ||
            open != '(' || c1 != ',' || c2 != ',' || close != ')')
            throw std::invalid_argument("LinearPdf: cannot parse '" + s +
                                        "' (expected L(a,b,h_b))");
        std::string rest;
        if (in >> rest)
            throw std::invalid_argument("LinearPdf: trailing text in '" + s + "'");
        return make(a, b, h_b);
    }
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("LinearPdf: cannot parse '" + s + "'");
    }
    if (pos != s.size())
        throw std::invalid_argument("LinearPdf: trailing text in '" + s + "'");
    return point(v);
}

std::string LinearPdf::to_string() const {
    if (is_point()) return fmt(a_);
    return "L(" + fmt(a_) + "," + fmt(b_) + "," + fmt(h_b_) + ")";
}

double LinearPdf::pdf(double x) const {
    if (is_point())
        throw std::domain_error("LinearPdf: pdf of a point mass is not a function");
    if (x < a_ || x > b_) return 0.0;
    return h_a_ + (h_b_ - h_a_) * (x - a_) / (b_ - a_);
}

double LinearPdf::cdf(double x) const {
    if (is_point()) return x < a_ ? 0.0 : 1.0;
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    const double d = x - a_;
    const double slope = (h_b_ - h_a_) / (b_ - a_);
    return h_a_ * d + 0.5 * slope * d * d;
}

double LinearPdf::inverse_cdf(double u) const {
    if (!(u >= 0.0 && u <= 1.0))
        throw std::invalid_argument("LinearPdf::inverse_cdf: u must lie in [0,1], got " + fmt(u));
    if (is_point()) return a_;
    if (u == 0.0) return a_;
    if (u == 1.0) return b_;
    const double w = b_ - a_;
    double d;
    if (std::abs(h_a_ - h_b_) < kSlopeTie) {
        d = u * w; // uniform branch: F(x) = (x-a)/w
    } else {
        // Solve (s/2) d^2 + h_a d - u = 0 with s = (h_b - h_a)/w via the
        // q-form root, which stays in [0, w] for either sign of s.
        const double s = (h_b_ - h_a_) / w;
        d = 2.0 * u / (h_a_ + std::sqrt(h_a_ * h_a_ + 2.0 * s * u));
    }
    const double x = a_ + d;
    return std::min(std::max(x, a_), b_);
}

bool LambdaDistribution::is_point() const {
    for (const auto& c : coords)
        if (!c.is_point()) return false;
    return true;
}

LambdaVec LambdaDistribution::point_value() const {
    if (!is_point())
        throw std::logic_error("LambdaDistribution: point_value of a non-degenerate distribution");
    LambdaVec v;
    v.reserve(coords.size());
    for (const auto& c : coords) v.push_back(c.a());
    return v;
}

std::string LambdaDistribution::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) s += ", ";
        s += coords[i].to_string();
    }
    return s + ")";
}

LambdaVec sample_lambda(const LambdaDistribution& dist, Rng& rng) {
    LambdaVec v;
    v.reserve(dist.coords.size());
    for (const auto& c : dist.coords)
        v.push_back(c.inverse_cdf(rng.uniform01()));
    return v;
}

} // namespace lct
