#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace lct {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// fixed MLP architecture; no views, no broadcasting.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    bool is_finite() const;
    std::string shape_string() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Standard product a*b. Throws std::invalid_argument naming both shapes
// when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// xoshiro256++ seeded through splitmix64. Implemented here so that seeded
// runs reproduce bit-for-bit across platforms and library versions.
// An Rng instance is single-owner; use split() to derive independent
// sub-streams (data shuffling, lambda sampling, ...).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform draw in [0, 1) with 53 random bits.
    double uniform01();
    // Standard normal via Box-Muller (two uniforms per draw).
    double normal();
    // Unbiased-enough integer in [0, n); n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    // Deterministic independent sub-stream keyed by `stream`.
    Rng split(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t s_[4] = {0, 0, 0, 0};
};

// Fisher-Yates shuffle driven by the given Rng.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

} // namespace lct
