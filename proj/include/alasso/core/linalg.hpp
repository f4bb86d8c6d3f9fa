#pragma once

#include "alasso/core/matrix.hpp"

#include <memory>

namespace alasso {

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws NotPositiveDefinite when a pivot is <= 0.
class Cholesky
{
public:
    explicit Cholesky(const Matrix& a);

    std::size_t dim() const noexcept { return l_.rows(); }
    const Matrix& factor() const noexcept { return l_; }

    Vector solve(std::span<const double> b) const;
    Matrix solve(const Matrix& b) const;
    Matrix inverse() const;

private:
    Matrix l_;
};

/// Solve A X = B for symmetric positive-definite A.
Matrix solve_spd(const Matrix& a, const Matrix& b);
Vector solve_spd(const Matrix& a, std::span<const double> b);

struct SymEigen
{
    Vector values;  ///< ascending
    Matrix vectors; ///< columns are orthonormal eigenvectors
};

SymEigen sym_eigen(const Matrix& a, double symmetry_tol = 1e-10);

/// Least-squares solver for a fixed full-column-rank design, factored once by
/// Householder QR and reused for many right-hand sides.
class LeastSquares
{
public:
    explicit LeastSquares(const Matrix& x);
    ~LeastSquares();
    LeastSquares(LeastSquares&&) noexcept;
    LeastSquares& operator=(LeastSquares&&) noexcept;

    Vector solve(std::span<const double> y) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Standard normal quantile and CDF.
double normal_quantile(double u);
double normal_cdf(double x);

} // namespace alasso
