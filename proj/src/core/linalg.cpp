#include "alasso/core/linalg.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/kernels.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace alasso {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_eigen(const Matrix& m)
{
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

} // namespace

Cholesky::Cholesky(const Matrix& a)
    : l_(a.rows(), a.cols())
{
    if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, "Cholesky needs a square matrix");
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        auto lj = l_.row(j).first(j);
        const double pivot = a(j, j) - kernels::dot(lj, lj);
        // a pivot lost to cancellation counts as zero
        if (!(pivot > 1e-13 * std::abs(a(j, j))))
            fail(ErrorCode::NotPositiveDefinite, "Cholesky pivot " + std::to_string(j) + " is not positive");
        const double d = std::sqrt(pivot);
        l_(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i)
            l_(i, j) = (a(i, j) - kernels::dot(l_.row(i).first(j), lj)) / d;
    }
}

Vector Cholesky::solve(std::span<const double> b) const
{
    const std::size_t n = dim();
    if (b.size() != n) fail(ErrorCode::DimensionMismatch, "Cholesky solve rhs length");
    Vector z(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i)
        z[i] = (z[i] - kernels::dot(l_.row(i).first(i), std::span<const double>(z).first(i))) / l_(i, i);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = z[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * z[k];
        z[ii] = s / l_(ii, ii);
    }
    return z;
}

Matrix Cholesky::solve(const Matrix& b) const
{
    if (b.rows() != dim()) fail(ErrorCode::DimensionMismatch, "Cholesky solve rhs rows");
    Matrix x(b.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const Vector col = solve(b.col(j));
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

Matrix Cholesky::inverse() const
{
    Matrix inv = solve(Matrix::identity(dim()));
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = 0; j < i; ++j) inv(i, j) = inv(j, i) = 0.5 * (inv(i, j) + inv(j, i));
    return inv;
}

Matrix solve_spd(const Matrix& a, const Matrix& b)
{
    if (!is_symmetric(a, 1e-10)) fail(ErrorCode::NonSymmetric, "solve_spd requires a symmetric matrix");
    return Cholesky(a).solve(b);
}

Vector solve_spd(const Matrix& a, std::span<const double> b)
{
    if (!is_symmetric(a, 1e-10)) fail(ErrorCode::NonSymmetric, "solve_spd requires a symmetric matrix");
    return Cholesky(a).solve(b);
}

SymEigen sym_eigen(const Matrix& a, double symmetry_tol)
{
    if (!is_symmetric(a, symmetry_tol)) fail(ErrorCode::NonSymmetric, "sym_eigen requires a symmetric matrix");
    const std::size_t n = a.rows();
    SymEigen out{Vector(n), Matrix(n, n)};
    if (n == 0) return out;
    Eigen::MatrixXd m = as_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) fail(ErrorCode::NonSymmetric, "eigen decomposition failed");
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < n; ++j)
            out.vectors(i, j) = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return out;
}

struct LeastSquares::Impl
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr;
};

LeastSquares::LeastSquares(const Matrix& x)
    : impl_(std::make_unique<Impl>())
{
    impl_->qr.compute(Eigen::MatrixXd(as_eigen(x)));
}

LeastSquares::~LeastSquares() = default;
LeastSquares::LeastSquares(LeastSquares&&) noexcept = default;
LeastSquares& LeastSquares::operator=(LeastSquares&&) noexcept = default;

Vector LeastSquares::solve(std::span<const double> y) const
{
    Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd sol = impl_->qr.solve(rhs);
    return Vector(sol.data(), sol.data() + sol.size());
}

double normal_quantile(double u)
{
    if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::InvalidArgument, "normal quantile needs 0 < u < 1");
    return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

} // namespace alasso
