#include "alasso/core/matrix.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace alasso {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
    if (data_.size() != rows * cols)
        fail(ErrorCode::DimensionMismatch, "matrix storage does not match rows*cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size())
{
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) fail(ErrorCode::DimensionMismatch, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d)
{
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::column(std::span<const double> v)
{
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector Matrix::col(std::size_t j) const
{
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool Matrix::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) fail(ErrorCode::DimensionMismatch, "matrix product shapes");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) kernels::axpy(aik, b.row(k), ci);
        }
    }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(ErrorCode::DimensionMismatch, "matrix difference shapes");
    Matrix c(a.rows(), a.cols());
    kernels::sub(a.storage(), b.storage(), {c.data(), a.rows() * a.cols()});
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x)
{
    if (a.cols() != x.size()) fail(ErrorCode::DimensionMismatch, "matrix-vector shapes");
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x);
    return y;
}

Matrix crossprod(const Matrix& x)
{
    const std::size_t p = x.cols();
    Matrix g(p, p);
    // Upper triangle via row rank-one updates, then mirror.
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double v = xi[j];
            if (v != 0.0) kernels::axpy(v, xi.subspan(j), g.row(j).subspan(j));
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
    return g;
}

Vector crossprod(const Matrix& x, std::span<const double> y)
{
    if (x.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "crossprod shapes");
    Vector out(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (y[i] != 0.0) kernels::axpy(y[i], x.row(i), out);
    return out;
}

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols)
{
    Matrix s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
    return s;
}

Matrix select_cols(const Matrix& a, const IndexSet& cols)
{
    IndexSet rows(a.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return submatrix(a, rows, cols);
}

Matrix select_rows(const Matrix& a, const IndexSet& rows)
{
    Matrix s(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) std::ranges::copy(a.row(rows[i]), s.row(i).begin());
    return s;
}

double max_abs(const Matrix& a) noexcept { return max_abs(std::span<const double>(a.storage())); }

double max_abs(std::span<const double> v) noexcept
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double trace(const Matrix& a) noexcept
{
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
    return t;
}

bool is_symmetric(const Matrix& a, double tol) noexcept
{
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
    return true;
}

} // namespace alasso
