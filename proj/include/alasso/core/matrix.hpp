#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace alasso {

using Vector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

/// Dense row-major matrix of doubles.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);
    static Matrix column(std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    Vector col(std::size_t j) const;

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    const std::vector<double>& storage() const noexcept { return data_; }

    Matrix transpose() const;
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// X'X for an n x p design (no 1/n scaling).
Matrix crossprod(const Matrix& x);
/// X'y.
Vector crossprod(const Matrix& x, std::span<const double> y);

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols);
Matrix select_cols(const Matrix& a, const IndexSet& cols);
Matrix select_rows(const Matrix& a, const IndexSet& rows);

double max_abs(const Matrix& a) noexcept;
double max_abs(std::span<const double> v) noexcept;
double trace(const Matrix& a) noexcept;
bool is_symmetric(const Matrix& a, double tol) noexcept;

} // namespace alasso
