#pragma once

#include <cstddef>

namespace alasso::kernels::scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
} // namespace alasso::kernels::scalar

namespace alasso::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
} // namespace alasso::kernels::avx2
