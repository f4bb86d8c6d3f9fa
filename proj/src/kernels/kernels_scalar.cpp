#include "kernels_impl.hpp"

namespace alasso::kernels::scalar {

// Four independent accumulators; the AVX2 variant uses the same lane split
// so both agree to within a few ulps on long vectors.

double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i];
        s1 += a[i + 1];
        s2 += a[i + 2];
        s3 += a[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i];
    return s;
}

double sum_sq(const double* a, std::size_t n) { return dot(a, a, n); }

void sub(const double* a, const double* b, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

} // namespace alasso::kernels::scalar
