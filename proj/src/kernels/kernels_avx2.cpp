// Compiled with -mavx2 -mfma; only reached after a runtime CPUID check.
#include "kernels_impl.hpp"

#include <immintrin.h>

namespace alasso::kernels::avx2 {

namespace {

inline double hsum(__m256d v)
{
    // (l0 + l1) + (l2 + l3), matching the scalar accumulator pairing.
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d lo_pair = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
    __m128d hi_pair = _mm_add_sd(hi, _mm_unpackhi_pd(hi, hi));
    return _mm_cvtsd_f64(_mm_add_sd(lo_pair, hi_pair));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double sum_sq(const double* a, std::size_t n) { return dot(a, a, n); }

void sub(const double* a, const double* b, double* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

} // namespace alasso::kernels::avx2
