#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the solvers: dot products, axpy updates
// and reductions. Each kernel has a portable scalar reference and, on x86-64,
// an AVX2/FMA variant. The variant is picked once at startup from CPUID and
// can be pinned with ALASSO_KERNELS=scalar|avx2 or force_isa().

namespace alasso::kernels {

enum class Isa
{
    Scalar,
    Avx2,
};

std::string_view to_string(Isa isa) noexcept;

struct KernelTable
{
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*sum_sq)(const double* a, std::size_t n);
    /// out[i] = a[i] - b[i]
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;
bool cpu_supports_avx2() noexcept;

Isa active_isa() noexcept;
/// Returns false (and leaves the selection unchanged) if the ISA is unavailable.
bool force_isa(Isa isa) noexcept;
const KernelTable& table() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    return table().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept
{
    table().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> a) noexcept { return table().sum(a.data(), a.size()); }

inline double sum_sq(std::span<const double> a) noexcept { return table().sum_sq(a.data(), a.size()); }

inline void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) noexcept
{
    table().sub(a.data(), b.data(), out.data(), a.size());
}

} // namespace alasso::kernels
