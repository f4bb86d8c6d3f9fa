#include "alasso/core/kernels.hpp"

#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace alasso::kernels {

namespace {

constexpr KernelTable kScalar{
    &scalar::dot, &scalar::axpy, &scalar::sum, &scalar::sum_sq, &scalar::sub,
};

#if defined(ALASSO_HAVE_AVX2)
constexpr KernelTable kAvx2{
    &avx2::dot, &avx2::axpy, &avx2::sum, &avx2::sum_sq, &avx2::sub,
};
#endif

Isa initial_isa() noexcept
{
    const char* env = std::getenv("ALASSO_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return Isa::Scalar;
    return cpu_supports_avx2() && avx2_table() != nullptr ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected()
{
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

} // namespace

std::string_view to_string(Isa isa) noexcept
{
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept
{
#if defined(ALASSO_HAVE_AVX2)
    return &kAvx2;
#else
    return nullptr;
#endif
}

bool cpu_supports_avx2() noexcept
{
#if defined(ALASSO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) noexcept
{
    if (isa == Isa::Avx2 && (avx2_table() == nullptr || !cpu_supports_avx2())) return false;
    selected().store(isa, std::memory_order_relaxed);
    return true;
}

const KernelTable& table() noexcept
{
#if defined(ALASSO_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return kAvx2;
#endif
    return kScalar;
}

} // namespace alasso::kernels
