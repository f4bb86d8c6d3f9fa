#include "alasso/core/quantile.hpp"

#include "alasso/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace alasso {

double sorted_quantile(std::span<const double> sorted, double u)
{
    if (sorted.empty()) fail(ErrorCode::EmptySample, "quantile of an empty sample");
    if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
    const double h = static_cast<double>(sorted.size() - 1) * u;
    const double lo = std::floor(h);
    const auto k = static_cast<std::size_t>(lo);
    if (k + 1 >= sorted.size()) return sorted[k];
    return sorted[k] + (h - lo) * (sorted[k + 1] - sorted[k]);
}

double empirical_quantile(std::span<const double> sample, double u)
{
    if (sample.empty()) fail(ErrorCode::EmptySample, "quantile of an empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::ranges::sort(sorted);
    return sorted_quantile(sorted, u);
}

} // namespace alasso
