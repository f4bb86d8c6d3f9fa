#pragma once

#include <span>
#include <vector>

namespace alasso {

/// Linear interpolation between order statistics: with m = size and
/// h = (m - 1) u, returns x(floor h) + frac(h) (x(floor h + 1) - x(floor h))
/// on the 0-based sorted sample. Requires a nonempty sample and 0 < u < 1.
double empirical_quantile(std::span<const double> sample, double u);

/// Same rule on an already sorted sample (no copy).
double sorted_quantile(std::span<const double> sorted, double u);

} // namespace alasso
