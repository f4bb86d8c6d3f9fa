#pragma once

#include "alasso/pivots.hpp"

#include <array>
#include <functional>

namespace alasso {

/// chi_k(x; v) with chi_k(x; v) phi(x; v) = (-d/dx)^k phi(x; v), i.e.
/// v^{-k/2} He_k(x / sqrt(v)) with He_k the probabilists' Hermite polynomial.
double hermite_chi(int k, double x, double v);

/// N(0, v) density.
double normal_density(double x, double v);

/// Smallest r >= 1 with |f|^{r+1} <= n^{-1/2}, capped at 6.
int select_r1(double f, std::size_t n);

struct ErrorMoments
{
    double sigma_sq = 1.0;
    double mu3 = 0.0;
};

struct EdgeworthOptions
{
    /// The fitted criterion carries no 1/2 on the squared loss, so its bias
    /// matches the expansion evaluated at lambda/2. Set false to plug lambda
    /// in unchanged.
    bool halve_penalty = true;
};

/// Scalar (q = 1) expansion ingredients.
struct EdgeworthSpec
{
    std::size_t n = 0;
    double f_n = 0.0;
    double upsilon = 1.0;
    double upsilon_breve = 1.0;
    double sigma_sq = 1.0;
    double mu3 = 0.0;
    int r1 = 1;
    std::array<double, 4> xi_bar{}; ///< xi_bar[k] = n^{-1} sum (xi0_i)^k, k = 1..3
    double cross_moment = 0.0;      ///< n^{-1} sum xi0_i eta0_i
    bool plug_in = false;
    double lambda_used = 0.0;       ///< penalty entering f_n and eta after the convention
};

EdgeworthSpec build_spec(const RegressionDataset& data, std::span<const double> beta_true, double lambda,
                         double gamma, const PivotSpec& spec, const ErrorMoments& moments,
                         const EdgeworthOptions& options = {});

/// Plug-in version: beta_hat on the estimated support, sigma_hat^2 and the third
/// moment of the centered residuals in place of the population values.
EdgeworthSpec build_spec_plugin(const RegressionDataset& data, const AlassoFit& fit, const PivotSpec& spec,
                                const EdgeworthOptions& options = {});

/// Expansion density for T_n.
double psi_density(double x, const EdgeworthSpec& spec);
/// Expansion density for R_n.
double pi_density(double x, const EdgeworthSpec& spec);

/// Closed-form distribution functions of the two expansions.
double psi_cdf(double x, const EdgeworthSpec& spec);
double pi_cdf(double x, const EdgeworthSpec& spec);

/// Adaptive Gauss-Kronrod integral of a density over [a, b]; infinite ends
/// are truncated at 12 standard deviations of `scale_var`. Absolute error <= 1e-8.
double ee_cdf(const std::function<double(double)>& density, double a, double b, double scale_var);

} // namespace alasso
