#pragma once

#include "alasso/estimators.hpp"

#include <string>

namespace alasso {

enum class PivotKind
{
    RawT,
    StudentizedR,
    CorrectedRbreve,
};

std::string to_string(PivotKind kind);
PivotKind parse_pivot_kind(const std::string& name);

/// Linear combination D beta under study (q x p, q >= 1).
struct PivotSpec
{
    Matrix D;
    PivotKind kind = PivotKind::RawT;
    double trace_bound = 10.0;

    static PivotSpec coordinate(std::size_t p, std::size_t j, PivotKind kind = PivotKind::RawT);

    std::size_t q() const noexcept { return D.rows(); }
    void validate(std::size_t p) const;
};

struct BiasCorrection
{
    Vector f_breve;
    double sigma_breve_sq = 0.0;
    Vector beta_breve;
    IndexSet active_set_used;
};

struct PopulationBias
{
    Vector f_n;
    Vector s1;      ///< sgn(beta_j)|beta_j|^{-gamma} over the true support
    IndexSet support;
    Matrix gamma_n; ///< D1 C11^{-1} Lambda1 C11^{-1} D1'
};

/// sqrt(n) D (beta_hat - beta_true).
Vector pivot_T(const AlassoFit& fit, const PivotSpec& spec, std::span<const double> beta_true);
/// pivot_T divided by sigma_hat.
Vector pivot_R(const AlassoFit& fit, const PivotSpec& spec, std::span<const double> beta_true);

BiasCorrection bias_correction(const AlassoFit& fit, const InitialEstimate& init, const RegressionDataset& data,
                               const PivotSpec& spec);
BiasCorrection bias_correction(const AlassoFit& fit, const InitialEstimate& init, const DesignCache& cache,
                               std::span<const double> y, const PivotSpec& spec);

/// (sqrt(n) D (beta_hat - beta_true) + f_breve) / sigma_breve.
Vector pivot_Rbreve(const AlassoFit& fit, const BiasCorrection& correction, const PivotSpec& spec,
                    std::span<const double> beta_true);

/// sigma_hat^2 D1 C11^{-1} D1' with the estimated support standing in for the true one.
Matrix oracle_variance(const AlassoFit& fit, const RegressionDataset& data, const PivotSpec& spec);
Matrix oracle_variance(const AlassoFit& fit, const DesignCache& cache, const PivotSpec& spec);

PopulationBias population_bias(std::span<const double> beta_true, const RegressionDataset& data,
                               const PivotSpec& spec, double lambda, double gamma);

} // namespace alasso
