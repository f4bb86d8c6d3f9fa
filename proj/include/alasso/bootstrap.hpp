#pragma once

#include "alasso/pivots.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace alasso {

struct BootstrapConfig
{
    std::size_t B = 500;
    /// Recompute the initial estimator on every bootstrap sample; when off the
    /// observed initial estimate is reused (cheaper, weaker error bound).
    bool refit_initial = true;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<PivotKind> kinds{PivotKind::StudentizedR};
    std::size_t workers = 1;
    double failure_budget = 0.05;
    SolverOptions solver;

    RngStream rng() const { return RngStream(seed, stream); }
    bool wants(PivotKind kind) const;
};

struct PivotDraws
{
    std::size_t B = 0;
    std::size_t q = 0;
    /// B x q draws per pivot kind, indexed by PivotKind.
    std::array<std::optional<Matrix>, 3> values;
    AlassoFit observed_fit;
    std::optional<BiasCorrection> observed_correction;
    BootstrapConfig config;
    std::size_t failed_replicates = 0;

    bool has(PivotKind kind) const { return values[static_cast<std::size_t>(kind)].has_value(); }
    const Matrix& of(PivotKind kind) const;
    Vector column(PivotKind kind, std::size_t row) const;
};

/// n draws with replacement from the centered residuals of the fit.
Vector resample_errors(const AlassoFit& fit, std::size_t n, RngStream& rng);

/// Pivot values of one bootstrap world, indexed by PivotKind; kinds not
/// requested in the config are left empty.
using ReplicateValues = std::array<Vector, 3>;

/// One bootstrap world: y* = X beta_hat + e*, refit, and evaluate the pivots
/// with beta_hat in the role of the truth. Throws on solver failure.
ReplicateValues bootstrap_replicate(const DesignCache& cache, std::span<const double> fitted, const AlassoFit& fit,
                                    const InitialEstimate& init, const PivotSpec& spec,
                                    const BootstrapConfig& config, RngStream& rng);

PivotDraws run_bootstrap(const DesignCache& cache, std::span<const double> y, const InitialEstimate& init,
                         const AlassoFit& fit, const PivotSpec& spec, const BootstrapConfig& config);
PivotDraws run_bootstrap(const RegressionDataset& data, const InitialEstimate& init, const AlassoFit& fit,
                         const PivotSpec& spec, const BootstrapConfig& config);

enum class CiSide
{
    LowerBound,
    UpperBound,
    TwoSidedEqualTail,
    TwoSidedSymmetric,
};

enum class CiMethod
{
    OracleNormal,
    PercentileT,
    StudentR,
    StudentRbreve,
};

std::string to_string(CiSide side);
std::string to_string(CiMethod method);
CiSide parse_ci_side(const std::string& name);
CiMethod parse_ci_method(const std::string& name);

struct ConfidenceInterval
{
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double level = 0.9;
    CiSide side = CiSide::TwoSidedEqualTail;
    CiMethod method = CiMethod::OracleNormal;
    double length = std::numeric_limits<double>::infinity();
    std::string warning;

    bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Interval for D beta obtained by inverting  pivot = (sqrt(n)(center - theta) + shift) / scale
/// at the quantiles of `draws`.
ConfidenceInterval interval_from_pivot(double center, double shift, double scale, std::size_t n,
                                       std::span<const double> draws, double level, CiSide side, CiMethod method);

ConfidenceInterval ci_oracle(const AlassoFit& fit, const DesignCache& cache, const PivotSpec& spec, double level,
                             CiSide side);
ConfidenceInterval ci_oracle(const AlassoFit& fit, const RegressionDataset& data, const PivotSpec& spec, double level,
                             CiSide side);

ConfidenceInterval ci_percentile_T(const PivotDraws& draws, const AlassoFit& fit, const PivotSpec& spec, double level,
                                   CiSide side, std::size_t row = 0);

/// method is StudentR or StudentRbreve. Without an observed correction (empty
/// estimated support) the Rbreve request falls back to percentile-T.
ConfidenceInterval ci_student(const PivotDraws& draws, const AlassoFit& fit, const PivotSpec& spec, double level,
                              CiSide side, CiMethod method, std::size_t row = 0);

} // namespace alasso
