#include "alasso/bootstrap.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/kernels.hpp"
#include "alasso/core/linalg.hpp"
#include "alasso/core/parallel.hpp"
#include "alasso/core/quantile.hpp"

#include <algorithm>
#include <cmath>

namespace alasso {

namespace {

constexpr std::size_t kindex(PivotKind k) { return static_cast<std::size_t>(k); }

double dot_row(const PivotSpec& spec, std::size_t row, std::span<const double> v)
{
    return kernels::dot(spec.D.row(row), v);
}

void check_level(double level)
{
    if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
}

} // namespace

bool BootstrapConfig::wants(PivotKind kind) const
{
    return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

const Matrix& PivotDraws::of(PivotKind kind) const
{
    const auto& v = values[kindex(kind)];
    if (!v) fail(ErrorCode::InvalidArgument, "bootstrap draws for pivot " + to_string(kind) + " were not requested");
    return *v;
}

Vector PivotDraws::column(PivotKind kind, std::size_t row) const
{
    return of(kind).col(row);
}

Vector resample_errors(const AlassoFit& fit, std::size_t n, RngStream& rng)
{
    const Vector& src = fit.centered_residuals;
    if (src.empty()) fail(ErrorCode::EmptySample, "no residuals to resample");
    Vector e(n);
    for (double& v : e) v = src[rng.uniform_index(src.size())];
    return e;
}

ReplicateValues bootstrap_replicate(const DesignCache& cache, std::span<const double> fitted, const AlassoFit& fit,
                                    const InitialEstimate& init, const PivotSpec& spec,
                                    const BootstrapConfig& config, RngStream& rng)
{
    const std::size_t n = cache.n();
    Vector y = resample_errors(fit, n, rng);
    kernels::axpy(1.0, fitted, y);

    InitialEstimate init_star = init;
    if (config.refit_initial) {
        if (init.method == InitialMethod::Ols) {
            init_star.beta_tilde = cache.ols_solver().solve(y);
        } else {
            SolverOptions s = config.solver;
            s.start = init.beta_tilde;
            init_star = fit_lasso(cache, y, init.lambda1, {}, s);
            init_star.stabilizer = init.stabilizer;
        }
    }
    SolverOptions s = config.solver;
    s.start = fit.beta_hat;
    const AlassoFit star = fit_alasso(cache, y, init_star, fit.lambda, fit.gamma, s);

    ReplicateValues out;
    const Vector t = pivot_T(star, spec, fit.beta_hat);
    if (config.wants(PivotKind::RawT)) out[kindex(PivotKind::RawT)] = t;
    if (config.wants(PivotKind::StudentizedR)) out[kindex(PivotKind::StudentizedR)] = pivot_R(star, spec, fit.beta_hat);
    if (config.wants(PivotKind::CorrectedRbreve)) {
        const BiasCorrection bc = bias_correction(star, init_star, cache, y, spec);
        out[kindex(PivotKind::CorrectedRbreve)] = pivot_Rbreve(star, bc, spec, fit.beta_hat);
    }
    return out;
}

PivotDraws run_bootstrap(const DesignCache& cache, std::span<const double> y, const InitialEstimate& init,
                         const AlassoFit& fit, const PivotSpec& spec, const BootstrapConfig& config)
{
    spec.validate(cache.p());
    if (config.B == 0) fail(ErrorCode::InvalidArgument, "bootstrap needs B >= 1");
    if (config.kinds.empty()) fail(ErrorCode::InvalidArgument, "no pivot kinds requested");
    if (!fit.converged) fail(ErrorCode::NoConvergence, "observed fit did not converge");

    PivotDraws draws;
    draws.B = config.B;
    draws.q = spec.q();
    draws.observed_fit = fit;
    draws.config = config;
    if (config.wants(PivotKind::CorrectedRbreve)) {
        if (fit.active_set.empty())
            fail(ErrorCode::EmptyActiveSet, "Rbreve bootstrap requested but the observed support is empty");
        draws.observed_correction = bias_correction(fit, init, cache, y, spec);
    }
    if (config.wants(PivotKind::StudentizedR) && !(fit.sigma_hat_sq > 1e-14))
        fail(ErrorCode::DegenerateVariance, "observed sigma_hat^2 is numerically zero");

    const Vector fitted = cache.design() * std::span<const double>(fit.beta_hat);
    const auto max_failures = static_cast<std::size_t>(std::floor(config.failure_budget * config.B));
    const RngStream master = config.rng();

    std::vector<ReplicateValues> results(config.B);
    std::vector<std::size_t> failures(config.B, 0);
    parallel_for(config.B, config.workers, [&](std::size_t r) {
        const RngStream base = master.substream(r);
        for (std::size_t attempt = 0; attempt <= max_failures; ++attempt) {
            RngStream rng = attempt == 0 ? base : base.substream(attempt);
            try {
                results[r] = bootstrap_replicate(cache, fitted, fit, init, spec, config, rng);
                return;
            } catch (const Error&) {
                ++failures[r];
            }
        }
    });

    for (std::size_t f : failures) draws.failed_replicates += f;
    if (draws.failed_replicates > max_failures)
        fail(ErrorCode::TooManyFailures, std::to_string(draws.failed_replicates) +
                                             " failed bootstrap replicates exceed the budget of " +
                                             std::to_string(max_failures));

    for (PivotKind kind : {PivotKind::RawT, PivotKind::StudentizedR, PivotKind::CorrectedRbreve}) {
        if (!config.wants(kind)) continue;
        Matrix m(config.B, spec.q());
        for (std::size_t r = 0; r < config.B; ++r)
            std::copy(results[r][kindex(kind)].begin(), results[r][kindex(kind)].end(), m.row(r).begin());
        draws.values[kindex(kind)] = std::move(m);
    }
    return draws;
}

PivotDraws run_bootstrap(const RegressionDataset& data, const InitialEstimate& init, const AlassoFit& fit,
                         const PivotSpec& spec, const BootstrapConfig& config)
{
    data.validate();
    const DesignCache cache(data.x);
    return run_bootstrap(cache, data.y, init, fit, spec, config);
}

std::string to_string(CiSide side)
{
    switch (side) {
    case CiSide::LowerBound: return "lower";
    case CiSide::UpperBound: return "upper";
    case CiSide::TwoSidedEqualTail: return "two-sided";
    case CiSide::TwoSidedSymmetric: return "symmetric";
    }
    return "two-sided";
}

std::string to_string(CiMethod method)
{
    switch (method) {
    case CiMethod::OracleNormal: return "oracle";
    case CiMethod::PercentileT: return "percentile-T";
    case CiMethod::StudentR: return "student-R";
    case CiMethod::StudentRbreve: return "student-Rbreve";
    }
    return "oracle";
}

CiSide parse_ci_side(const std::string& name)
{
    for (CiSide s : {CiSide::LowerBound, CiSide::UpperBound, CiSide::TwoSidedEqualTail, CiSide::TwoSidedSymmetric})
        if (to_string(s) == name) return s;
    fail(ErrorCode::UnknownVariant, "interval side '" + name + "'");
}

CiMethod parse_ci_method(const std::string& name)
{
    for (CiMethod m : {CiMethod::OracleNormal, CiMethod::PercentileT, CiMethod::StudentR, CiMethod::StudentRbreve})
        if (to_string(m) == name) return m;
    fail(ErrorCode::UnknownVariant, "interval method '" + name + "'");
}

ConfidenceInterval interval_from_pivot(double center, double shift, double scale, std::size_t n,
                                       std::span<const double> draws, double level, CiSide side, CiMethod method)
{
    check_level(level);
    const double rn = std::sqrt(static_cast<double>(n));
    auto theta = [&](double q) { return center + (shift - scale * q) / rn; };

    ConfidenceInterval ci;
    ci.level = level;
    ci.side = side;
    ci.method = method;
    Vector sorted(draws.begin(), draws.end());
    switch (side) {
    case CiSide::LowerBound:
        std::sort(sorted.begin(), sorted.end());
        ci.lower = theta(sorted_quantile(sorted, level));
        break;
    case CiSide::UpperBound:
        std::sort(sorted.begin(), sorted.end());
        ci.upper = theta(sorted_quantile(sorted, 1.0 - level));
        break;
    case CiSide::TwoSidedEqualTail: {
        std::sort(sorted.begin(), sorted.end());
        const double alpha = 1.0 - level;
        ci.lower = theta(sorted_quantile(sorted, 1.0 - alpha / 2.0));
        ci.upper = theta(sorted_quantile(sorted, alpha / 2.0));
        break;
    }
    case CiSide::TwoSidedSymmetric: {
        for (double& v : sorted) v = std::abs(v);
        std::sort(sorted.begin(), sorted.end());
        const double q = sorted_quantile(sorted, level);
        ci.lower = theta(q);
        ci.upper = theta(-q);
        break;
    }
    }
    if (std::isfinite(ci.lower) && std::isfinite(ci.upper)) ci.length = ci.upper - ci.lower;
    return ci;
}

ConfidenceInterval ci_oracle(const AlassoFit& fit, const DesignCache& cache, const PivotSpec& spec, double level,
                             CiSide side)
{
    check_level(level);
    if (spec.q() != 1) fail(ErrorCode::InvalidArgument, "oracle intervals need q = 1");
    const Matrix v = oracle_variance(fit, cache, spec);
    const double center = dot_row(spec, 0, fit.beta_hat);
    const double sd = std::sqrt(std::max(0.0, v(0, 0))) / std::sqrt(static_cast<double>(fit.n()));

    ConfidenceInterval ci;
    ci.level = level;
    ci.side = side;
    ci.method = CiMethod::OracleNormal;
    switch (side) {
    case CiSide::LowerBound: ci.lower = center - normal_quantile(level) * sd; break;
    case CiSide::UpperBound: ci.upper = center + normal_quantile(level) * sd; break;
    case CiSide::TwoSidedEqualTail:
    case CiSide::TwoSidedSymmetric: {
        const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
        ci.lower = center - z * sd;
        ci.upper = center + z * sd;
        break;
    }
    }
    if (std::isfinite(ci.lower) && std::isfinite(ci.upper)) ci.length = ci.upper - ci.lower;
    if (sd == 0.0) ci.warning = "oracle variance is zero; interval is a single point";
    return ci;
}

ConfidenceInterval ci_oracle(const AlassoFit& fit, const RegressionDataset& data, const PivotSpec& spec, double level,
                             CiSide side)
{
    const DesignCache cache(data.x);
    return ci_oracle(fit, cache, spec, level, side);
}

ConfidenceInterval ci_percentile_T(const PivotDraws& draws, const AlassoFit& fit, const PivotSpec& spec, double level,
                                   CiSide side, std::size_t row)
{
    const Vector t = draws.column(PivotKind::RawT, row);
    return interval_from_pivot(dot_row(spec, row, fit.beta_hat), 0.0, 1.0, fit.n(), t, level, side,
                               CiMethod::PercentileT);
}

ConfidenceInterval ci_student(const PivotDraws& draws, const AlassoFit& fit, const PivotSpec& spec, double level,
                              CiSide side, CiMethod method, std::size_t row)
{
    const double center = dot_row(spec, row, fit.beta_hat);
    if (method == CiMethod::StudentR) {
        if (!(fit.sigma_hat_sq > 1e-14)) fail(ErrorCode::DegenerateVariance, "sigma_hat^2 is numerically zero");
        const Vector r = draws.column(PivotKind::StudentizedR, row);
        return interval_from_pivot(center, 0.0, std::sqrt(fit.sigma_hat_sq), fit.n(), r, level, side, method);
    }
    if (method != CiMethod::StudentRbreve)
        fail(ErrorCode::InvalidArgument, "ci_student handles the student-R and student-Rbreve methods only");
    if (!draws.observed_correction || !draws.has(PivotKind::CorrectedRbreve)) {
        ConfidenceInterval ci = ci_percentile_T(draws, fit, spec, level, side, row);
        ci.warning = "estimated support is empty; student-Rbreve replaced by percentile-T";
        return ci;
    }
    const BiasCorrection& bc = *draws.observed_correction;
    if (!(bc.sigma_breve_sq > 1e-14)) fail(ErrorCode::DegenerateVariance, "sigma_breve^2 is numerically zero");
    const Vector r = draws.column(PivotKind::CorrectedRbreve, row);
    return interval_from_pivot(center, bc.f_breve[row], std::sqrt(bc.sigma_breve_sq), fit.n(), r, level, side,
                               method);
}

} // namespace alasso
