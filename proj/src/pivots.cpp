#include "alasso/pivots.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/kernels.hpp"
#include "alasso/core/linalg.hpp"

#include <cmath>

namespace alasso {

namespace {

constexpr double kMinVariance = 1e-14;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Cholesky block_factor(const DesignCache& cache, const IndexSet& idx)
{
    Matrix c11 = submatrix(cache.gram(), idx, idx);
    const double scale = 1.0 / static_cast<double>(cache.n());
    for (std::size_t k = 0; k < c11.rows() * c11.cols(); ++k) c11.data()[k] *= scale;
    try {
        return Cholesky(c11);
    } catch (const Error& e) {
        fail(ErrorCode::SingularSubmatrix, std::string("support block of C_n is singular: ") + e.what());
    }
}

void check_lengths(const AlassoFit& fit, const PivotSpec& spec, std::span<const double> beta_true)
{
    if (spec.D.cols() != fit.p() || beta_true.size() != fit.p())
        fail(ErrorCode::DimensionMismatch, "pivot dimensions do not match the fit");
}

} // namespace

std::string to_string(PivotKind kind)
{
    switch (kind) {
    case PivotKind::RawT: return "T";
    case PivotKind::StudentizedR: return "R";
    case PivotKind::CorrectedRbreve: return "Rbreve";
    }
    return "T";
}

PivotKind parse_pivot_kind(const std::string& name)
{
    if (name == "T") return PivotKind::RawT;
    if (name == "R") return PivotKind::StudentizedR;
    if (name == "Rbreve") return PivotKind::CorrectedRbreve;
    fail(ErrorCode::UnknownVariant, "pivot kind '" + name + "'");
}

PivotSpec PivotSpec::coordinate(std::size_t p, std::size_t j, PivotKind kind)
{
    if (j >= p) fail(ErrorCode::InvalidArgument, "coordinate " + std::to_string(j) + " out of range");
    PivotSpec spec;
    spec.D = Matrix(1, p, 0.0);
    spec.D(0, j) = 1.0;
    spec.kind = kind;
    return spec;
}

void PivotSpec::validate(std::size_t p) const
{
    if (D.rows() == 0) fail(ErrorCode::InvalidArgument, "D must have at least one row");
    if (D.cols() != p) fail(ErrorCode::DimensionMismatch, "D must have p columns");
    double tr = 0.0;
    for (double v : D.storage()) tr += v * v;
    if (tr > trace_bound) fail(ErrorCode::InvalidArgument, "trace(DD') exceeds the configured bound");
}

Vector pivot_T(const AlassoFit& fit, const PivotSpec& spec, std::span<const double> beta_true)
{
    check_lengths(fit, spec, beta_true);
    Vector diff(fit.p());
    kernels::sub(fit.beta_hat, beta_true, diff);
    Vector t = spec.D * diff;
    const double root_n = std::sqrt(static_cast<double>(fit.n()));
    for (double& v : t) v *= root_n;
    return t;
}

Vector pivot_R(const AlassoFit& fit, const PivotSpec& spec, std::span<const double> beta_true)
{
    if (!(fit.sigma_hat_sq > kMinVariance)) fail(ErrorCode::DegenerateVariance, "sigma_hat^2 is numerically zero");
    Vector t = pivot_T(fit, spec, beta_true);
    const double s = std::sqrt(fit.sigma_hat_sq);
    for (double& v : t) v /= s;
    return t;
}

BiasCorrection bias_correction(const AlassoFit& fit, const InitialEstimate& init, const DesignCache& cache,
                               std::span<const double> y, const PivotSpec& spec)
{
    if (spec.D.cols() != fit.p() || init.beta_tilde.size() != fit.p() || y.size() != cache.n())
        fail(ErrorCode::DimensionMismatch, "bias correction dimensions");
    if (fit.active_set.empty()) fail(ErrorCode::EmptyActiveSet, "estimated support is empty");
    const IndexSet& act = fit.active_set;

    BiasCorrection bc;
    bc.active_set_used = act;
    Vector s(act.size());
    for (std::size_t k = 0; k < act.size(); ++k) {
        const std::size_t j = act[k];
        const double base = std::abs(init.beta_tilde[j]) + init.stabilizer;
        if (!(base > 0.0))
            fail(ErrorCode::ZeroInitialComponent, "initial estimate is zero at active coordinate " + std::to_string(j));
        s[k] = sgn(fit.beta_hat[j]) * std::pow(base, -fit.gamma);
    }
    const Cholesky chol = block_factor(cache, act);
    const Vector cs = chol.solve(s);
    const double scale = fit.lambda / std::sqrt(static_cast<double>(cache.n()));
    bc.f_breve.assign(spec.q(), 0.0);
    for (std::size_t r = 0; r < spec.q(); ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < act.size(); ++k) acc += spec.D(r, act[k]) * cs[k];
        bc.f_breve[r] = acc * scale;
    }

    bc.beta_breve.assign(fit.p(), 0.0);
    for (std::size_t j : act) bc.beta_breve[j] = init.beta_tilde[j];
    Vector e = cache.residuals(y, bc.beta_breve);
    const double nd = static_cast<double>(e.size());
    const double mean = kernels::sum(e) / nd;
    for (double& v : e) v -= mean;
    bc.sigma_breve_sq = kernels::sum_sq(e) / nd;
    return bc;
}

BiasCorrection bias_correction(const AlassoFit& fit, const InitialEstimate& init, const RegressionDataset& data,
                               const PivotSpec& spec)
{
    const DesignCache cache(data.x);
    return bias_correction(fit, init, cache, data.y, spec);
}

Vector pivot_Rbreve(const AlassoFit& fit, const BiasCorrection& correction, const PivotSpec& spec,
                    std::span<const double> beta_true)
{
    if (!(correction.sigma_breve_sq > kMinVariance))
        fail(ErrorCode::DegenerateVariance, "sigma_breve^2 is numerically zero");
    if (correction.f_breve.size() != spec.q()) fail(ErrorCode::DimensionMismatch, "f_breve length");
    Vector t = pivot_T(fit, spec, beta_true);
    const double s = std::sqrt(correction.sigma_breve_sq);
    for (std::size_t r = 0; r < t.size(); ++r) t[r] = (t[r] + correction.f_breve[r]) / s;
    return t;
}

Matrix oracle_variance(const AlassoFit& fit, const DesignCache& cache, const PivotSpec& spec)
{
    if (spec.D.cols() != fit.p()) fail(ErrorCode::DimensionMismatch, "D must have p columns");
    if (fit.active_set.empty()) fail(ErrorCode::EmptyActiveSet, "estimated support is empty");
    const IndexSet& act = fit.active_set;
    IndexSet rows(spec.q());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    const Matrix d1 = submatrix(spec.D, rows, act);
    const Matrix sol = block_factor(cache, act).solve(d1.transpose());
    Matrix v = d1 * sol;
    for (std::size_t a = 0; a < v.rows(); ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            const double m = 0.5 * (v(a, b) + v(b, a)) * fit.sigma_hat_sq;
            v(a, b) = m;
            v(b, a) = m;
        }
    return v;
}

Matrix oracle_variance(const AlassoFit& fit, const RegressionDataset& data, const PivotSpec& spec)
{
    const DesignCache cache(data.x);
    return oracle_variance(fit, cache, spec);
}

PopulationBias population_bias(std::span<const double> beta_true, const RegressionDataset& data,
                               const PivotSpec& spec, double lambda, double gamma)
{
    if (beta_true.size() != data.p() || spec.D.cols() != data.p())
        fail(ErrorCode::DimensionMismatch, "population bias dimensions");
    PopulationBias pb;
    for (std::size_t j = 0; j < beta_true.size(); ++j)
        if (beta_true[j] != 0.0) pb.support.push_back(j);
    if (pb.support.empty()) fail(ErrorCode::ZeroTrueCoefficient, "true support is empty");

    const DesignCache cache(data.x);
    const Cholesky chol = block_factor(cache, pb.support);
    const std::size_t p0 = pb.support.size();
    Vector lam(p0);
    pb.s1.resize(p0);
    for (std::size_t k = 0; k < p0; ++k) {
        const double b = beta_true[pb.support[k]];
        pb.s1[k] = sgn(b) * std::pow(std::abs(b), -gamma);
        lam[k] = sgn(b) * std::pow(std::abs(b), -(gamma + 1.0));
    }
    IndexSet rows(spec.q());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    const Matrix d1 = submatrix(spec.D, rows, pb.support);

    const Vector cs = chol.solve(pb.s1);
    pb.f_n = d1 * cs;
    const double scale = lambda / std::sqrt(static_cast<double>(data.n()));
    for (double& v : pb.f_n) v *= scale;

    const Matrix a = chol.solve(d1.transpose()); // C11^{-1} D1'
    Matrix la = a;
    for (std::size_t k = 0; k < p0; ++k)
        for (std::size_t r = 0; r < la.cols(); ++r) la(k, r) *= lam[k];
    pb.gamma_n = a.transpose() * la;
    return pb;
}

} // namespace alasso
