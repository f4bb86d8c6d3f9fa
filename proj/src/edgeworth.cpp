#include "alasso/edgeworth.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/linalg.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace alasso {

namespace {

constexpr int kMaxOrder = 6;

struct Series
{
    double var = 1.0;
    std::array<double, kMaxOrder + 1> c{}; ///< coefficient of chi_k, k >= 1
};

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Series psi_series(const EdgeworthSpec& s)
{
    Series out;
    out.var = s.sigma_sq * s.upsilon_breve;
    double fk = 1.0;
    for (int k = 1; k <= s.r1; ++k) {
        fk *= s.f_n;
        out.c[k] += fk;
    }
    out.c[3] += s.mu3 / (6.0 * std::sqrt(static_cast<double>(s.n))) * s.xi_bar[3];
    return out;
}

Series pi_series(const EdgeworthSpec& s)
{
    Series out;
    out.var = s.upsilon_breve;
    double term = 1.0;
    for (int k = 1; k <= s.r1; ++k) {
        term *= -s.f_n / k;
        out.c[k] += term;
    }
    const double skew = s.mu3 / (6.0 * std::pow(s.sigma_sq, 1.5) * std::sqrt(static_cast<double>(s.n)));
    out.c[3] += skew * (s.xi_bar[3] - 3.0 * s.xi_bar[1] * s.xi_bar[2]);
    out.c[1] += skew * (-3.0 * s.xi_bar[1]);
    return out;
}

double series_density(double x, const Series& s)
{
    double bracket = 1.0;
    for (int k = 1; k <= kMaxOrder; ++k)
        if (s.c[k] != 0.0) bracket += s.c[k] * hermite_chi(k, x, s.var);
    return normal_density(x, s.var) * bracket;
}

double series_cdf(double x, const Series& s)
{
    double acc = normal_cdf(x / std::sqrt(s.var));
    const double phi = normal_density(x, s.var);
    for (int k = 1; k <= kMaxOrder; ++k)
        if (s.c[k] != 0.0) acc -= s.c[k] * hermite_chi(k - 1, x, s.var) * phi;
    return acc;
}

EdgeworthSpec build_core(const RegressionDataset& data, const IndexSet& support, std::span<const double> beta,
                         double lambda, double gamma, const PivotSpec& spec, const ErrorMoments& moments,
                         const EdgeworthOptions& options)
{
    data.validate();
    const std::size_t n = data.n(), p = data.p();
    if (p > n) fail(ErrorCode::RequiresPleN, "the expansion needs C_n^{-1}, so p must not exceed n");
    if (spec.q() != 1) fail(ErrorCode::InvalidArgument, "expansions are implemented for q = 1 only");
    if (spec.D.cols() != p || beta.size() != p) fail(ErrorCode::DimensionMismatch, "expansion dimensions");
    if (support.empty()) fail(ErrorCode::EmptyActiveSet, "support is empty");
    if (!(moments.sigma_sq > 0.0)) fail(ErrorCode::DegenerateVariance, "error variance must be positive");

    const double nd = static_cast<double>(n);
    Matrix cn = crossprod(data.x);
    for (std::size_t k = 0; k < p * p; ++k) cn.data()[k] /= nd;
    std::optional<Cholesky> cn_chol;
    try {
        cn_chol.emplace(cn);
    } catch (const Error&) {
        fail(ErrorCode::SingularDesign, "C_n is singular");
    }
    const std::size_t p0 = support.size();
    const Matrix c11 = submatrix(cn, support, support);
    Vector d1(p0);
    for (std::size_t k = 0; k < p0; ++k) d1[k] = spec.D(0, support[k]);
    Vector a;
    try {
        a = Cholesky(c11).solve(d1);
    } catch (const Error&) {
        fail(ErrorCode::SingularSubmatrix, "support block of C_n is singular");
    }

    EdgeworthSpec es;
    es.n = n;
    es.sigma_sq = moments.sigma_sq;
    es.mu3 = moments.mu3;
    es.lambda_used = options.halve_penalty ? 0.5 * lambda : lambda;

    double as = 0.0;
    Vector eta_coef(p0);
    for (std::size_t k = 0; k < p0; ++k) {
        const double b = beta[support[k]];
        if (b == 0.0) fail(ErrorCode::ZeroTrueCoefficient, "zero coefficient inside the support");
        as += a[k] * sgn(b) * std::pow(std::abs(b), -gamma);
        eta_coef[k] = -(es.lambda_used / nd) * sgn(b) * gamma * std::pow(std::abs(b), -(gamma + 1.0));
    }
    es.f_n = as * es.lambda_used / std::sqrt(nd);

    // x-tilde_i = C_n^{-1} x_i
    const Matrix xt = cn_chol->solve(data.x.transpose());
    double ups = 0.0, upsb = 0.0, cross = 0.0;
    std::array<double, 4> xb{};
    for (std::size_t i = 0; i < n; ++i) {
        double xi0 = 0.0, eta0 = 0.0;
        for (std::size_t k = 0; k < p0; ++k) {
            xi0 += a[k] * data.x(i, support[k]);
            eta0 += a[k] * eta_coef[k] * xt(support[k], i);
        }
        ups += xi0 * xi0;
        upsb += (xi0 + eta0) * (xi0 + eta0);
        cross += xi0 * eta0;
        xb[1] += xi0;
        xb[2] += xi0 * xi0;
        xb[3] += xi0 * xi0 * xi0;
    }
    es.upsilon = ups / nd;
    es.upsilon_breve = upsb / nd;
    es.cross_moment = cross / nd;
    for (int k = 1; k <= 3; ++k) es.xi_bar[k] = xb[k] / nd;
    es.r1 = select_r1(es.f_n, n);
    return es;
}

} // namespace

double hermite_chi(int k, double x, double v)
{
    if (k < 0) fail(ErrorCode::InvalidArgument, "Hermite order must be non-negative");
    const double s = std::sqrt(v);
    const double t = x / s;
    double h0 = 1.0, h1 = t;
    if (k == 0) return 1.0;
    for (int m = 1; m < k; ++m) {
        const double h2 = t * h1 - m * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1 * std::pow(v, -0.5 * k);
}

double normal_density(double x, double v)
{
    return std::exp(-0.5 * x * x / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

int select_r1(double f, std::size_t n)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(n));
    const double af = std::abs(f);
    for (int r = 1; r < kMaxOrder; ++r)
        if (std::pow(af, r + 1) <= bound) return r;
    return kMaxOrder;
}

EdgeworthSpec build_spec(const RegressionDataset& data, std::span<const double> beta_true, double lambda,
                         double gamma, const PivotSpec& spec, const ErrorMoments& moments,
                         const EdgeworthOptions& options)
{
    IndexSet support;
    for (std::size_t j = 0; j < beta_true.size(); ++j)
        if (beta_true[j] != 0.0) support.push_back(j);
    if (support.empty()) fail(ErrorCode::ZeroTrueCoefficient, "true support is empty");
    return build_core(data, support, beta_true, lambda, gamma, spec, moments, options);
}

EdgeworthSpec build_spec_plugin(const RegressionDataset& data, const AlassoFit& fit, const PivotSpec& spec,
                                const EdgeworthOptions& options)
{
    ErrorMoments m;
    m.sigma_sq = fit.sigma_hat_sq;
    double m3 = 0.0;
    for (double e : fit.centered_residuals) m3 += e * e * e;
    m.mu3 = m3 / static_cast<double>(fit.centered_residuals.size());
    EdgeworthSpec es = build_core(data, fit.active_set, fit.beta_hat, fit.lambda, fit.gamma, spec, m, options);
    es.plug_in = true;
    return es;
}

double psi_density(double x, const EdgeworthSpec& spec) { return series_density(x, psi_series(spec)); }
double pi_density(double x, const EdgeworthSpec& spec) { return series_density(x, pi_series(spec)); }
double psi_cdf(double x, const EdgeworthSpec& spec) { return series_cdf(x, psi_series(spec)); }
double pi_cdf(double x, const EdgeworthSpec& spec) { return series_cdf(x, pi_series(spec)); }

double ee_cdf(const std::function<double(double)>& density, double a, double b, double scale_var)
{
    if (!(scale_var > 0.0)) fail(ErrorCode::InvalidArgument, "scale variance must be positive");
    if (!(a < b)) return 0.0;
    const double reach = 12.0 * std::sqrt(scale_var);
    const double lo = std::max(a, -reach), hi = std::min(b, reach);
    if (!(lo < hi)) return 0.0;
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, lo, hi, 15, 1e-13, &error);
    if (!(error <= 1e-8) || !std::isfinite(value))
        fail(ErrorCode::QuadratureFailure, "quadrature error estimate " + std::to_string(error));
    return value;
}

} // namespace alasso
