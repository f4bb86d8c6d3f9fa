#include "alasso/estimators.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alasso {

std::string to_string(StandardizeMode mode)
{
    switch (mode) {
    case StandardizeMode::None: return "none";
    case StandardizeMode::UnitNorm: return "unitnorm";
    case StandardizeMode::UnitSd: return "unitsd";
    }
    return "none";
}

StandardizeMode parse_standardize(const std::string& name)
{
    if (name == "none") return StandardizeMode::None;
    if (name == "unitnorm") return StandardizeMode::UnitNorm;
    if (name == "unitsd") return StandardizeMode::UnitSd;
    fail(ErrorCode::UnknownVariant, "standardization mode '" + name + "'");
}

std::string to_string(InitialMethod method)
{
    return method == InitialMethod::Ols ? "ols" : "lasso";
}

void RegressionDataset::validate() const
{
    if (n() < 2) fail(ErrorCode::InvalidArgument, "dataset needs at least two observations");
    if (y.size() != n()) fail(ErrorCode::DimensionMismatch, "response length differs from design rows");
    if (!x.all_finite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
        fail(ErrorCode::InvalidArgument, "dataset contains non-finite values");
    if (!names.empty() && names.size() != p())
        fail(ErrorCode::DimensionMismatch, "covariate names do not match the number of columns");
}

RegressionDataset standardize(RegressionDataset data, StandardizeMode mode)
{
    data.validate();
    ColumnScale cs;
    cs.mode = mode;
    const std::size_t n = data.n(), p = data.p();
    cs.center.assign(p, 0.0);
    cs.scale.assign(p, 1.0);
    if (mode == StandardizeMode::None) {
        data.column_scale = cs;
        return data;
    }
    const double nd = static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.x(i, j);
        mean /= nd;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (data.x(i, j) - mean) * (data.x(i, j) - mean);
        const double scale = mode == StandardizeMode::UnitNorm ? std::sqrt(ss) : std::sqrt(ss / (nd - 1.0));
        if (!(scale > 0.0)) {
            const std::string name = data.names.empty() ? std::to_string(j) : data.names[j];
            fail(ErrorCode::ZeroVarianceColumn, "column '" + name + "' has zero variance");
        }
        for (std::size_t i = 0; i < n; ++i) data.x(i, j) = (data.x(i, j) - mean) / scale;
        cs.center[j] = mean;
        cs.scale[j] = scale;
    }
    const double ymean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / nd;
    double yss = 0.0;
    for (double v : data.y) yss += (v - ymean) * (v - ymean);
    cs.y_center = ymean;
    cs.y_scale = mode == StandardizeMode::UnitSd ? std::sqrt(yss / (nd - 1.0)) : 1.0;
    if (!(cs.y_scale > 0.0)) fail(ErrorCode::ZeroVarianceColumn, "response has zero variance");
    for (double& v : data.y) v = (v - ymean) / cs.y_scale;
    data.column_scale = cs;
    return data;
}

DesignCache::DesignCache(const Matrix& x)
    : x_(&x), gram_(crossprod(x))
{}

Vector DesignCache::residuals(std::span<const double> y, std::span<const double> beta) const
{
    Vector fitted = (*x_) * beta;
    Vector r(y.size());
    kernels::sub(y, fitted, r);
    return r;
}

const LeastSquares& DesignCache::ols_solver() const
{
    if (!ols_) {
        if (p() > n())
            fail(ErrorCode::DimensionExceedsSample,
                 "OLS needs p <= n (p = " + std::to_string(p()) + ", n = " + std::to_string(n()) + ")");
        const SymEigen eig = sym_eigen(gram_);
        const double largest = eig.values.empty() ? 0.0 : eig.values.back();
        if (eig.values.empty() || !(eig.values.front() > 1e-10 * largest))
            fail(ErrorCode::SingularDesign, "X'X is numerically singular");
        ols_ = std::make_shared<LeastSquares>(*x_);
    }
    return *ols_;
}

namespace {

inline double soft_threshold(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double gram_objective(std::span<const double> beta, std::span<const double> xty, std::span<const double> r,
                      std::span<const double> penalty)
{
    // u'Gu - 2u'c with Gu = c - r
    double obj = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j)
        obj += -beta[j] * (xty[j] + r[j]) + penalty[j] * std::abs(beta[j]);
    return obj;
}

double stabilizer_for(std::size_t n, const InitialOptions& options)
{
    return options.stabilize ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0;
}

} // namespace

WeightedL1Result solve_weighted_l1(const Matrix& gram, std::span<const double> xty, std::span<const double> penalty,
                                   const SolverOptions& options)
{
    const std::size_t p = gram.rows();
    if (gram.cols() != p || xty.size() != p || penalty.size() != p)
        fail(ErrorCode::DimensionMismatch, "weighted l1 problem shapes");

    std::vector<std::size_t> order = options.order;
    if (order.empty()) {
        order.resize(p);
        std::iota(order.begin(), order.end(), std::size_t{0});
    } else if (order.size() != p) {
        fail(ErrorCode::DimensionMismatch, "cycling order must be a permutation of the coordinates");
    }

    WeightedL1Result out;
    out.beta = options.start.value_or(Vector(p, 0.0));
    if (out.beta.size() != p) fail(ErrorCode::DimensionMismatch, "start vector length");
    Vector& beta = out.beta;
    Vector r(p);

    auto refresh_residual = [&] {
        for (std::size_t j = 0; j < p; ++j) r[j] = xty[j] - kernels::dot(gram.row(j), beta);
    };

    auto update = [&](std::size_t j) -> double {
        const double gjj = gram(j, j);
        double next = 0.0;
        if (gjj > 0.0) {
            next = soft_threshold(r[j] + gjj * beta[j], 0.5 * penalty[j]) / gjj;
        } else if (!(penalty[j] > 0.0)) {
            fail(ErrorCode::ZeroWeightColumn, "column " + std::to_string(j) + " is identically zero and unpenalized");
        }
        const double delta = next - beta[j];
        if (delta != 0.0) {
            beta[j] = next;
            kernels::axpy(-delta, gram.row(j), r);
        }
        return std::abs(delta);
    };

    auto record = [&] {
        if (!options.check_monotone) return;
        const double obj = gram_objective(beta, xty, r, penalty);
        if (!out.objective_trace.empty()) {
            const double prev = out.objective_trace.back();
            if (obj > prev + 1e-10 * (1.0 + std::abs(prev)))
                fail(ErrorCode::NoConvergence, "criterion increased during coordinate descent");
        }
        out.objective_trace.push_back(obj);
    };

    // Exact minimizer on the current sign pattern; kept only when every sign
    // survives, so the criterion cannot increase.
    auto polish = [&](const std::vector<std::size_t>& act) -> bool {
        if (act.empty()) return false;
        Matrix g = submatrix(gram, act, act);
        Vector rhs(act.size()), sign(act.size());
        for (std::size_t k = 0; k < act.size(); ++k) {
            sign[k] = beta[act[k]] > 0.0 ? 1.0 : -1.0;
            rhs[k] = xty[act[k]] - 0.5 * penalty[act[k]] * sign[k];
        }
        Vector u;
        try {
            u = Cholesky(g).solve(rhs);
        } catch (const Error&) {
            return false;
        }
        for (std::size_t k = 0; k < act.size(); ++k)
            if (!(u[k] * sign[k] > 0.0)) return false;
        for (std::size_t k = 0; k < act.size(); ++k) beta[act[k]] = u[k];
        return true;
    };

    refresh_residual();
    record();
    std::vector<std::size_t> active;
    active.reserve(p);
    while (out.cycles < options.max_cycles) {
        refresh_residual();
        double max_change = 0.0;
        for (std::size_t j : order) max_change = std::max(max_change, update(j));
        ++out.cycles;
        record();
        if (max_change < options.tol) {
            out.converged = true;
            break;
        }
        // Sweep the current support until it settles, then re-check everything.
        std::size_t sweeps = 0;
        while (out.cycles < options.max_cycles) {
            active.clear();
            for (std::size_t j : order)
                if (beta[j] != 0.0) active.push_back(j);
            double change = 0.0;
            for (std::size_t j : active) change = std::max(change, update(j));
            ++out.cycles;
            record();
            if (change < options.tol) break;
            if (options.polish_every && ++sweeps % options.polish_every == 0 && polish(active)) {
                refresh_residual();
                record();
                break;
            }
        }
    }
    return out;
}

double weighted_l1_objective(const RegressionDataset& data, std::span<const double> beta,
                             std::span<const double> penalty)
{
    const Vector fitted = data.x * beta;
    double rss = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) rss += (data.y[i] - fitted[i]) * (data.y[i] - fitted[i]);
    double pen = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) pen += penalty[j] * std::abs(beta[j]);
    return rss + pen;
}

InitialEstimate fit_ols(const DesignCache& cache, std::span<const double> y, const InitialOptions& options)
{
    InitialEstimate est;
    est.method = InitialMethod::Ols;
    est.beta_tilde = cache.ols_solver().solve(y);
    est.stabilizer = stabilizer_for(cache.n(), options);
    return est;
}

InitialEstimate fit_ols(const RegressionDataset& data, const InitialOptions& options)
{
    data.validate();
    DesignCache cache(data.x);
    return fit_ols(cache, data.y, options);
}

InitialEstimate fit_lasso(const DesignCache& cache, std::span<const double> y, double lambda1,
                          const InitialOptions& options, const SolverOptions& solver)
{
    if (!(lambda1 > 0.0)) fail(ErrorCode::InvalidArgument, "LASSO penalty must be positive");
    const Vector c = cache.xty(y);
    const Vector penalty(cache.p(), lambda1);
    WeightedL1Result res = solve_weighted_l1(cache.gram(), c, penalty, solver);
    if (!res.converged)
        fail(ErrorCode::NoConvergence, "LASSO did not converge in " + std::to_string(solver.max_cycles) + " cycles");
    InitialEstimate est;
    est.method = InitialMethod::Lasso;
    est.beta_tilde = std::move(res.beta);
    est.lambda1 = lambda1;
    est.stabilizer = stabilizer_for(cache.n(), options);
    return est;
}

InitialEstimate fit_lasso(const RegressionDataset& data, double lambda1, const InitialOptions& options,
                          const SolverOptions& solver)
{
    data.validate();
    DesignCache cache(data.x);
    return fit_lasso(cache, data.y, lambda1, options, solver);
}

Vector alasso_weights(const InitialEstimate& init, double gamma)
{
    if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");
    Vector w(init.beta_tilde.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double base = std::abs(init.beta_tilde[j]) + init.stabilizer;
        if (!(base > 0.0))
            fail(ErrorCode::ZeroInitialComponent,
                 "initial estimate is zero at coordinate " + std::to_string(j) + " and no stabilizer is set");
        w[j] = std::pow(base, -gamma);
        if (!std::isfinite(w[j]))
            fail(ErrorCode::ZeroInitialComponent, "weight overflow at coordinate " + std::to_string(j));
    }
    return w;
}

AlassoFit fit_alasso(const DesignCache& cache, std::span<const double> y, const InitialEstimate& init, double lambda,
                     double gamma, const SolverOptions& solver)
{
    if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "ALASSO penalty must be positive");
    if (init.beta_tilde.size() != cache.p()) fail(ErrorCode::DimensionMismatch, "initial estimate length");
    AlassoFit fit;
    fit.lambda = lambda;
    fit.gamma = gamma;
    fit.weights = alasso_weights(init, gamma);
    Vector penalty(fit.weights.size());
    for (std::size_t j = 0; j < penalty.size(); ++j) penalty[j] = lambda * fit.weights[j];

    const Vector c = cache.xty(y);
    WeightedL1Result res = solve_weighted_l1(cache.gram(), c, penalty, solver);
    if (!res.converged)
        fail(ErrorCode::NoConvergence, "ALASSO did not converge in " + std::to_string(solver.max_cycles) + " cycles");
    fit.beta_hat = std::move(res.beta);
    fit.iterations = res.cycles;
    fit.converged = res.converged;
    for (std::size_t j = 0; j < fit.beta_hat.size(); ++j)
        if (fit.beta_hat[j] != 0.0) fit.active_set.push_back(j);

    fit.residuals = cache.residuals(y, fit.beta_hat);
    const double mean = kernels::sum(fit.residuals) / static_cast<double>(fit.residuals.size());
    fit.centered_residuals = fit.residuals;
    for (double& e : fit.centered_residuals) e -= mean;
    fit.sigma_hat_sq = kernels::sum_sq(fit.centered_residuals) / static_cast<double>(fit.residuals.size());
    return fit;
}

AlassoFit fit_alasso(const RegressionDataset& data, const InitialEstimate& init, double lambda, double gamma,
                     const SolverOptions& solver)
{
    data.validate();
    DesignCache cache(data.x);
    return fit_alasso(cache, data.y, init, lambda, gamma, solver);
}

namespace {

KktReport kkt_check(std::span<const double> beta, const RegressionDataset& data, std::span<const double> bound,
                    double tol)
{
    KktReport report;
    report.tol = tol;
    const Vector fitted = data.x * beta;
    Vector r(data.n());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = data.y[i] - fitted[i];
    const Vector g = crossprod(data.x, r);
    for (std::size_t j = 0; j < beta.size(); ++j) {
        KktCoordinate c;
        c.index = j;
        c.active = beta[j] != 0.0;
        c.gradient = 2.0 * g[j];
        c.bound = bound[j];
        if (c.active) {
            const double sgn = beta[j] > 0.0 ? 1.0 : -1.0;
            c.violation = std::abs(c.gradient - c.bound * sgn);
        } else {
            c.violation = std::max(0.0, std::abs(c.gradient) - c.bound);
        }
        c.pass = c.violation <= tol;
        if (!c.pass) {
            report.pass = false;
            ++report.violations;
        }
        report.coordinates.push_back(c);
    }
    return report;
}

} // namespace

KktReport kkt_certificate(const AlassoFit& fit, const RegressionDataset& data, double tol)
{
    Vector bound(fit.weights.size());
    for (std::size_t j = 0; j < bound.size(); ++j) bound[j] = fit.lambda * fit.weights[j];
    return kkt_check(fit.beta_hat, data, bound, tol);
}

KktReport kkt_certificate_lasso(std::span<const double> beta, const RegressionDataset& data, double lambda1, double tol)
{
    const Vector bound(beta.size(), lambda1);
    return kkt_check(beta, data, bound, tol);
}

std::vector<double> lambda_grid(const RegressionDataset& data, std::size_t count, double ratio,
                                std::span<const double> weights)
{
    if (count == 0 || !(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::InvalidArgument, "lambda grid parameters");
    if (!weights.empty() && weights.size() != data.p()) fail(ErrorCode::DimensionMismatch, "weights length");
    const Vector c = crossprod(data.x, data.y);
    double lmax = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        lmax = std::max(lmax, 2.0 * std::abs(c[j]) / (weights.empty() ? 1.0 : weights[j]));
    if (!(lmax > 0.0)) fail(ErrorCode::InvalidArgument, "X'y is zero; no penalty grid");
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        grid[k] = lmax * std::pow(ratio, t);
    }
    return grid;
}

CvResult cross_validate(const RegressionDataset& data, const std::vector<double>& grid, const CvOptions& options,
                        RngStream rng)
{
    data.validate();
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "cross-validation grid is empty");
    if (options.folds < 2) fail(ErrorCode::InvalidArgument, "cross-validation needs at least two folds");
    const std::size_t n = data.n();

    CvResult out;
    out.grid = grid;
    out.master_seed = rng.master_seed();
    out.stream_id = rng.stream_id();

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    out.fold_of.assign(n, 0);
    std::vector<IndexSet> held(options.folds), kept(options.folds);
    const std::size_t base = n / options.folds, extra = n % options.folds;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < options.folds; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        if (size < 2) fail(ErrorCode::FoldTooSmall, "fold " + std::to_string(k) + " has fewer than two observations");
        for (std::size_t t = 0; t < size; ++t) out.fold_of[perm[pos + t]] = k;
        pos += size;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < options.folds; ++k) (out.fold_of[i] == k ? held[k] : kept[k]).push_back(i);

    std::vector<std::vector<double>> err(grid.size(), std::vector<double>(options.folds));
    for (std::size_t k = 0; k < options.folds; ++k) {
        RegressionDataset train;
        train.x = select_rows(data.x, kept[k]);
        for (std::size_t i : kept[k]) train.y.push_back(data.y[i]);
        const Matrix xtest = select_rows(data.x, held[k]);
        DesignCache cache(train.x);

        std::optional<InitialEstimate> init;
        if (options.objective == CvObjective::AlassoGivenInit) {
            if (train.p() <= train.n() && !options.lambda1) {
                init = fit_ols(cache, train.y, options.initial);
            } else if (options.lambda1) {
                init = fit_lasso(cache, train.y, *options.lambda1, options.initial, options.solver);
            } else {
                fail(ErrorCode::InvalidArgument, "p exceeds the fold size; a LASSO initial penalty is required");
            }
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            Vector beta;
            if (options.objective == CvObjective::Lasso) {
                beta = fit_lasso(cache, train.y, grid[g], options.initial, options.solver).beta_tilde;
            } else {
                beta = fit_alasso(cache, train.y, *init, grid[g], options.gamma, options.solver).beta_hat;
            }
            const Vector pred = xtest * beta;
            double sse = 0.0;
            for (std::size_t t = 0; t < held[k].size(); ++t) {
                const double d = data.y[held[k][t]] - pred[t];
                sse += d * d;
            }
            err[g][k] = sse / static_cast<double>(held[k].size());
        }
    }

    const double kf = static_cast<double>(options.folds);
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double mean = std::accumulate(err[g].begin(), err[g].end(), 0.0) / kf;
        double ss = 0.0;
        for (double e : err[g]) ss += (e - mean) * (e - mean);
        out.mean_error.push_back(mean);
        out.se_error.push_back(std::sqrt(ss / (kf - 1.0) / kf));
        const double cur = out.mean_error[best];
        if (mean < cur || (mean == cur && grid[g] > grid[best])) best = g;
    }
    out.lambda = grid[best];
    return out;
}

} // namespace alasso
