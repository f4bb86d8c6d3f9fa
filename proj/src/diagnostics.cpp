#include "alasso/diagnostics.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alasso {

namespace {

Matrix scaled_gram(const Matrix& x)
{
    Matrix c = crossprod(x);
    const double nd = static_cast<double>(x.rows());
    for (std::size_t k = 0; k < c.rows() * c.cols(); ++k) c.data()[k] /= nd;
    return c;
}

/// Columns V_k / sqrt(lambda_k) over the numerically nonzero spectrum.
Matrix range_whitener(const Matrix& block, const char* which)
{
    const SymEigen eig = sym_eigen(block);
    const double top = eig.values.empty() ? 0.0 : eig.values.back();
    IndexSet keep;
    for (std::size_t k = 0; k < eig.values.size(); ++k)
        if (eig.values[k] > 1e-10 * top && eig.values[k] > 0.0) keep.push_back(k);
    if (keep.empty()) fail(ErrorCode::SingularBlock, std::string(which) + " block of C_n has no nonzero spectrum");
    Matrix w(block.rows(), keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const double s = 1.0 / std::sqrt(eig.values[keep[c]]);
        for (std::size_t r = 0; r < block.rows(); ++r) w(r, c) = eig.vectors(r, keep[c]) * s;
    }
    return w;
}

IndexSet complement(const IndexSet& support, std::size_t p)
{
    std::vector<bool> in(p, false);
    for (std::size_t j : support) {
        if (j >= p) fail(ErrorCode::InvalidArgument, "support index out of range");
        in[j] = true;
    }
    IndexSet rest;
    for (std::size_t j = 0; j < p; ++j)
        if (!in[j]) rest.push_back(j);
    return rest;
}

std::array<double, 4> abs_moments(std::span<const double> v)
{
    std::array<double, 4> out{};
    const int powers[4] = {3, 4, 6, 8};
    for (double x : v) {
        const double a = std::abs(x);
        for (int k = 0; k < 4; ++k) out[k] += std::pow(a, powers[k]);
    }
    for (double& o : out) o /= static_cast<double>(v.size());
    return out;
}

} // namespace

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotCheckable: return "not-checkable";
    }
    return "not-checkable";
}

std::string to_string(SupportMode m)
{
    return m == SupportMode::Estimated ? "estimated" : "true";
}

TuningStage parse_tuning_stage(const std::string& name)
{
    if (name == "lasso-initial") return TuningStage::LassoInitial;
    if (name == "alasso") return TuningStage::Alasso;
    if (name == "alasso-zero-target") return TuningStage::AlassoZeroTarget;
    fail(ErrorCode::UnknownVariant, "tuning stage '" + name + "'");
}

double theoretical_lambda(std::size_t n, TuningStage stage)
{
    const double nd = static_cast<double>(n);
    switch (stage) {
    case TuningStage::LassoInitial: return 0.5 * std::sqrt(nd);
    case TuningStage::Alasso: return 2.0 * std::pow(nd, 0.25);
    case TuningStage::AlassoZeroTarget: return 0.25 * std::pow(nd, 0.25);
    }
    return 0.0;
}

double theoretical_lambda(std::size_t n, const std::string& stage)
{
    return theoretical_lambda(n, parse_tuning_stage(stage));
}

double check_c1(const RegressionDataset& data, const IndexSet& support)
{
    const IndexSet rest = complement(support, data.p());
    if (support.empty() || rest.empty())
        fail(ErrorCode::InvalidArgument, "both the support and its complement must be nonempty");
    const Matrix c = scaled_gram(data.x);
    const Matrix w1 = range_whitener(submatrix(c, support, support), "support");
    const Matrix w2 = range_whitener(submatrix(c, rest, rest), "complement");
    const Matrix m = w1.transpose() * submatrix(c, support, rest) * w2;
    const Matrix mmt = m * m.transpose();
    const SymEigen eig = sym_eigen(mmt, 1e-8 * std::max(1.0, max_abs(mmt)));
    const double top = eig.values.empty() ? 0.0 : eig.values.back();
    return std::sqrt(std::clamp(top, 0.0, 1.0));
}

C6Window check_c6_window(std::size_t n, std::size_t p0, double a, double b, double gamma, double delta)
{
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::ParameterOutOfRange, "a must lie in [0, 1]");
    if (!(b >= 0.0 && b < 0.5)) fail(ErrorCode::ParameterOutOfRange, "b must lie in [0, 1/2)");
    if (a + 2.0 * b > 1.0) fail(ErrorCode::ParameterOutOfRange, "a + 2b must not exceed 1");
    if (!(gamma > 0.0)) fail(ErrorCode::ParameterOutOfRange, "gamma must be positive");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::ParameterOutOfRange, "delta must lie in (0, 1)");
    if (n == 0 || p0 == 0) fail(ErrorCode::ParameterOutOfRange, "n and p0 must be positive");
    const double nd = static_cast<double>(n), pd = static_cast<double>(p0);
    C6Window w;
    w.upper = std::pow(nd, -delta) / delta *
              std::min({std::pow(nd, -b * gamma) / pd, std::pow(nd, -b * gamma - a / 2.0) / std::sqrt(pd),
                        std::pow(nd, -a)});
    w.lower = delta * std::pow(nd, delta) *
              std::max(std::pow(nd, a) * pd, std::pow(pd, 1.5) * std::pow(nd, b * std::max(0.0, 1.0 - gamma))) *
              std::pow(nd, -gamma / 2.0);
    w.empty = w.lower > w.upper;
    return w;
}

ConditionReport diagnose(const RegressionDataset& data, const IndexSet& support, SupportMode mode,
                         const PivotSpec& spec, const DiagnoseOptions& options, std::span<const double> beta,
                         std::span<const double> residuals)
{
    data.validate();
    spec.validate(data.p());
    if (support.empty()) fail(ErrorCode::EmptyActiveSet, "diagnostics need a nonempty support");
    const std::size_t n = data.n(), p = data.p();
    ConditionReport rep;
    rep.mode = mode;
    rep.support = support;
    const Matrix c = scaled_gram(data.x);
    const Matrix c11 = submatrix(c, support, support);

    // C1
    if (complement(support, p).empty()) {
        rep.verdicts["C1"] = Verdict::NotCheckable;
    } else {
        try {
            rep.c1_delta = check_c1(data, support);
            rep.verdicts["C1"] = *rep.c1_delta < 1.0 - options.c1_margin ? Verdict::Pass : Verdict::Fail;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularBlock) throw;
            rep.verdicts["C1"] = Verdict::Fail;
        }
    }

    // C2
    const SymEigen e11 = sym_eigen(c11);
    rep.eta_11n = e11.values.front();
    if (p <= n) rep.eta_n = sym_eigen(c).values.front();
    for (std::size_t j = 0; j < p; ++j) rep.c2_moment_bounds.push_back(abs_moments(data.x.col(j)));
    bool c11_ok = rep.eta_11n > 0.0;
    if (c11_ok) {
        const Matrix inv = Cholesky(c11).inverse();
        for (std::size_t k = 0; k < inv.rows(); ++k)
            rep.c2_c11_inverse_diag_max = std::max(rep.c2_c11_inverse_diag_max, inv(k, k));
    }
    if (p <= n && rep.eta_n && *rep.eta_n > 1e-12 * std::max(1.0, max_abs(c))) {
        const Matrix xt = Cholesky(c).solve(data.x.transpose());
        for (std::size_t j = 0; j < p; ++j) rep.c2_xtilde_bounds.push_back(abs_moments(xt.row(j)));
    }
    rep.verdicts["C2"] = c11_ok ? Verdict::Pass : Verdict::Fail;

    // C3
    if (c11_ok) {
        IndexSet rows(spec.q());
        for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
        const Matrix d1 = submatrix(spec.D, rows, support);
        const Matrix v = d1 * Cholesky(c11).solve(d1.transpose());
        const SymEigen ev = sym_eigen(v, 1e-8 * std::max(1.0, max_abs(v)));
        rep.c3_eigen_range = {ev.values.front(), ev.values.back()};
        rep.verdicts["C3"] = ev.values.front() > options.delta && ev.values.back() < 1.0 / options.delta
                                 ? Verdict::Pass
                                 : Verdict::Fail;
    } else {
        rep.verdicts["C3"] = Verdict::Fail;
    }

    // C4
    if (!beta.empty()) {
        if (beta.size() != p) fail(ErrorCode::DimensionMismatch, "coefficient vector length");
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t j : support) {
            lo = std::min(lo, std::abs(beta[j]));
            hi = std::max(hi, std::abs(beta[j]));
        }
        rep.c4_beta_min = lo;
        rep.c4_beta_max = hi;
        rep.verdicts["C4"] = lo > 0.0 ? Verdict::Pass : Verdict::Fail;
    } else {
        rep.verdicts["C4"] = Verdict::NotCheckable;
    }

    // C5: moment conditions and Cramer's condition cannot be verified from a sample.
    if (!residuals.empty()) {
        double m3 = 0.0, m4 = 0.0;
        for (double e : residuals) {
            m3 += e * e * e;
            m4 += e * e * e * e;
        }
        rep.mu3_hat = m3 / static_cast<double>(residuals.size());
        rep.mu4_hat = m4 / static_cast<double>(residuals.size());
    }
    rep.verdicts["C5"] = Verdict::NotCheckable;

    // C6
    rep.c6_window = check_c6_window(n, support.size(), options.a, options.b, options.gamma, options.delta);
    if (options.lambda) {
        rep.lambda_over_root_n = *options.lambda / std::sqrt(static_cast<double>(n));
        rep.verdicts["C6"] = !rep.c6_window.empty && *rep.lambda_over_root_n >= rep.c6_window.lower &&
                                     *rep.lambda_over_root_n <= rep.c6_window.upper
                                 ? Verdict::Pass
                                 : Verdict::Fail;
    } else {
        rep.verdicts["C6"] = Verdict::NotCheckable;
    }
    rep.verdicts["C7"] = Verdict::NotCheckable;
    return rep;
}

nlohmann::ordered_json ConditionReport::to_json() const
{
    using J = nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) { return v ? J(*v) : J(); };
    J j;
    j["support_mode"] = to_string(mode);
    IndexSet one_based = support;
    for (auto& s : one_based) ++s;
    j["support"] = one_based;
    j["c1_delta"] = opt(c1_delta);
    j["eta_n"] = opt(eta_n);
    j["eta_11n"] = eta_11n;
    J moments = J::array();
    for (const auto& m : c2_moment_bounds) moments.push_back(m);
    j["c2_moment_bounds_r3_r4_r6_r8"] = moments;
    J xt = J::array();
    for (const auto& m : c2_xtilde_bounds) xt.push_back(m);
    j["c2_xtilde_bounds_r3_r4_r6_r8"] = xt;
    j["c2_c11_inverse_diag_max"] = c2_c11_inverse_diag_max;
    j["c3_eigen_range"] = {c3_eigen_range.first, c3_eigen_range.second};
    j["c4_beta_min"] = opt(c4_beta_min);
    j["c4_beta_max"] = opt(c4_beta_max);
    j["c6_window"] = {{"lower", c6_window.lower}, {"upper", c6_window.upper}, {"empty", c6_window.empty}};
    j["lambda_over_root_n"] = opt(lambda_over_root_n);
    j["mu3_hat"] = opt(mu3_hat);
    j["mu4_hat"] = opt(mu4_hat);
    J v;
    for (const auto& [k, val] : verdicts) v[k] = to_string(val);
    j["verdicts"] = v;
    return j;
}

} // namespace alasso
