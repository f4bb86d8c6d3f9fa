#include "support/oracles.hpp"

#include "alasso/bootstrap.hpp"
#include "alasso/core/error.hpp"
#include "alasso/simulation.hpp"

#include <doctest.h>

using namespace alasso;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidArgument;
}

struct Observed
{
    GeneratedData g;
    std::optional<DesignCache> cache;
    ScenarioFit sf;

    explicit Observed(const std::string& name, std::size_t rep)
    {
        const Scenario sc = preset(name);
        g = generate_scenario_data(sc, rep);
        cache.emplace(g.data.x);
        sf = fit_scenario(sc, *cache, g.data, rep);
    }
};

PivotDraws synthetic_draws(const Vector& values, std::initializer_list<PivotKind> kinds)
{
    PivotDraws d;
    d.B = values.size();
    d.q = 1;
    for (PivotKind k : kinds) {
        Matrix m(values.size(), 1);
        for (std::size_t r = 0; r < values.size(); ++r) m(r, 0) = values[r];
        d.values[static_cast<std::size_t>(k)] = m;
    }
    return d;
}

AlassoFit point_fit(double beta, std::size_t n, double sigma_sq)
{
    AlassoFit f;
    f.beta_hat = {beta};
    f.active_set = {0};
    f.residuals.assign(n, 0.0);
    f.centered_residuals.assign(n, 0.0);
    f.sigma_hat_sq = sigma_sq;
    f.lambda = 1.0;
    f.converged = true;
    return f;
}

} // namespace

TEST_CASE("resample_errors: zero residuals and multinomial frequencies")
{
    AlassoFit f = point_fit(0.0, 10, 1.0);
    RngStream rng(1, 1);
    for (double v : resample_errors(f, 50, rng)) CHECK(v == 0.0);

    for (std::size_t i = 0; i < 10; ++i) f.centered_residuals[i] = static_cast<double>(i) - 4.5;
    double mean = 0.0;
    for (double v : f.centered_residuals) mean += v;
    CHECK(mean == 0.0);
    const std::size_t draws = 1000000;
    const Vector e = resample_errors(f, draws, rng);
    std::vector<std::size_t> counts(10, 0);
    for (double v : e) ++counts[static_cast<std::size_t>(v + 4.5)];
    const double expected = draws / 10.0, se = std::sqrt(draws * 0.1 * 0.9);
    for (std::size_t c : counts) CHECK(std::abs(static_cast<double>(c) - expected) <= 3.0 * se);
}

TEST_CASE("bootstrap_replicate: zero residuals give y* = X beta_hat")
{
    const Observed o("a", 2);
    AlassoFit fit = fit_alasso(*o.cache, o.g.data.y, o.sf.init, 1e-10, 1.0);
    std::fill(fit.centered_residuals.begin(), fit.centered_residuals.end(), 0.0);
    const Vector fitted = o.g.data.x * std::span<const double>(fit.beta_hat);
    BootstrapConfig cfg;
    cfg.kinds = {PivotKind::RawT};
    RngStream rng(3, 3);
    const auto v = bootstrap_replicate(*o.cache, fitted, fit, o.sf.init, PivotSpec::coordinate(10, 0), cfg, rng);
    CHECK(std::abs(v[0][0]) <= 1e-6);
}

TEST_CASE("bootstrap_replicate: a fixed stream reproduces bit for bit")
{
    const Observed o("a", 4);
    const Vector fitted = o.g.data.x * std::span<const double>(o.sf.fit.beta_hat);
    BootstrapConfig cfg;
    cfg.kinds = {PivotKind::RawT, PivotKind::StudentizedR, PivotKind::CorrectedRbreve};
    RngStream a(9, 77), b(9, 77);
    const PivotSpec e1 = PivotSpec::coordinate(10, 0);
    const auto va = bootstrap_replicate(*o.cache, fitted, o.sf.fit, o.sf.init, e1, cfg, a);
    const auto vb = bootstrap_replicate(*o.cache, fitted, o.sf.fit, o.sf.init, e1, cfg, b);
    for (std::size_t k = 0; k < 3; ++k) CHECK(va[k] == vb[k]);
}

TEST_CASE("run_bootstrap: deterministic and schedule independent")
{
    for (const char* name : {"a", "b"}) {
        const Observed o(name, 1);
        BootstrapConfig cfg;
        cfg.B = 100;
        cfg.seed = 2024;
        cfg.stream = 5;
        cfg.kinds = {PivotKind::RawT, PivotKind::StudentizedR, PivotKind::CorrectedRbreve};
        const PivotSpec e1 = PivotSpec::coordinate(o.g.data.p(), 0);
        const PivotDraws d1 = run_bootstrap(*o.cache, o.g.data.y, o.sf.init, o.sf.fit, e1, cfg);
        const PivotDraws d2 = run_bootstrap(*o.cache, o.g.data.y, o.sf.init, o.sf.fit, e1, cfg);
        for (std::size_t w : {4u, 8u}) {
            cfg.workers = w;
            const PivotDraws dw = run_bootstrap(*o.cache, o.g.data.y, o.sf.init, o.sf.fit, e1, cfg);
            for (PivotKind k : cfg.kinds) CHECK(dw.of(k).storage() == d1.of(k).storage());
        }
        for (PivotKind k : cfg.kinds) CHECK(d2.of(k).storage() == d1.of(k).storage());
        cfg.seed = 2025;
        const PivotDraws other = run_bootstrap(*o.cache, o.g.data.y, o.sf.init, o.sf.fit, e1, cfg);
        CHECK(other.of(PivotKind::RawT).storage() != d1.of(PivotKind::RawT).storage());
    }
}

TEST_CASE("run_bootstrap: an empty support is rejected before any replicate for Rbreve")
{
    const Observed o("a", 0);
    const double lmax = 2.0 * max_abs(crossprod(o.g.data.x, o.g.data.y)) * 10.0;
    const AlassoFit empty = fit_alasso(*o.cache, o.g.data.y, o.sf.init, lmax, 1.0);
    REQUIRE(empty.active_set.empty());
    BootstrapConfig cfg;
    cfg.B = 1000000;
    cfg.kinds = {PivotKind::CorrectedRbreve};
    CHECK(code_of([&] {
              run_bootstrap(*o.cache, o.g.data.y, o.sf.init, empty, PivotSpec::coordinate(10, 0), cfg);
          }) == ErrorCode::EmptyActiveSet);
}

TEST_CASE("run_bootstrap: mean of T* points against the estimated bias")
{
    const Scenario sc = preset("a");
    int agree = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        const Observed o("a", 100 + rep);
        BootstrapConfig cfg;
        cfg.B = 2000;
        cfg.seed = 99;
        cfg.stream = static_cast<std::uint64_t>(rep);
        cfg.kinds = {PivotKind::RawT, PivotKind::CorrectedRbreve};
        cfg.workers = 4;
        // beta_4 = 0.9 carries the largest bias among the targets
        const PivotSpec e1 = PivotSpec::coordinate(sc.p, 3);
        const PivotDraws d = run_bootstrap(*o.cache, o.g.data.y, o.sf.init, o.sf.fit, e1, cfg);
        double mean = 0.0;
        for (double v : d.column(PivotKind::RawT, 0)) mean += v / 2000.0;
        const double f = d.observed_correction->f_breve[0];
        agree += (mean < 0.0) == (-f < 0.0);
    }
    MESSAGE("sign agreement in " << agree << " of " << reps << " replicates");
    CHECK(agree >= 19);
}

TEST_CASE("interval_from_pivot: degenerate and symmetric draws")
{
    const Vector zeros(200, 0.0);
    for (CiSide side : {CiSide::TwoSidedEqualTail, CiSide::TwoSidedSymmetric}) {
        const auto ci = interval_from_pivot(1.25, 0.0, 1.0, 50, zeros, 0.9, side, CiMethod::PercentileT);
        CHECK(ci.lower == 1.25);
        CHECK(ci.upper == 1.25);
        CHECK(ci.length == 0.0);
    }
    // quantiles at +-s by construction: 1001 equally spaced points on [-s, s]
    const double s = 2.0;
    Vector sym(1001);
    for (std::size_t k = 0; k < sym.size(); ++k) sym[k] = -s + 2.0 * s * static_cast<double>(k) / 1000.0;
    const std::size_t n = 64;
    const auto ci = interval_from_pivot(0.5, 0.0, 1.0, n, sym, 0.9, CiSide::TwoSidedEqualTail, CiMethod::PercentileT);
    const double half = 0.9 * s / std::sqrt(double(n));
    CHECK(ci.lower == doctest::Approx(0.5 - half).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(0.5 + half).epsilon(1e-12));
    const auto lo = interval_from_pivot(0.5, 0.0, 1.0, n, sym, 0.9, CiSide::LowerBound, CiMethod::PercentileT);
    CHECK(lo.lower == doctest::Approx(0.5 - 0.8 * s / 8.0).epsilon(1e-12));
    CHECK(std::isinf(lo.upper));
    CHECK(std::isinf(lo.length));
    const auto up = interval_from_pivot(0.5, 0.0, 1.0, n, sym, 0.9, CiSide::UpperBound, CiMethod::PercentileT);
    CHECK(up.upper == doctest::Approx(0.5 + 0.8 * s / 8.0).epsilon(1e-12));
    CHECK(std::isinf(up.lower));
}

TEST_CASE("intervals: nesting across levels")
{
    std::mt19937_64 gen(4);
    const Vector draws = oracle::gaussian_vector(500, gen);
    for (CiSide side : {CiSide::TwoSidedEqualTail, CiSide::TwoSidedSymmetric, CiSide::LowerBound}) {
        const auto a = interval_from_pivot(0.0, 0.1, 1.3, 60, draws, 0.90, side, CiMethod::StudentR);
        const auto b = interval_from_pivot(0.0, 0.1, 1.3, 60, draws, 0.95, side, CiMethod::StudentR);
        CHECK(b.lower <= a.lower);
        CHECK(b.upper >= a.upper);
    }
}

TEST_CASE("ci_student: Rbreve reduces to R when the correction is neutral")
{
    std::mt19937_64 gen(5);
    const Vector v = oracle::gaussian_vector(300, gen);
    PivotDraws d = synthetic_draws(v, {PivotKind::StudentizedR, PivotKind::CorrectedRbreve});
    const AlassoFit f = point_fit(0.7, 40, 2.0);
    BiasCorrection bc;
    bc.f_breve = {0.0};
    bc.sigma_breve_sq = f.sigma_hat_sq;
    d.observed_correction = bc;
    const PivotSpec e1 = PivotSpec::coordinate(1, 0);
    for (CiSide side : {CiSide::TwoSidedEqualTail, CiSide::LowerBound, CiSide::TwoSidedSymmetric}) {
        const auto r = ci_student(d, f, e1, 0.9, side, CiMethod::StudentR);
        const auto rb = ci_student(d, f, e1, 0.9, side, CiMethod::StudentRbreve);
        CHECK(r.lower == rb.lower);
        CHECK(r.upper == rb.upper);
    }

    const PivotDraws zero = synthetic_draws(Vector(100, 0.0), {PivotKind::StudentizedR});
    const auto pt = ci_student(zero, f, e1, 0.9, CiSide::TwoSidedEqualTail, CiMethod::StudentR);
    CHECK(pt.lower == 0.7);
    CHECK(pt.upper == 0.7);

    PivotDraws no_corr = synthetic_draws(v, {PivotKind::RawT});
    const auto fb = ci_student(no_corr, f, e1, 0.9, CiSide::TwoSidedEqualTail, CiMethod::StudentRbreve);
    CHECK(fb.method == CiMethod::PercentileT);
    CHECK_FALSE(fb.warning.empty());
}

TEST_CASE("ci_oracle: z-quantile arithmetic and degenerate variance")
{
    const std::size_t n = 100;
    RegressionDataset d;
    d.x = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) d.x(i, 0) = i % 2 ? 1.0 : -1.0;
    d.y.assign(n, 0.0);
    AlassoFit f = point_fit(0.0, n, 1.0);
    const auto ci = ci_oracle(f, d, PivotSpec::coordinate(1, 0), 0.9, CiSide::TwoSidedEqualTail);
    CHECK(ci.lower == doctest::Approx(-0.16448536269514729).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(0.16448536269514729).epsilon(1e-12));
    CHECK(ci.warning.empty());
    const auto lb = ci_oracle(f, d, PivotSpec::coordinate(1, 0), 0.9, CiSide::LowerBound);
    CHECK(lb.lower == doctest::Approx(-0.12815515655446004).epsilon(1e-12));

    f.sigma_hat_sq = 0.0;
    const auto deg = ci_oracle(f, d, PivotSpec::coordinate(1, 0), 0.9, CiSide::TwoSidedEqualTail);
    CHECK(deg.lower == 0.0);
    CHECK(deg.upper == 0.0);
    CHECK_FALSE(deg.warning.empty());
    CHECK(code_of([&] { ci_oracle(f, d, PivotSpec::coordinate(1, 0), 1.0, CiSide::LowerBound); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("names round-trip")
{
    for (CiSide s : {CiSide::LowerBound, CiSide::UpperBound, CiSide::TwoSidedEqualTail, CiSide::TwoSidedSymmetric})
        CHECK(parse_ci_side(to_string(s)) == s);
    for (CiMethod m : {CiMethod::OracleNormal, CiMethod::PercentileT, CiMethod::StudentR, CiMethod::StudentRbreve})
        CHECK(parse_ci_method(to_string(m)) == m);
    CHECK(code_of([] { parse_ci_method("bca"); }) == ErrorCode::UnknownVariant);
}
