#include "support/oracles.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/linalg.hpp"
#include "alasso/diagnostics.hpp"
#include "alasso/simulation.hpp"

#include <doctest.h>

#include <cmath>

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

Matrix lower_cholesky(const Matrix& a)
{
    const std::size_t p = a.rows();
    Matrix l(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Design whose empirical Gram matrix n^{-1} X'X equals `target` exactly.
RegressionDataset with_gram(const Matrix& target, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    const Matrix q = oracle::orthogonal_design(n, target.rows(), gen);
    const Matrix l = lower_cholesky(target);
    RegressionDataset d;
    d.x = Matrix(n, target.rows());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < target.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += q(i, k) * l(j, k);
            d.x(i, j) = s;
        }
    d.y = oracle::gaussian_vector(n, gen);
    return d;
}

} // namespace

TEST_CASE("check_c1: orthogonal blocks and a duplicated column")
{
    std::mt19937_64 gen(11);
    RegressionDataset d;
    d.x = oracle::orthogonal_design(40, 5, gen);
    d.y = oracle::gaussian_vector(40, gen);
    CHECK(check_c1(d, {0, 1}) <= 1e-12);

    for (std::size_t i = 0; i < 40; ++i) d.x(i, 4) = d.x(i, 1);
    CHECK(check_c1(d, {0, 1}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(code_of([&] { check_c1(d, {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { check_c1(d, {0, 1, 2, 3, 4}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("check_c1: two-by-two blocks with known canonical correlations")
{
    for (double rho : {-0.6, 0.0, 0.25, 0.8}) {
        // cross block rho I: both canonical correlations equal |rho|
        Matrix cross(4, 4);
        for (std::size_t j = 0; j < 4; ++j) cross(j, j) = 1.0;
        cross(0, 2) = cross(2, 0) = cross(1, 3) = cross(3, 1) = rho;
        CHECK(check_c1(with_gram(cross, 50, 3), {0, 1}) == doctest::Approx(std::abs(rho)).epsilon(1e-10).scale(1.0));
    }
    for (double rho : {0.1, 0.3, 0.6}) {
        // all pairwise correlations rho: the sums carry correlation 2 rho / (1 + rho)
        Matrix eq(4, 4);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) eq(a, b) = a == b ? 1.0 : rho;
        CHECK(check_c1(with_gram(eq, 50, 4), {0, 1}) == doctest::Approx(2.0 * rho / (1.0 + rho)).epsilon(1e-10));
    }
}

TEST_CASE("check_c1: invariant to invertible transforms within each block")
{
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 10; ++trial) {
        RegressionDataset d;
        d.x = oracle::gaussian_matrix(30, 4, gen);
        d.y = oracle::gaussian_vector(30, gen);
        const double base = check_c1(d, {0, 1});
        const Matrix a = oracle::gaussian_matrix(2, 2, gen), b = oracle::gaussian_matrix(2, 2, gen);
        RegressionDataset t = d;
        for (std::size_t i = 0; i < 30; ++i) {
            t.x(i, 0) = d.x(i, 0) * a(0, 0) + d.x(i, 1) * a(1, 0);
            t.x(i, 1) = d.x(i, 0) * a(0, 1) + d.x(i, 1) * a(1, 1);
            t.x(i, 2) = d.x(i, 2) * b(0, 0) + d.x(i, 3) * b(1, 0);
            t.x(i, 3) = d.x(i, 2) * b(0, 1) + d.x(i, 3) * b(1, 1);
        }
        CHECK(check_c1(t, {0, 1}) == doctest::Approx(base).epsilon(1e-8));
        CHECK(base <= 1.0);
    }
}

TEST_CASE("check_c6_window: formula, emptiness and monotonicity")
{
    const C6Window w = check_c6_window(60, 5, 0.0, 0.0, 1.0, 0.1);
    const double nd = 60.0;
    CHECK(w.upper == doctest::Approx(std::pow(nd, -0.1) / 0.1 * std::min(1.0 / 5.0, 1.0 / std::sqrt(5.0))));
    CHECK(w.lower == doctest::Approx(0.1 * std::pow(nd, 0.1) * std::pow(5.0, 1.5) / std::sqrt(nd)));
    CHECK_FALSE(w.empty);
    CHECK(w.lower <= w.upper);

    CHECK(code_of([] { check_c6_window(60, 5, 0.0, 0.5, 1.0, 0.1); }) == ErrorCode::ParameterOutOfRange);
    CHECK(code_of([] { check_c6_window(60, 5, 0.6, 0.3, 1.0, 0.1); }) == ErrorCode::ParameterOutOfRange);
    CHECK(code_of([] { check_c6_window(60, 5, 0.0, 0.0, 0.0, 0.1); }) == ErrorCode::ParameterOutOfRange);
    CHECK(code_of([] { check_c6_window(60, 5, 0.0, 0.0, 1.0, 1.0); }) == ErrorCode::ParameterOutOfRange);

    // Larger gamma lowers the lower end; larger delta shrinks the window.
    double prev = check_c6_window(500, 3, 0.1, 0.2, 0.5, 0.1).lower;
    for (double g : {1.0, 1.5, 2.0}) {
        const double lo = check_c6_window(500, 3, 0.1, 0.2, g, 0.1).lower;
        CHECK(lo < prev);
        prev = lo;
    }
    double lo_prev = 0.0, up_prev = 1e300;
    for (double dl : {0.05, 0.1, 0.2, 0.4}) {
        const C6Window c = check_c6_window(500, 3, 0.1, 0.2, 1.0, dl);
        CHECK(c.lower > lo_prev);
        CHECK(c.upper < up_prev);
        lo_prev = c.lower;
        up_prev = c.upper;
    }
    CHECK(check_c6_window(60, 50, 0.0, 0.0, 1.0, 0.1).empty);
}

TEST_CASE("theoretical_lambda values at n = 60")
{
    CHECK(theoretical_lambda(60, "alasso") == doctest::Approx(5.5663).epsilon(1e-4));
    CHECK(theoretical_lambda(60, "lasso-initial") == doctest::Approx(3.873).epsilon(1e-4));
    CHECK(theoretical_lambda(60, "alasso-zero-target") == doctest::Approx(0.696).epsilon(1e-3));
    CHECK(code_of([] { theoretical_lambda(60, "ridge"); }) == ErrorCode::UnknownVariant);
}

TEST_CASE("diagnose: eigenvalue interlacing and verdicts on case (a)")
{
    const Scenario sc = preset("a");
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const GeneratedData g = generate_scenario_data(sc, rep);
        IndexSet support;
        for (std::size_t j = 0; j < sc.p; ++j)
            if (g.beta_true[j] != 0.0) support.push_back(j);
        DiagnoseOptions opt;
        opt.lambda = sc.lambda2();
        const ConditionReport r =
            diagnose(g.data, support, SupportMode::True, PivotSpec::coordinate(sc.p, 0), opt, g.beta_true);
        REQUIRE(r.eta_n);
        CHECK(r.eta_11n >= *r.eta_n - 1e-12);
        CHECK(r.c3_eigen_range.first <= r.c3_eigen_range.second);
        CHECK(r.c1_delta.value() <= 1.0);
        CHECK(r.verdicts.at("C2") == Verdict::Pass);
        CHECK(r.verdicts.at("C5") == Verdict::NotCheckable);
        CHECK(r.verdicts.at("C7") == Verdict::NotCheckable);
        CHECK(r.c4_beta_min.value() == doctest::Approx(0.9));
        const auto j = r.to_json();
        CHECK(j["support"][0] == 1);
    }
    const GeneratedData g = generate_scenario_data(sc, 0);
    CHECK(code_of([&] {
              diagnose(g.data, {}, SupportMode::Estimated, PivotSpec::coordinate(sc.p, 0), DiagnoseOptions{});
          }) == ErrorCode::EmptyActiveSet);
}

TEST_CASE("diagnose: eta_11n approaches the population value for large n")
{
    Scenario sc = preset("a");
    sc.n = 40000;
    const GeneratedData g = generate_scenario_data(sc, 0);
    IndexSet support{0, 1, 2, 3, 4};
    const ConditionReport r = diagnose(g.data, support, SupportMode::True, PivotSpec::coordinate(sc.p, 0), {});
    Matrix toeplitz(5, 5);
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) toeplitz(a, b) = std::pow(sc.rho, std::abs(double(a) - double(b)));
    const double population = sym_eigen(toeplitz).values.front();
    // sampling sd of the smallest eigenvalue is O(n^{-1/2}) ~ 0.005 here
    CHECK(r.eta_11n == doctest::Approx(population).epsilon(0.05));
}

TEST_CASE("names")
{
    CHECK(to_string(Verdict::Pass) == "pass");
    CHECK(to_string(Verdict::Fail) == "fail");
    CHECK(to_string(Verdict::NotCheckable) == "not-checkable");
}
