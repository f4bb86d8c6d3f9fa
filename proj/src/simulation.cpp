#include "alasso/simulation.hpp"

#include "alasso/core/error.hpp"
#include "alasso/core/linalg.hpp"
#include "alasso/core/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace alasso {

namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kCvStream = 0xc5;
constexpr std::uint64_t kBootStream = 0xb007;

const Vector kBetaA{4, -1.5, -8, 0.9, -3};
const Vector kBetaC{4, 2.5, 0.8, -1.5, -2, -5, -7.5, 5, 1.5, -3};
const Vector kBetaMinnier{2, -2, 0.5, -0.5};

Vector padded(const Vector& head, std::size_t p)
{
    Vector b(p, 0.0);
    std::copy(head.begin(), head.end(), b.begin());
    return b;
}

Scenario make(std::string name, std::size_t n, std::size_t p, const Vector& head)
{
    Scenario sc;
    sc.name = std::move(name);
    sc.n = n;
    sc.p = p;
    sc.p0 = head.size();
    sc.beta_true = padded(head, p);
    return sc;
}

struct Slot
{
    bool covered = false;
    double length = std::numeric_limits<double>::infinity();
    bool fallback = false;
};

struct RepOutcome
{
    bool ok = false;
    std::vector<Slot> slots;
    bool superset = false;
    bool exact = false;
    std::size_t boot_failures = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

std::string fmt(double v, int prec = 3)
{
    if (!std::isfinite(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w)
{
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

} // namespace

std::string to_string(DesignKind kind)
{
    return kind == DesignKind::ArBlock ? "ar-block" : "equicorrelated";
}

std::string to_string(TuningRule rule)
{
    return rule == TuningRule::Theoretical ? "theoretical" : "cv";
}

double Scenario::lambda2() const
{
    return lambda2_coef * std::pow(static_cast<double>(n), 0.25);
}

std::optional<double> Scenario::lambda1() const
{
    if (!lambda1_coef) return std::nullopt;
    return *lambda1_coef * std::sqrt(static_cast<double>(n));
}

void Scenario::validate() const
{
    if (p0 > p || beta_true.size() != p) fail(ErrorCode::InvalidArgument, "scenario support does not fit in p");
    for (std::size_t j = 0; j < p; ++j)
        if ((j < p0) != (beta_true[j] != 0.0))
            fail(ErrorCode::InvalidArgument, "scenario support must be the first p0 coordinates");
    if (n < 4 || mc_reps == 0 || B == 0) fail(ErrorCode::InvalidArgument, "scenario sizes");
    if (!(error_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "error sigma must be non-negative");
    if (p > n && !lambda1_coef) fail(ErrorCode::InvalidArgument, "p > n needs a LASSO initial penalty");
    for (std::size_t t : targets)
        if (t >= p) fail(ErrorCode::InvalidArgument, "target coordinate out of range");
    if (targets.empty() || targets.size() > 10) fail(ErrorCode::InvalidArgument, "between 1 and 10 targets");
    for (double l : levels)
        if (!(l > 0.0 && l < 1.0)) fail(ErrorCode::InvalidArgument, "levels must lie in (0, 1)");
}

Scenario preset(const std::string& name)
{
    if (name == "a") {
        Scenario sc = make("a", 60, 10, kBetaA);
        sc.targets = {0, 3};
        return sc;
    }
    if (name == "b") {
        Scenario sc = make("b", 60, 100, kBetaA);
        sc.lambda1_coef = 0.5;
        sc.mc_reps = 200;
        sc.targets = {0, 3};
        return sc;
    }
    if (name == "c") return make("c", 200, 80, kBetaC);
    if (name == "d") {
        Scenario sc = make("d", 200, 500, kBetaC);
        sc.lambda1_coef = 0.5;
        sc.mc_reps = 200;
        return sc;
    }
    if (name == "minnier" || name == "minnier-s5") {
        Scenario sc = make(name, 100, 10, kBetaMinnier);
        sc.design = DesignKind::Equicorrelated;
        sc.rho = 0.2;
        sc.lambda2_coef = 0.5;
        sc.error_sigma = name == "minnier" ? 1.0 : 5.0;
        sc.targets = {0, 4};
        return sc;
    }
    fail(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

std::vector<Scenario> preset_family(const std::string& name)
{
    if (name == "minnier") return {preset("minnier"), preset("minnier-s5")};
    return {preset(name)};
}

std::vector<std::string> preset_names()
{
    return {"a", "b", "c", "d", "minnier", "minnier-s5"};
}

GeneratedData generate_scenario_data(const Scenario& sc, std::size_t rep_index, std::uint64_t master_seed)
{
    sc.validate();
    RngStream rng = RngStream(master_seed, kDataStream).substream(rep_index);
    const std::size_t corr = sc.design == DesignKind::ArBlock ? sc.p0 : sc.p;
    Matrix sigma(corr, corr);
    for (std::size_t i = 0; i < corr; ++i)
        for (std::size_t j = 0; j < corr; ++j) {
            const double d = static_cast<double>(i > j ? i - j : j - i);
            sigma(i, j) = sc.design == DesignKind::ArBlock ? std::pow(sc.rho, d) : (i == j ? 1.0 : sc.rho);
        }
    const Matrix l = corr ? Cholesky(sigma).factor() : Matrix();

    GeneratedData g;
    g.beta_true = sc.beta_true;
    g.data.x = Matrix(sc.n, sc.p);
    Vector z(sc.p);
    for (std::size_t i = 0; i < sc.n; ++i) {
        for (double& v : z) v = rng.normal();
        auto row = g.data.x.row(i);
        for (std::size_t a = 0; a < corr; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b <= a; ++b) acc += l(a, b) * z[b];
            row[a] = acc;
        }
        for (std::size_t j = corr; j < sc.p; ++j) row[j] = z[j];
    }
    g.data.y = g.data.x * std::span<const double>(g.beta_true);
    for (double& v : g.data.y) v += sc.error_sigma * rng.normal();
    g.data.names.resize(sc.p);
    for (std::size_t j = 0; j < sc.p; ++j) g.data.names[j] = "x" + std::to_string(j + 1);
    return g;
}

GeneratedData generate_scenario_data(const Scenario& sc, std::size_t rep_index)
{
    return generate_scenario_data(sc, rep_index, sc.seed);
}

ScenarioFit fit_scenario(const Scenario& sc, const DesignCache& cache, const RegressionDataset& data,
                         std::size_t rep_index)
{
    ScenarioFit out;
    const bool lasso_init = sc.p > sc.n || sc.lambda1_coef.has_value();
    const RngStream cv_rng = RngStream(sc.seed, kCvStream).substream(rep_index);

    if (sc.tuning == TuningRule::Theoretical) {
        out.lambda2 = sc.lambda2();
        if (lasso_init) {
            out.lambda1 = *sc.lambda1();
            out.init = fit_lasso(cache, data.y, out.lambda1);
        } else {
            out.init = fit_ols(cache, data.y);
        }
    } else {
        if (lasso_init) {
            CvOptions o;
            o.folds = sc.cv_folds;
            o.objective = CvObjective::Lasso;
            out.lambda1 = cross_validate(data, lambda_grid(data, sc.cv_grid, 1e-3), o, cv_rng.substream(1)).lambda;
            out.init = fit_lasso(cache, data.y, out.lambda1);
        } else {
            out.init = fit_ols(cache, data.y);
        }
        const Vector w = alasso_weights(out.init, sc.gamma);
        CvOptions o;
        o.folds = sc.cv_folds;
        o.objective = CvObjective::AlassoGivenInit;
        o.gamma = sc.gamma;
        if (lasso_init) o.lambda1 = out.lambda1;
        out.lambda2 = cross_validate(data, lambda_grid(data, sc.cv_grid, 1e-3, w), o, cv_rng.substream(2)).lambda;
    }
    out.fit = fit_alasso(cache, data.y, out.init, out.lambda2, sc.gamma);
    return out;
}

double CoverageCell::mc_se() const
{
    const double c = coverage();
    return total ? std::sqrt(c * (1.0 - c) / static_cast<double>(total)) : 0.0;
}

double CoverageCell::average_length() const
{
    if (finite_lengths == 0 || finite_lengths != total) return std::numeric_limits<double>::quiet_NaN();
    return length_sum / static_cast<double>(finite_lengths);
}

std::vector<CiMethod> all_methods()
{
    return {CiMethod::StudentR, CiMethod::StudentRbreve, CiMethod::OracleNormal, CiMethod::PercentileT};
}

std::vector<CiSide> reported_sides()
{
    return {CiSide::LowerBound, CiSide::TwoSidedEqualTail, CiSide::TwoSidedSymmetric};
}

const CoverageCell& CoverageReport::cell(std::size_t coordinate, CiMethod method, CiSide side, double level) const
{
    for (const CoverageCell& c : cells)
        if (c.coordinate == coordinate && c.method == method && c.side == side && c.level == level) return c;
    fail(ErrorCode::InvalidArgument, "no coverage cell for the requested combination");
}

CoverageReport run_coverage_study(const Scenario& sc)
{
    sc.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::vector<CiMethod> methods = all_methods();
    const std::vector<CiSide> sides = reported_sides();

    CoverageReport report;
    report.scenario = sc;
    for (std::size_t t : sc.targets)
        for (double level : sc.levels)
            for (CiSide side : sides)
                for (CiMethod m : methods) {
                    CoverageCell c;
                    c.coordinate = t;
                    c.method = m;
                    c.side = side;
                    c.level = level;
                    report.cells.push_back(c);
                }

    PivotSpec spec;
    spec.D = Matrix(sc.targets.size(), sc.p, 0.0);
    for (std::size_t r = 0; r < sc.targets.size(); ++r) spec.D(r, sc.targets[r]) = 1.0;

    std::vector<RepOutcome> outcomes(sc.mc_reps);
    parallel_for(sc.mc_reps, sc.workers, [&](std::size_t rep) {
        RepOutcome& out = outcomes[rep];
        try {
            const GeneratedData g = generate_scenario_data(sc, rep);
            const DesignCache cache(g.data.x);
            const ScenarioFit sf = fit_scenario(sc, cache, g.data, rep);
            const AlassoFit& fit = sf.fit;
            out.lambda1 = sf.lambda1;
            out.lambda2 = sf.lambda2;

            const IndexSet& act = fit.active_set;
            std::size_t hits = 0;
            for (std::size_t j : act) hits += j < sc.p0 ? 1 : 0;
            out.superset = hits == sc.p0;
            out.exact = out.superset && act.size() == sc.p0;

            BootstrapConfig cfg;
            cfg.B = sc.B;
            cfg.refit_initial = sc.refit_initial;
            cfg.seed = sc.seed;
            cfg.stream = RngStream(sc.seed, kBootStream).substream(rep).stream_id();
            cfg.kinds = {PivotKind::RawT, PivotKind::StudentizedR};
            if (!act.empty()) cfg.kinds.push_back(PivotKind::CorrectedRbreve);
            const PivotDraws draws = run_bootstrap(cache, g.data.y, sf.init, fit, spec, cfg);
            out.boot_failures = draws.failed_replicates;

            for (std::size_t row = 0; row < sc.targets.size(); ++row) {
                const std::size_t j = sc.targets[row];
                const PivotSpec single = PivotSpec::coordinate(sc.p, j);
                for (double level : sc.levels)
                    for (CiSide side : sides)
                        for (CiMethod m : methods) {
                            ConfidenceInterval ci;
                            switch (m) {
                            case CiMethod::OracleNormal:
                                if (act.empty()) {
                                    const bool one_sided = side == CiSide::LowerBound;
                                    ci.lower = fit.beta_hat[j];
                                    ci.upper = one_sided ? std::numeric_limits<double>::infinity() : ci.lower;
                                    ci.length = one_sided ? ci.upper : 0.0;
                                } else {
                                    ci = ci_oracle(fit, cache, single, level, side);
                                }
                                break;
                            case CiMethod::PercentileT:
                                ci = ci_percentile_T(draws, fit, spec, level, side, row);
                                break;
                            default: ci = ci_student(draws, fit, spec, level, side, m, row); break;
                            }
                            out.slots.push_back({ci.contains(sc.beta_true[j]), ci.length,
                                                 m == CiMethod::StudentRbreve && !ci.warning.empty()});
                        }
            }
            out.ok = true;
        } catch (const Error&) {
            out.ok = false;
            out.slots.clear();
        }
    });

    for (const RepOutcome& o : outcomes) {
        if (!o.ok) {
            ++report.reps_failed;
            continue;
        }
        ++report.reps_completed;
        report.superset_count += o.superset ? 1 : 0;
        report.exact_count += o.exact ? 1 : 0;
        report.bootstrap_failures += o.boot_failures;
        report.mean_lambda1 += o.lambda1;
        report.mean_lambda2 += o.lambda2;
        for (std::size_t k = 0; k < report.cells.size(); ++k) {
            CoverageCell& c = report.cells[k];
            const Slot& s = o.slots[k];
            ++c.total;
            c.covered += s.covered ? 1 : 0;
            c.fallbacks += s.fallback ? 1 : 0;
            if (std::isfinite(s.length)) {
                c.length_sum += s.length;
                ++c.finite_lengths;
            }
        }
    }
    if (report.reps_completed) {
        report.mean_lambda1 /= static_cast<double>(report.reps_completed);
        report.mean_lambda2 /= static_cast<double>(report.reps_completed);
    }
    const auto budget = static_cast<std::size_t>(std::floor(sc.replicate_failure_budget * sc.mc_reps));
    if (report.reps_failed > budget)
        fail(ErrorCode::TooManyFailures, std::to_string(report.reps_failed) + " of " + std::to_string(sc.mc_reps) +
                                             " Monte Carlo replicates failed");
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::ordered_json scenario_to_json(const Scenario& sc)
{
    nlohmann::ordered_json j;
    j["name"] = sc.name;
    j["n"] = sc.n;
    j["p"] = sc.p;
    j["p0"] = sc.p0;
    j["beta_true"] = sc.beta_true;
    j["design"] = to_string(sc.design);
    j["rho"] = sc.rho;
    j["error_sigma"] = sc.error_sigma;
    j["mc_reps"] = sc.mc_reps;
    j["B"] = sc.B;
    j["tuning"] = to_string(sc.tuning);
    j["lambda2_coef"] = sc.lambda2_coef;
    j["lambda1_coef"] = sc.lambda1_coef ? nlohmann::ordered_json(*sc.lambda1_coef) : nlohmann::ordered_json();
    j["cv_folds"] = sc.cv_folds;
    j["cv_grid"] = sc.cv_grid;
    j["gamma"] = sc.gamma;
    j["refit_initial"] = sc.refit_initial;
    j["targets"] = sc.targets;
    j["levels"] = sc.levels;
    j["seed"] = sc.seed;
    j["one_sided_convention"] = "lower confidence bound";
    return j;
}

Scenario scenario_from_json(const nlohmann::ordered_json& j)
{
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "scenario description must be a JSON object");
    Scenario sc = j.contains("base") ? preset(j.at("base").get<std::string>()) : Scenario{};
    try {
        if (j.contains("name")) sc.name = j.at("name").get<std::string>();
        if (j.contains("n")) sc.n = j.at("n").get<std::size_t>();
        if (j.contains("p")) sc.p = j.at("p").get<std::size_t>();
        if (j.contains("p0")) sc.p0 = j.at("p0").get<std::size_t>();
        if (j.contains("beta_true")) sc.beta_true = j.at("beta_true").get<Vector>();
        if (j.contains("design")) {
            const auto d = j.at("design").get<std::string>();
            if (d == to_string(DesignKind::ArBlock)) sc.design = DesignKind::ArBlock;
            else if (d == to_string(DesignKind::Equicorrelated)) sc.design = DesignKind::Equicorrelated;
            else fail(ErrorCode::UnknownVariant, "design '" + d + "'");
        }
        if (j.contains("rho")) sc.rho = j.at("rho").get<double>();
        if (j.contains("error_sigma")) sc.error_sigma = j.at("error_sigma").get<double>();
        if (j.contains("mc_reps")) sc.mc_reps = j.at("mc_reps").get<std::size_t>();
        if (j.contains("B")) sc.B = j.at("B").get<std::size_t>();
        if (j.contains("tuning")) {
            const auto t = j.at("tuning").get<std::string>();
            if (t == to_string(TuningRule::Theoretical)) sc.tuning = TuningRule::Theoretical;
            else if (t == to_string(TuningRule::CrossValidation)) sc.tuning = TuningRule::CrossValidation;
            else fail(ErrorCode::UnknownVariant, "tuning '" + t + "'");
        }
        if (j.contains("lambda2_coef")) sc.lambda2_coef = j.at("lambda2_coef").get<double>();
        if (j.contains("lambda1_coef")) {
            if (j.at("lambda1_coef").is_null()) sc.lambda1_coef.reset();
            else sc.lambda1_coef = j.at("lambda1_coef").get<double>();
        }
        if (j.contains("cv_folds")) sc.cv_folds = j.at("cv_folds").get<std::size_t>();
        if (j.contains("cv_grid")) sc.cv_grid = j.at("cv_grid").get<std::size_t>();
        if (j.contains("gamma")) sc.gamma = j.at("gamma").get<double>();
        if (j.contains("refit_initial")) sc.refit_initial = j.at("refit_initial").get<bool>();
        if (j.contains("targets")) sc.targets = j.at("targets").get<std::vector<std::size_t>>();
        if (j.contains("levels")) sc.levels = j.at("levels").get<std::vector<double>>();
        if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("scenario description: ") + e.what());
    }
    sc.validate();
    return sc;
}

nlohmann::ordered_json CoverageReport::to_json() const
{
    nlohmann::ordered_json j;
    j["scenario"] = scenario_to_json(scenario);
    j["reps_completed"] = reps_completed;
    j["reps_failed"] = reps_failed;
    j["support_superset"] = superset_count;
    j["support_exact"] = exact_count;
    j["bootstrap_failed_replicates"] = bootstrap_failures;
    j["bootstrap_failure_flag"] = bootstrap_failures > 0;
    j["mean_lambda1"] = mean_lambda1;
    j["mean_lambda2"] = mean_lambda2;
    auto& arr = j["cells"] = nlohmann::ordered_json::array();
    for (const CoverageCell& c : cells) {
        nlohmann::ordered_json e;
        e["coordinate"] = c.coordinate + 1;
        e["method"] = to_string(c.method);
        e["side"] = to_string(c.side);
        e["level"] = c.level;
        e["coverage"] = c.coverage();
        e["mc_se"] = c.mc_se();
        const double len = c.average_length();
        e["average_length"] = std::isfinite(len) ? nlohmann::ordered_json(len) : nlohmann::ordered_json();
        e["covered"] = c.covered;
        e["total"] = c.total;
        e["rbreve_fallbacks"] = c.fallbacks;
        arr.push_back(std::move(e));
    }
    return j;
}

std::string CoverageReport::table() const
{
    std::ostringstream os;
    const Scenario& sc = scenario;
    os << "Scenario " << sc.name << ": n=" << sc.n << ", p=" << sc.p << ", p0=" << sc.p0 << ", sigma=" << sc.error_sigma
       << ", lambda2=" << fmt(mean_lambda2, 4);
    if (mean_lambda1 > 0.0) os << ", lambda1=" << fmt(mean_lambda1, 4);
    os << ", " << reps_completed << " replicates, B=" << sc.B << "\n";
    os << "support recovered exactly in " << exact_count << ", contained in " << superset_count << " fits\n";
    const std::vector<CiMethod> cols{CiMethod::StudentR, CiMethod::StudentRbreve, CiMethod::OracleNormal,
                                     CiMethod::PercentileT};
    const std::vector<std::string> head{"R", "Rbreve", "Oracle", "T"};
    for (double level : sc.levels) {
        os << "\n" << fmt(level * 100.0, 0) << "% intervals (one-sided = lower bound)\n";
        os << pad("Parameter", 18) << pad("One-sided", 40) << "Two-sided (with average lengths)\n";
        os << pad("", 18);
        for (int block = 0; block < 2; ++block)
            for (const auto& h : head) os << pad(h, 10);
        os << "\n";
        for (std::size_t t : sc.targets) {
            std::string label = "beta_" + std::to_string(t + 1) + " = " + fmt(sc.beta_true[t], 2);
            os << pad(label, 18);
            for (CiMethod m : cols) os << pad(fmt(cell(t, m, CiSide::LowerBound, level).coverage()), 10);
            for (CiMethod m : cols) os << pad(fmt(cell(t, m, CiSide::TwoSidedEqualTail, level).coverage()), 10);
            os << "\n" << pad("", 58);
            for (CiMethod m : cols)
                os << pad("(" + fmt(cell(t, m, CiSide::TwoSidedEqualTail, level).average_length()) + ")", 10);
            os << "\n";
        }
    }
    return os.str();
}

} // namespace alasso
