#include "alasso/cli/app.hpp"

#include "alasso/cli/csv.hpp"
#include "alasso/diagnostics.hpp"
#include "alasso/edgeworth.hpp"
#include "alasso/simulation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef ALASSO_VERSION
#define ALASSO_VERSION "0.0.0"
#endif

namespace alasso::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;
constexpr std::size_t kDefaultB = 500;
constexpr std::uint64_t kCvStream = 0xc5;
constexpr std::uint64_t kBootStream = 0xb007;

template <class T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& v)
{
    if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, T& v)
{
    if (j.contains(key)) v = j.at(key).get<T>();
}

char delimiter_char(const std::string& d)
{
    if (d == "auto") return 0;
    if (d == "tab" || d == "\\t") return '\t';
    if (d.size() == 1) return d[0];
    fail(ErrorCode::InvalidArgument, "delimiter must be a single character, 'tab' or 'auto'");
}

/// Everything a fit produces; not movable because the cache points into data.x.
struct FitBundle
{
    RegressionDataset data;
    std::optional<DesignCache> cache;
    InitialEstimate init;
    AlassoFit fit;
    double lambda = 0.0;
    std::string lambda_source;
    json cv_report;

    FitBundle() = default;
    FitBundle(const FitBundle&) = delete;
    FitBundle& operator=(const FitBundle&) = delete;
};

RegressionDataset load_data(const Config& c)
{
    if (c.input.empty()) fail(ErrorCode::InvalidArgument, "an input file is required");
    const CsvTable table = read_csv(c.input, delimiter_char(c.delimiter));
    return standardize(dataset_from_table(table, c.response, c.drop), parse_standardize(c.standardize));
}

json cv_json(const CvResult& r)
{
    json j;
    j["lambda"] = r.lambda;
    j["grid"] = r.grid;
    j["mean_error"] = r.mean_error;
    j["se_error"] = r.se_error;
    return j;
}

void prepare_fit(const Config& c, FitBundle& b)
{
    b.data = load_data(c);
    b.cache.emplace(b.data.x);
    const std::size_t n = b.data.n(), p = b.data.p();
    const std::uint64_t seed = c.seed.value_or(kDefaultSeed);
    const RngStream cv_rng(seed, kCvStream);

    const bool lasso_init = p >= n || c.lambda1.has_value();
    double lambda1 = 0.0;
    if (lasso_init) {
        if (c.lambda1) {
            lambda1 = *c.lambda1;
        } else if (c.cv) {
            CvOptions o;
            o.folds = c.folds;
            o.objective = CvObjective::Lasso;
            const CvResult r = cross_validate(b.data, lambda_grid(b.data, c.cv_grid, 1e-3), o, cv_rng.substream(1));
            lambda1 = r.lambda;
            b.cv_report["lambda1"] = cv_json(r);
        } else {
            lambda1 = theoretical_lambda(n, TuningStage::LassoInitial);
        }
        b.init = fit_lasso(*b.cache, b.data.y, lambda1);
    } else {
        b.init = fit_ols(*b.cache, b.data.y);
    }

    if (c.lambda) {
        b.lambda = *c.lambda;
        b.lambda_source = "flag";
    } else if (c.cv) {
        CvOptions o;
        o.folds = c.folds;
        o.objective = CvObjective::AlassoGivenInit;
        o.gamma = c.gamma;
        if (lasso_init) o.lambda1 = lambda1;
        const Vector w = alasso_weights(b.init, c.gamma);
        const CvResult r = cross_validate(b.data, lambda_grid(b.data, c.cv_grid, 1e-3, w), o, cv_rng.substream(2));
        b.lambda = r.lambda;
        b.lambda_source = "cross-validation";
        b.cv_report["lambda"] = cv_json(r);
    } else {
        b.lambda = theoretical_lambda(n, TuningStage::Alasso);
        b.lambda_source = "theoretical";
    }
    if (!(b.lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be non-negative");
    b.fit = fit_alasso(*b.cache, b.data.y, b.init, b.lambda, c.gamma);
}

std::string name_of(const RegressionDataset& d, std::size_t j)
{
    return j < d.names.size() ? d.names[j] : "x" + std::to_string(j + 1);
}

std::size_t resolve_coordinate(const std::string& coord, const RegressionDataset& d)
{
    if (coord.empty()) return 0;
    if (coord.find_first_not_of("0123456789") == std::string::npos) {
        const std::size_t j = std::stoul(coord);
        if (j == 0 || j > d.p())
            fail(ErrorCode::InvalidArgument, "coordinate " + coord + " outside 1.." + std::to_string(d.p()));
        return j - 1;
    }
    for (std::size_t j = 0; j < d.p(); ++j)
        if (name_of(d, j) == coord) return j;
    fail(ErrorCode::InvalidArgument, "no covariate named '" + coord + "'");
}

json fit_json(const Config& c, const FitBundle& b)
{
    json j;
    j["command"] = c.command;
    j["response"] = b.data.response_name;
    j["standardize"] = c.standardize;
    j["n"] = b.data.n();
    j["p"] = b.data.p();
    j["gamma"] = c.gamma;
    j["lambda"] = b.lambda;
    j["lambda_source"] = b.lambda_source;
    j["initial"] = {{"method", to_string(b.init.method)},
                    {"lambda1", b.init.lambda1},
                    {"stabilizer", b.init.stabilizer}};
    json coef = json::array();
    for (std::size_t k = 0; k < b.data.p(); ++k)
        coef.push_back({{"name", name_of(b.data, k)}, {"estimate", b.fit.beta_hat[k]}});
    j["coefficients"] = coef;
    json act = json::array();
    for (std::size_t k : b.fit.active_set) act.push_back(name_of(b.data, k));
    j["active_set"] = act;
    j["sigma_hat_sq"] = b.fit.sigma_hat_sq;
    j["iterations"] = b.fit.iterations;
    j["converged"] = b.fit.converged;
    if (!b.cv_report.is_null()) j["cross_validation"] = b.cv_report;
    return j;
}

std::string fit_text(const FitBundle& b)
{
    std::ostringstream s;
    char line[160];
    std::snprintf(line, sizeof line, "n = %zu, p = %zu, lambda = %.6g (%s), sigma_hat^2 = %.6g\n", b.data.n(),
                  b.data.p(), b.lambda, b.lambda_source.c_str(), b.fit.sigma_hat_sq);
    s << line;
    for (std::size_t k = 0; k < b.data.p(); ++k) {
        std::snprintf(line, sizeof line, "  %-20s % .6f\n", name_of(b.data, k).c_str(), b.fit.beta_hat[k]);
        s << line;
    }
    return s.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct Outputs
{
    fs::path dir;
    RunResult result;

    void json_file(const std::string& name, const json& j)
    {
        write_json(dir / name, j);
        result.outputs.push_back(name);
    }
    void text_file(const std::string& name, const std::string& text)
    {
        write_text(dir / name, text);
        result.outputs.push_back(name);
    }
};

void cmd_fit(const Config& c, Outputs& o)
{
    FitBundle b;
    prepare_fit(c, b);
    o.json_file("fit.json", fit_json(c, b));
    o.result.summary = fit_text(b);
}

void cmd_ci(const Config& c, Outputs& o)
{
    const CiMethod method = parse_ci_method(c.method);
    const CiSide side = parse_ci_side(c.side);
    FitBundle b;
    prepare_fit(c, b);
    const std::size_t coord = resolve_coordinate(c.coordinate, b.data);
    const PivotSpec spec = PivotSpec::coordinate(b.data.p(), coord);
    const std::size_t B = c.B.value_or(kDefaultB);
    const std::uint64_t seed = c.seed.value_or(kDefaultSeed);

    ConfidenceInterval ci;
    std::size_t failed = 0;
    if (method == CiMethod::OracleNormal) {
        ci = ci_oracle(b.fit, *b.cache, spec, c.level, side);
    } else {
        BootstrapConfig cfg;
        cfg.B = B;
        cfg.seed = seed;
        cfg.stream = kBootStream;
        cfg.workers = c.workers;
        cfg.kinds = {method == CiMethod::PercentileT     ? PivotKind::RawT
                     : method == CiMethod::StudentRbreve ? PivotKind::CorrectedRbreve
                                                         : PivotKind::StudentizedR};
        PivotDraws draws;
        try {
            draws = run_bootstrap(*b.cache, b.data.y, b.init, b.fit, spec, cfg);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyActiveSet) throw;
            fail(ErrorCode::EmptyActiveSet, "no covariate was selected, so the bias-corrected pivot is undefined; "
                                            "use --method student-R or percentile-T, or a smaller --lambda");
        }
        failed = draws.failed_replicates;
        ci = method == CiMethod::PercentileT ? ci_percentile_T(draws, b.fit, spec, c.level, side)
                                             : ci_student(draws, b.fit, spec, c.level, side, method);
    }

    json j = fit_json(c, b);
    j["coordinate"] = name_of(b.data, coord);
    j["coordinate_index"] = coord + 1;
    j["estimate"] = b.fit.beta_hat[coord];
    j["method"] = to_string(method);
    j["side"] = to_string(side);
    j["level"] = c.level;
    j["lower"] = std::isfinite(ci.lower) ? json(ci.lower) : json("-inf");
    j["upper"] = std::isfinite(ci.upper) ? json(ci.upper) : json("inf");
    j["length"] = std::isfinite(ci.length) ? json(ci.length) : json("inf");
    j["B"] = method == CiMethod::OracleNormal ? json() : json(B);
    j["seed"] = seed;
    j["failed_replicates"] = failed;
    j["warning"] = ci.warning;
    o.json_file("ci.json", j);

    char line[256];
    std::snprintf(line, sizeof line, "%s = %.6f, %g%% %s %s interval [%.6f, %.6f]\n", name_of(b.data, coord).c_str(),
                  b.fit.beta_hat[coord], 100.0 * c.level, to_string(side).c_str(), to_string(method).c_str(),
                  ci.lower, ci.upper);
    o.result.summary = line;
    if (!ci.warning.empty()) o.result.summary += "warning: " + ci.warning + "\n";
}

void cmd_screen(const Config& c, Outputs& o)
{
    if (c.input.empty()) fail(ErrorCode::InvalidArgument, "an input file is required");
    if (!(c.threshold >= 0.0 && c.threshold <= 1.0))
        fail(ErrorCode::ParameterOutOfRange, "threshold must lie in [0, 1]");
    const CsvTable table = read_csv(c.input, delimiter_char(c.delimiter));
    const RegressionDataset d = dataset_from_table(table, c.response, c.drop);
    const std::size_t n = d.n();
    if (n < 2) fail(ErrorCode::EmptySample, "screening needs at least two rows");

    auto centered = [n](std::span<const double> v, double& ss) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(n);
        Vector out(v.begin(), v.end());
        ss = 0.0;
        for (double& x : out) {
            x -= mean;
            ss += x * x;
        }
        return out;
    };
    double syy = 0.0;
    const Vector yc = centered(d.y, syy);
    if (!(syy > 0.0)) fail(ErrorCode::ZeroVarianceColumn, "the response is constant");

    IndexSet kept;
    json corr = json::array(), warnings = json::array(), zero = json::array();
    for (std::size_t j = 0; j < d.p(); ++j) {
        double sxx = 0.0;
        const Vector col = d.x.col(j);
        const Vector xc = centered(col, sxx);
        if (!(sxx > 0.0)) {
            zero.push_back(d.names[j]);
            warnings.push_back(Error(ErrorCode::ZeroVarianceColumn, "column '" + d.names[j] + "' excluded").what());
            continue;
        }
        double sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) sxy += xc[i] * yc[i];
        const double r = sxy / std::sqrt(sxx * syy);
        corr.push_back({{"name", d.names[j]}, {"correlation", r}});
        if (std::abs(r) >= c.threshold) kept.push_back(j);
    }

    std::vector<std::string> header{d.response_name};
    Matrix m(n, kept.size() + 1);
    for (std::size_t i = 0; i < n; ++i) m(i, 0) = d.y[i];
    json kept_names = json::array();
    for (std::size_t k = 0; k < kept.size(); ++k) {
        header.push_back(d.names[kept[k]]);
        kept_names.push_back(d.names[kept[k]]);
        for (std::size_t i = 0; i < n; ++i) m(i, k + 1) = d.x(i, kept[k]);
    }
    std::ostringstream csv;
    write_csv(csv, header, m);
    o.text_file("screened.csv", csv.str());

    json j;
    j["threshold"] = c.threshold;
    j["candidates"] = d.p();
    j["kept_count"] = kept.size();
    j["kept"] = kept_names;
    j["zero_variance"] = zero;
    j["correlations"] = corr;
    j["warnings"] = warnings;
    o.json_file("screen.json", j);
    o.result.summary = "kept " + std::to_string(kept.size()) + " of " + std::to_string(d.p()) + " covariates\n";
    for (const auto& w : warnings) o.result.summary += "warning: " + w.get<std::string>() + "\n";
}

std::vector<Scenario> scenarios_for(const Config& c)
{
    std::vector<Scenario> out;
    if (!c.scenario_file.empty()) {
        json j;
        try {
            j = json::parse(read_file(c.scenario_file));
        } catch (const json::parse_error& e) {
            fail(ErrorCode::InvalidArgument, c.scenario_file + ": " + e.what());
        }
        out.push_back(scenario_from_json(j));
    } else if (!c.preset.empty()) {
        out = preset_family(c.preset);
    } else {
        fail(ErrorCode::InvalidArgument, "give --preset or --scenario");
    }
    for (Scenario& sc : out) {
        if (c.mc_reps) sc.mc_reps = *c.mc_reps;
        if (c.B) sc.B = *c.B;
        if (c.seed) sc.seed = *c.seed;
        if (c.cv) sc.tuning = TuningRule::CrossValidation;
        sc.workers = c.workers;
        sc.validate();
    }
    return out;
}

void cmd_simulate(const Config& c, Outputs& o)
{
    for (const Scenario& sc : scenarios_for(c)) {
        const CoverageReport rep = run_coverage_study(sc);
        o.json_file("coverage_" + sc.name + ".json", rep.to_json());
        const std::string table = rep.table();
        o.text_file("coverage_" + sc.name + ".txt", table);
        char line[128];
        std::snprintf(line, sizeof line, "(%zu replicates in %.1f s)\n", rep.reps_completed, rep.runtime_seconds);
        o.result.summary += table + line;
    }
}

/// Data, truth and fit for the scenario-driven variants of diagnose and edgeworth.
struct ScenarioBundle
{
    Scenario sc;
    GeneratedData g;
    std::optional<DesignCache> cache;
    std::optional<ScenarioFit> sf;

    ScenarioBundle() = default;
    ScenarioBundle(const ScenarioBundle&) = delete;
};

void prepare_scenario(const Config& c, ScenarioBundle& s, bool fit)
{
    s.sc = scenarios_for(c).front();
    s.g = generate_scenario_data(s.sc, c.rep);
    s.cache.emplace(s.g.data.x);
    if (fit) s.sf = fit_scenario(s.sc, *s.cache, s.g.data, c.rep);
}

bool scenario_source(const Config& c) { return !c.preset.empty() || !c.scenario_file.empty(); }

void cmd_diagnose(const Config& c, Outputs& o)
{
    const SupportMode mode = c.support == "true"        ? SupportMode::True
                             : c.support == "estimated" ? SupportMode::Estimated
                                                        : (fail(ErrorCode::UnknownVariant, "support '" + c.support + "'"),
                                                           SupportMode::True);
    DiagnoseOptions opts;
    opts.a = c.a;
    opts.b = c.b;
    opts.gamma = c.gamma;
    opts.delta = c.delta;

    ConditionReport rep;
    if (scenario_source(c)) {
        ScenarioBundle s;
        prepare_scenario(c, s, true);
        const RegressionDataset& d = s.g.data;
        const PivotSpec spec = PivotSpec::coordinate(d.p(), resolve_coordinate(c.coordinate, d));
        opts.lambda = s.sf->lambda2;
        IndexSet support = s.sf->fit.active_set;
        std::span<const double> beta = s.sf->fit.beta_hat;
        if (mode == SupportMode::True) {
            support.clear();
            for (std::size_t j = 0; j < d.p(); ++j)
                if (s.g.beta_true[j] != 0.0) support.push_back(j);
            beta = s.g.beta_true;
        }
        rep = diagnose(d, support, mode, spec, opts, beta, s.sf->fit.centered_residuals);
    } else {
        if (mode == SupportMode::True)
            fail(ErrorCode::InvalidArgument, "the true support is only known for --preset or --scenario data");
        FitBundle b;
        prepare_fit(c, b);
        const PivotSpec spec = PivotSpec::coordinate(b.data.p(), resolve_coordinate(c.coordinate, b.data));
        opts.lambda = b.lambda;
        rep = diagnose(b.data, b.fit.active_set, mode, spec, opts, b.fit.beta_hat, b.fit.centered_residuals);
    }
    o.json_file("diagnose.json", rep.to_json());
    for (const auto& [k, v] : rep.verdicts) o.result.summary += k + ": " + to_string(v) + "\n";
}

void cmd_edgeworth(const Config& c, Outputs& o)
{
    if (c.grid < 2 || !(c.x_min < c.x_max)) fail(ErrorCode::InvalidArgument, "grid needs two points and x-min < x-max");
    EdgeworthOptions eo;
    eo.halve_penalty = c.halve_penalty;
    EdgeworthSpec es;
    if (scenario_source(c)) {
        ScenarioBundle s;
        prepare_scenario(c, s, false);
        const RegressionDataset& d = s.g.data;
        const PivotSpec spec = PivotSpec::coordinate(d.p(), resolve_coordinate(c.coordinate, d));
        ErrorMoments m;
        m.sigma_sq = s.sc.error_sigma * s.sc.error_sigma;
        m.mu3 = 0.0;
        es = build_spec(d, s.g.beta_true, c.lambda.value_or(s.sc.lambda2()), s.sc.gamma, spec, m, eo);
    } else {
        FitBundle b;
        prepare_fit(c, b);
        const PivotSpec spec = PivotSpec::coordinate(b.data.p(), resolve_coordinate(c.coordinate, b.data));
        es = build_spec_plugin(b.data, b.fit, spec, eo);
    }

    const std::vector<std::string> header{"x",       "psi_density",   "psi_cdf",      "pi_density",
                                          "pi_cdf",  "normal_cdf_t",  "normal_cdf_r"};
    Matrix table(c.grid, header.size());
    for (std::size_t k = 0; k < c.grid; ++k) {
        const double x = c.x_min + (c.x_max - c.x_min) * static_cast<double>(k) / static_cast<double>(c.grid - 1);
        table(k, 0) = x;
        table(k, 1) = psi_density(x, es);
        table(k, 2) = psi_cdf(x, es);
        table(k, 3) = pi_density(x, es);
        table(k, 4) = pi_cdf(x, es);
        table(k, 5) = normal_cdf(x / std::sqrt(es.sigma_sq * es.upsilon));
        table(k, 6) = normal_cdf(x / std::sqrt(es.upsilon));
    }
    std::ostringstream csv;
    write_csv(csv, header, table);
    o.text_file("edgeworth.csv", csv.str());

    json j;
    j["n"] = es.n;
    j["f_n"] = es.f_n;
    j["upsilon"] = es.upsilon;
    j["upsilon_breve"] = es.upsilon_breve;
    j["sigma_sq"] = es.sigma_sq;
    j["mu3"] = es.mu3;
    j["r1"] = es.r1;
    j["xi_bar"] = {es.xi_bar[1], es.xi_bar[2], es.xi_bar[3]};
    j["cross_moment"] = es.cross_moment;
    j["plug_in"] = es.plug_in;
    j["lambda_used"] = es.lambda_used;
    j["halve_penalty"] = c.halve_penalty;
    const auto psi = [&](double x) { return psi_density(x, es); };
    const auto pi = [&](double x) { return pi_density(x, es); };
    const double inf = std::numeric_limits<double>::infinity();
    j["psi_total_mass"] = ee_cdf(psi, -inf, inf, es.sigma_sq * es.upsilon_breve);
    j["pi_total_mass"] = ee_cdf(pi, -inf, inf, es.upsilon_breve);
    o.json_file("edgeworth.json", j);

    char line[200];
    std::snprintf(line, sizeof line, "f_n = %.6g, upsilon = %.6g, upsilon_breve = %.6g, r1 = %d\n", es.f_n,
                  es.upsilon, es.upsilon_breve, es.r1);
    o.result.summary = line;
}

std::string hex64(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json input_record(const std::string& path)
{
    const std::string bytes = read_file(path);
    return {{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}};
}

Config absolutized(Config c)
{
    if (!c.input.empty()) c.input = fs::absolute(c.input).lexically_normal().string();
    if (!c.scenario_file.empty()) c.scenario_file = fs::absolute(c.scenario_file).lexically_normal().string();
    return c;
}

} // namespace

json Config::to_json() const
{
    json j;
    j["command"] = command;
    j["input"] = input;
    j["response"] = response;
    j["drop"] = drop;
    j["delimiter"] = delimiter;
    j["standardize"] = standardize;
    j["lambda"] = opt(lambda);
    j["lambda1"] = opt(lambda1);
    j["gamma"] = gamma;
    j["cv"] = cv;
    j["folds"] = folds;
    j["cv_grid"] = cv_grid;
    j["B"] = opt(B);
    j["seed"] = opt(seed);
    j["level"] = level;
    j["side"] = side;
    j["method"] = method;
    j["coordinate"] = coordinate;
    j["threshold"] = threshold;
    j["preset"] = preset;
    j["scenario_file"] = scenario_file;
    j["mc_reps"] = opt(mc_reps);
    j["support"] = support;
    j["a"] = a;
    j["b"] = b;
    j["delta"] = delta;
    j["rep"] = rep;
    j["x_min"] = x_min;
    j["x_max"] = x_max;
    j["grid"] = grid;
    j["halve_penalty"] = halve_penalty;
    return j;
}

Config Config::from_json(const json& j)
{
    Config c;
    try {
        read(j, "command", c.command);
        read(j, "input", c.input);
        read(j, "response", c.response);
        read(j, "drop", c.drop);
        read(j, "delimiter", c.delimiter);
        read(j, "standardize", c.standardize);
        read_opt(j, "lambda", c.lambda);
        read_opt(j, "lambda1", c.lambda1);
        read(j, "gamma", c.gamma);
        read(j, "cv", c.cv);
        read(j, "folds", c.folds);
        read(j, "cv_grid", c.cv_grid);
        read_opt(j, "B", c.B);
        read_opt(j, "seed", c.seed);
        read(j, "level", c.level);
        read(j, "side", c.side);
        read(j, "method", c.method);
        read(j, "coordinate", c.coordinate);
        read(j, "threshold", c.threshold);
        read(j, "preset", c.preset);
        read(j, "scenario_file", c.scenario_file);
        read_opt(j, "mc_reps", c.mc_reps);
        read(j, "support", c.support);
        read(j, "a", c.a);
        read(j, "b", c.b);
        read(j, "delta", c.delta);
        read(j, "rep", c.rep);
        read(j, "x_min", c.x_min);
        read(j, "x_max", c.x_max);
        read(j, "grid", c.grid);
        read(j, "halve_penalty", c.halve_penalty);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("configuration: ") + e.what());
    }
    return c;
}

std::string library_version() { return ALASSO_VERSION; }

RunResult run(const Config& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Config c = absolutized(config);
    if (c.workers == 0) fail(ErrorCode::InvalidArgument, "workers must be at least 1");
    Outputs o;
    o.dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(o.dir, ec);
    if (ec) fail(ErrorCode::InvalidArgument, "cannot create '" + o.dir.string() + "': " + ec.message());

    json inputs = json::array();
    if (!c.input.empty()) inputs.push_back(input_record(c.input));
    if (!c.scenario_file.empty()) inputs.push_back(input_record(c.scenario_file));

    if (c.command == "fit") cmd_fit(c, o);
    else if (c.command == "ci") cmd_ci(c, o);
    else if (c.command == "screen") cmd_screen(c, o);
    else if (c.command == "simulate") cmd_simulate(c, o);
    else if (c.command == "diagnose") cmd_diagnose(c, o);
    else if (c.command == "edgeworth") cmd_edgeworth(c, o);
    else fail(ErrorCode::UnknownVariant, "command '" + c.command + "'");

    json m;
    m["tool"] = "alasso";
    m["version"] = library_version();
    m["command"] = c.command;
    m["config"] = c.to_json();
    m["seeds"] = {{"master", c.seed.value_or(kDefaultSeed)},
                  {"cv_stream", kCvStream},
                  {"bootstrap_stream", kBootStream}};
    m["inputs"] = inputs;
    json outs = json::array();
    for (const auto& f : o.result.outputs)
        outs.push_back({{"file", f}, {"fnv1a64", hex64(fnv1a64(read_file((o.dir / f).string())))}});
    m["outputs"] = outs;
    m["execution"] = {{"workers", c.workers}, {"out", fs::absolute(o.dir).lexically_normal().string()}};
    m["timing"] = {
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    write_json(o.dir / "manifest.json", m);
    return o.result;
}

RunResult rerun(const std::string& manifest_path, const std::string& out)
{
    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        fail(ErrorCode::InvalidArgument, manifest_path + ": " + e.what());
    }
    if (!m.contains("config")) fail(ErrorCode::InvalidArgument, manifest_path + ": no config section");
    Config c = Config::from_json(m.at("config"));
    if (m.contains("execution")) {
        const json& e = m.at("execution");
        read(e, "workers", c.workers);
        read(e, "out", c.out);
    }
    if (!out.empty()) c.out = out;
    if (m.contains("inputs"))
        for (const json& rec : m.at("inputs")) {
            const std::string path = rec.at("path").get<std::string>();
            if (input_record(path).at("fnv1a64") != rec.at("fnv1a64"))
                fail(ErrorCode::InvalidArgument, "input '" + path + "' changed since the manifest was written");
        }
    return run(c);
}

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::TooManyFailures: return 4;
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::NonSymmetric:
    case ErrorCode::SingularDesign:
    case ErrorCode::NoConvergence:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::SingularSubmatrix:
    case ErrorCode::ZeroInitialComponent:
    case ErrorCode::QuadratureFailure:
    case ErrorCode::SingularBlock: return 3;
    default: return 2;
    }
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Adaptive LASSO fitting, bootstrap confidence intervals and coverage studies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    Config c;
    double lambda = 0.0, lambda1 = 0.0;
    std::size_t B = 0, mc = 0;
    std::uint64_t seed = 0;
    std::string manifest, rerun_out;
    std::vector<CLI::Option*> lambda_opts, lambda1_opts, b_opts, mc_opts, seed_opts;

    auto env = [](CLI::Option* o, const std::string& name) { return o->envname("ALASSO_" + name); };
    auto data_opts = [&](CLI::App* s) {
        env(s->add_option("input,--input", c.input, "Delimited text file with a header row")->check(CLI::ExistingFile),
            "INPUT");
        env(s->add_option("--response", c.response, "Response column name")->capture_default_str(), "RESPONSE");
        env(s->add_option("--drop", c.drop, "Columns to ignore")->delimiter(','), "DROP");
        env(s->add_option("--delimiter", c.delimiter, "Field separator: a character, 'tab' or 'auto'")
                ->capture_default_str(),
            "DELIMITER");
    };
    auto fit_opts = [&](CLI::App* s) {
        env(s->add_option("--standardize", c.standardize, "unitnorm, unitsd or none")
                ->check(CLI::IsMember({"unitnorm", "unitsd", "none"}))
                ->capture_default_str(),
            "STANDARDIZE");
        lambda_opts.push_back(env(s->add_option("--lambda", lambda, "Adaptive LASSO penalty"), "LAMBDA"));
        lambda1_opts.push_back(env(s->add_option("--lambda1", lambda1, "LASSO penalty of the initial estimator"),
                                   "LAMBDA1"));
        env(s->add_option("--gamma", c.gamma, "Weight exponent")->capture_default_str(), "GAMMA");
        env(s->add_flag("--cv", c.cv, "Choose penalties by cross-validation"), "CV");
        env(s->add_option("--folds", c.folds, "Cross-validation folds")->capture_default_str(), "FOLDS");
        env(s->add_option("--cv-grid", c.cv_grid, "Penalty grid size")->capture_default_str(), "CV_GRID");
        seed_opts.push_back(env(s->add_option("--seed", seed, "Master seed"), "SEED"));
    };
    auto coord_opt = [&](CLI::App* s) {
        env(s->add_option("--coordinate", c.coordinate, "Covariate name or 1-based index"), "COORDINATE");
    };
    auto scenario_opts = [&](CLI::App* s) {
        env(s->add_option("--preset", c.preset, "Simulation preset"), "PRESET");
        env(s->add_option("--scenario", c.scenario_file, "Scenario JSON file")->check(CLI::ExistingFile), "SCENARIO");
        env(s->add_option("--rep", c.rep, "Replicate index of the generated data")->capture_default_str(), "REP");
    };
    auto common = [&](CLI::App* s) {
        env(s->add_option("--out", c.out, "Output directory")->capture_default_str(), "OUT");
        env(s->add_option("--workers", c.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber),
            "WORKERS");
    };

    CLI::App* fit = app.add_subcommand("fit", "Fit the adaptive LASSO");
    data_opts(fit);
    fit_opts(fit);
    common(fit);

    CLI::App* ci = app.add_subcommand("ci", "Confidence interval for one coefficient");
    data_opts(ci);
    fit_opts(ci);
    coord_opt(ci);
    common(ci);
    b_opts.push_back(env(ci->add_option("--B", B, "Bootstrap replicates (default 500)"), "B"));
    env(ci->add_option("--level", c.level, "Confidence level")->capture_default_str(), "LEVEL");
    env(ci->add_option("--side", c.side, "lower, upper, two-sided or symmetric")->capture_default_str(), "SIDE");
    env(ci->add_option("--method", c.method, "oracle, percentile-T, student-R or student-Rbreve")
            ->capture_default_str(),
        "METHOD");

    CLI::App* screen = app.add_subcommand("screen", "Keep covariates strongly correlated with the response");
    data_opts(screen);
    common(screen);
    env(screen->add_option("--threshold", c.threshold, "Minimum absolute correlation")->capture_default_str(),
        "THRESHOLD");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo coverage study");
    scenario_opts(sim);
    common(sim);
    mc_opts.push_back(env(sim->add_option("--mc", mc, "Monte Carlo replicates"), "MC"));
    b_opts.push_back(env(sim->add_option("--B", B, "Bootstrap replicates"), "B"));
    seed_opts.push_back(env(sim->add_option("--seed", seed, "Master seed"), "SEED"));
    env(sim->add_flag("--cv", c.cv, "Cross-validated tuning"), "CV");

    CLI::App* diag = app.add_subcommand("diagnose", "Check the regularity conditions");
    diag->add_option("input,--input", c.input, "Delimited text file")->check(CLI::ExistingFile)->envname("ALASSO_INPUT");
    env(diag->add_option("--response", c.response, "Response column name"), "RESPONSE");
    env(diag->add_option("--drop", c.drop, "Columns to ignore")->delimiter(','), "DROP");
    env(diag->add_option("--delimiter", c.delimiter, "Field separator"), "DELIMITER");
    fit_opts(diag);
    coord_opt(diag);
    scenario_opts(diag);
    common(diag);
    env(diag->add_option("--support", c.support, "estimated or true")->capture_default_str(), "SUPPORT");
    env(diag->add_option("--a", c.a, "Growth exponent of p0")->capture_default_str(), "A");
    env(diag->add_option("--b", c.b, "Decay exponent of the smallest coefficient")->capture_default_str(), "B_EXP");
    env(diag->add_option("--delta", c.delta, "Margin used by the eigenvalue and window checks")->capture_default_str(),
        "DELTA");

    CLI::App* ee = app.add_subcommand("edgeworth", "Tabulate the expansion densities and distribution functions");
    ee->add_option("input,--input", c.input, "Delimited text file")->check(CLI::ExistingFile)->envname("ALASSO_INPUT");
    env(ee->add_option("--response", c.response, "Response column name"), "RESPONSE");
    env(ee->add_option("--drop", c.drop, "Columns to ignore")->delimiter(','), "DROP");
    env(ee->add_option("--delimiter", c.delimiter, "Field separator"), "DELIMITER");
    fit_opts(ee);
    coord_opt(ee);
    scenario_opts(ee);
    common(ee);
    env(ee->add_option("--x-min", c.x_min, "Grid start")->capture_default_str(), "X_MIN");
    env(ee->add_option("--x-max", c.x_max, "Grid end")->capture_default_str(), "X_MAX");
    env(ee->add_option("--grid", c.grid, "Grid points")->capture_default_str(), "GRID");
    bool full_penalty = false;
    env(ee->add_flag("--full-penalty", full_penalty, "Use lambda unhalved in the bias terms"), "FULL_PENALTY");

    CLI::App* re = app.add_subcommand("rerun", "Repeat a run from its manifest");
    re->add_option("manifest,--manifest", manifest, "manifest.json of an earlier run")
        ->required()
        ->check(CLI::ExistingFile);
    re->add_option("--out", rerun_out, "Output directory (default: the recorded one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto any = [](const std::vector<CLI::Option*>& v) {
        for (auto* o : v)
            if (o->count() > 0) return true;
        return false;
    };
    if (any(lambda_opts)) c.lambda = lambda;
    if (any(lambda1_opts)) c.lambda1 = lambda1;
    if (any(b_opts)) c.B = B;
    if (any(mc_opts)) c.mc_reps = mc;
    if (any(seed_opts)) c.seed = seed;
    c.halve_penalty = !full_penalty;

    try {
        RunResult r;
        if (re->parsed()) {
            r = rerun(manifest, rerun_out);
        } else {
            for (CLI::App* s : app.get_subcommands()) c.command = s->get_name();
            r = run(c);
        }
        std::cout << r.summary;
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace alasso::cli
