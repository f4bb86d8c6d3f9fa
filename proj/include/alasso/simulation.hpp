#pragma once

#include "alasso/bootstrap.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alasso {

enum class DesignKind
{
    ArBlock,        ///< AR(rho) correlation on the first p0 covariates, iid N(0,1) for the rest
    Equicorrelated, ///< unit variances, all pairwise covariances rho
};

enum class TuningRule
{
    Theoretical,
    CrossValidation,
};

std::string to_string(DesignKind kind);
std::string to_string(TuningRule rule);

struct Scenario
{
    std::string name;
    std::size_t n = 60;
    std::size_t p = 10;
    std::size_t p0 = 5;
    Vector beta_true;
    DesignKind design = DesignKind::ArBlock;
    double rho = 0.3;
    double error_sigma = 1.0;
    std::size_t mc_reps = 500;
    std::size_t B = 500;
    TuningRule tuning = TuningRule::Theoretical;
    double lambda2_coef = 2.0;               ///< lambda2 = coef * n^{1/4}
    std::optional<double> lambda1_coef;      ///< lambda1 = coef * n^{1/2}; LASSO initial when p > n
    std::size_t cv_folds = 5;
    std::size_t cv_grid = 20;
    double gamma = 1.0;
    bool refit_initial = true;
    std::vector<std::size_t> targets{0};
    std::vector<double> levels{0.9};
    std::uint64_t seed = 20240601;
    std::size_t workers = 1;
    double replicate_failure_budget = 0.02;

    double lambda2() const;
    std::optional<double> lambda1() const;
    void validate() const;
};

/// Known names: a, b, c, d, minnier (sigma = 1), minnier-s5 (sigma = 5).
Scenario preset(const std::string& name);
/// All variants behind a name ("minnier" yields both noise levels).
std::vector<Scenario> preset_family(const std::string& name);
std::vector<std::string> preset_names();

struct GeneratedData
{
    RegressionDataset data;
    Vector beta_true;
};

GeneratedData generate_scenario_data(const Scenario& sc, std::size_t rep_index, std::uint64_t master_seed);
GeneratedData generate_scenario_data(const Scenario& sc, std::size_t rep_index);

/// Fit in one simulated data set with the scenario's tuning rule.
struct ScenarioFit
{
    InitialEstimate init;
    AlassoFit fit;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

ScenarioFit fit_scenario(const Scenario& sc, const DesignCache& cache, const RegressionDataset& data,
                         std::size_t rep_index);

struct CoverageCell
{
    std::size_t coordinate = 0;
    CiMethod method = CiMethod::OracleNormal;
    CiSide side = CiSide::TwoSidedEqualTail;
    double level = 0.9;
    std::size_t covered = 0;
    std::size_t total = 0;
    double length_sum = 0.0;
    std::size_t finite_lengths = 0;
    std::size_t fallbacks = 0;

    double coverage() const { return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0; }
    double mc_se() const;
    double average_length() const;
};

struct CoverageReport
{
    Scenario scenario;
    std::vector<CoverageCell> cells;
    std::size_t reps_completed = 0;
    std::size_t reps_failed = 0;
    std::size_t superset_count = 0; ///< fits whose support contains the true support
    std::size_t exact_count = 0;    ///< fits whose support equals the true support
    std::size_t bootstrap_failures = 0;
    double mean_lambda1 = 0.0;
    double mean_lambda2 = 0.0;
    double runtime_seconds = 0.0;   ///< excluded from the machine-readable report

    const CoverageCell& cell(std::size_t coordinate, CiMethod method, CiSide side, double level) const;
    /// Machine-readable report; deterministic for a given scenario.
    nlohmann::ordered_json to_json() const;
    /// Text table with methods as columns and average lengths in parentheses.
    std::string table() const;
};

std::vector<CiMethod> all_methods();
std::vector<CiSide> reported_sides();

CoverageReport run_coverage_study(const Scenario& sc);

nlohmann::ordered_json scenario_to_json(const Scenario& sc);
/// Inverse of scenario_to_json; a "base" key starts from that preset and the
/// remaining keys override it. Targets are 0-based here.
Scenario scenario_from_json(const nlohmann::ordered_json& j);

} // namespace alasso
