#pragma once

#include "alasso/pivots.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>

namespace alasso {

enum class Verdict
{
    Pass,
    Fail,
    NotCheckable,
};

enum class SupportMode
{
    Estimated, ///< support taken from the fitted coefficients
    True,      ///< support of a known (simulated) coefficient vector
};

enum class TuningStage
{
    LassoInitial,
    Alasso,
    AlassoZeroTarget,
};

std::string to_string(Verdict v);
std::string to_string(SupportMode m);
TuningStage parse_tuning_stage(const std::string& name);

/// 0.5 n^{1/2}, 2 n^{1/4} and 0.25 n^{1/4} respectively.
double theoretical_lambda(std::size_t n, TuningStage stage);
double theoretical_lambda(std::size_t n, const std::string& stage);

/// Largest canonical correlation between the support columns and the rest
/// under the C_n inner product; each block is whitened on its range.
double check_c1(const RegressionDataset& data, const IndexSet& support);

struct C6Window
{
    double lower = 0.0; ///< bound on lambda / sqrt(n)
    double upper = 0.0;
    bool empty = false;
};

C6Window check_c6_window(std::size_t n, std::size_t p0, double a, double b, double gamma, double delta);

struct DiagnoseOptions
{
    double a = 0.0;
    double b = 0.0;
    double gamma = 1.0;
    double delta = 0.1;
    std::optional<double> lambda;
    /// C1 fails when the canonical correlation is within this distance of 1.
    double c1_margin = 1e-8;
};

struct ConditionReport
{
    SupportMode mode = SupportMode::Estimated;
    IndexSet support;
    std::optional<double> c1_delta;
    std::optional<double> eta_n;   ///< smallest eigenvalue of C_n (p <= n)
    double eta_11n = 0.0;          ///< smallest eigenvalue of C_11
    /// Per column: n^{-1} sum |x_ij|^r for r = 3, 4, 6, 8.
    std::vector<std::array<double, 4>> c2_moment_bounds;
    /// Same moments of the rows of X C_n^{-1} (p <= n only).
    std::vector<std::array<double, 4>> c2_xtilde_bounds;
    /// max_j of the diagonal of C_11^{-1}, the p > n variant of the x-tilde bound.
    double c2_c11_inverse_diag_max = 0.0;
    std::pair<double, double> c3_eigen_range{0.0, 0.0};
    std::optional<double> c4_beta_min;
    std::optional<double> c4_beta_max;
    C6Window c6_window;
    std::optional<double> lambda_over_root_n;
    std::optional<double> mu3_hat;
    std::optional<double> mu4_hat;
    std::map<std::string, Verdict> verdicts;

    nlohmann::ordered_json to_json() const;
};

/// `beta` supplies the coefficient vector for C4; `residuals` the moment
/// estimates shown for C5.
ConditionReport diagnose(const RegressionDataset& data, const IndexSet& support, SupportMode mode,
                         const PivotSpec& spec, const DiagnoseOptions& options,
                         std::span<const double> beta = {}, std::span<const double> residuals = {});

} // namespace alasso
