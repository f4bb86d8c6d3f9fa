#pragma once

#include "alasso/core/linalg.hpp"
#include "alasso/core/matrix.hpp"
#include "alasso/core/rng.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace alasso {

enum class StandardizeMode
{
    None,
    UnitNorm, ///< center, scale columns to unit Euclidean norm, center y
    UnitSd,   ///< center, scale columns and y by their sample standard deviation
};

std::string to_string(StandardizeMode mode);
StandardizeMode parse_standardize(const std::string& name);

struct ColumnScale
{
    StandardizeMode mode = StandardizeMode::None;
    Vector center;
    Vector scale;
    double y_center = 0.0;
    double y_scale = 1.0;
};

/// The (y_i, x_i) sample of the linear model y = X beta + eps (no intercept;
/// standardization, when applied, centers everything first).
struct RegressionDataset
{
    Matrix x;
    Vector y;
    std::optional<ColumnScale> column_scale;
    std::vector<std::string> names;
    std::string response_name = "y";

    std::size_t n() const noexcept { return x.rows(); }
    std::size_t p() const noexcept { return x.cols(); }

    /// Throws InvalidArgument / DimensionMismatch on a broken invariant.
    void validate() const;
};

RegressionDataset standardize(RegressionDataset data, StandardizeMode mode);

/// Precomputed design quantities shared by every fit on the same X:
/// Gram matrix X'X, its diagonal, and (lazily) a QR factor for OLS.
class DesignCache
{
public:
    explicit DesignCache(const Matrix& x);

    const Matrix& design() const noexcept { return *x_; }
    const Matrix& gram() const noexcept { return gram_; }
    std::size_t n() const noexcept { return x_->rows(); }
    std::size_t p() const noexcept { return x_->cols(); }

    Vector xty(std::span<const double> y) const { return crossprod(*x_, y); }
    Vector residuals(std::span<const double> y, std::span<const double> beta) const;

    /// Full-rank check and QR factor; throws DimensionExceedsSample / SingularDesign.
    const LeastSquares& ols_solver() const;

private:
    const Matrix* x_;
    Matrix gram_;
    mutable std::shared_ptr<LeastSquares> ols_;
};

enum class InitialMethod
{
    Ols,
    Lasso,
};

std::string to_string(InitialMethod method);

struct InitialEstimate
{
    Vector beta_tilde;
    InitialMethod method = InitialMethod::Ols;
    double lambda1 = 0.0;    ///< LASSO penalty when method == Lasso
    double stabilizer = 0.0; ///< a_n added to |beta_tilde| inside the weights
};

struct SolverOptions
{
    std::size_t max_cycles = 10000;
    double tol = 1e-10; ///< sup-norm change of the coefficients over a full cycle
    /// Optional fixed cycling order (a permutation of 0..p-1).
    std::vector<std::size_t> order;
    /// Record the criterion after every cycle and throw if it ever increases.
    bool check_monotone = false;
    /// Optional starting point (defaults to zero).
    std::optional<Vector> start;
    /// After this many support sweeps without convergence, try solving the
    /// stationarity equations on the current signs directly (0 disables).
    std::size_t polish_every = 10;
};

/// Minimizer of  u'Gu - 2u'c + sum_j penalty_j |u_j|  by cyclic coordinate
/// descent with covariance updates. This is the criterion
/// ||y - Xu||^2 + sum_j penalty_j |u_j| up to the constant y'y when
/// G = X'X and c = X'y.
struct WeightedL1Result
{
    Vector beta;
    std::size_t cycles = 0;
    bool converged = false;
    std::vector<double> objective_trace; ///< filled when check_monotone
};

WeightedL1Result solve_weighted_l1(const Matrix& gram, std::span<const double> xty, std::span<const double> penalty,
                                   const SolverOptions& options = {});

/// Criterion  ||y - X beta||^2 + sum_j penalty_j |beta_j|.
double weighted_l1_objective(const RegressionDataset& data, std::span<const double> beta,
                             std::span<const double> penalty);

struct InitialOptions
{
    bool stabilize = true; ///< a_n = n^{-1/2} when set, 0 otherwise
};

InitialEstimate fit_ols(const RegressionDataset& data, const InitialOptions& options = {});
InitialEstimate fit_ols(const DesignCache& cache, std::span<const double> y, const InitialOptions& options = {});

InitialEstimate fit_lasso(const RegressionDataset& data, double lambda1, const InitialOptions& options = {},
                          const SolverOptions& solver = {});
InitialEstimate fit_lasso(const DesignCache& cache, std::span<const double> y, double lambda1,
                          const InitialOptions& options = {}, const SolverOptions& solver = {});

struct AlassoFit
{
    Vector beta_hat;
    IndexSet active_set;
    Vector residuals;
    Vector centered_residuals;
    double sigma_hat_sq = 0.0;
    double lambda = 0.0;
    double gamma = 1.0;
    Vector weights;
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t n() const noexcept { return residuals.size(); }
    std::size_t p() const noexcept { return beta_hat.size(); }
};

/// Adaptive-LASSO weights w_j = (|beta_tilde_j| + a_n)^{-gamma}.
Vector alasso_weights(const InitialEstimate& init, double gamma);

AlassoFit fit_alasso(const RegressionDataset& data, const InitialEstimate& init, double lambda, double gamma,
                     const SolverOptions& solver = {});
AlassoFit fit_alasso(const DesignCache& cache, std::span<const double> y, const InitialEstimate& init, double lambda,
                     double gamma, const SolverOptions& solver = {});

struct KktCoordinate
{
    std::size_t index = 0;
    bool active = false;
    double gradient = 0.0; ///< 2 x_j'(y - X beta)
    double bound = 0.0;    ///< lambda w_j
    double violation = 0.0;
    bool pass = true;
};

struct KktReport
{
    std::vector<KktCoordinate> coordinates;
    double tol = 0.0;
    bool pass = true;
    std::size_t violations = 0;
};

KktReport kkt_certificate(const AlassoFit& fit, const RegressionDataset& data, double tol);
/// Same check for a LASSO solution (all weights equal to one).
KktReport kkt_certificate_lasso(std::span<const double> beta, const RegressionDataset& data, double lambda1,
                                double tol);

enum class CvObjective
{
    Lasso,
    AlassoGivenInit,
};

struct CvOptions
{
    std::size_t folds = 5;
    CvObjective objective = CvObjective::Lasso;
    double gamma = 1.0;
    /// Penalty for the LASSO initial estimator inside each fold when p exceeds
    /// the training size (AlassoGivenInit only); OLS is used otherwise.
    std::optional<double> lambda1;
    InitialOptions initial;
    SolverOptions solver;
};

struct CvResult
{
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_error;
    std::vector<double> se_error;
    std::vector<std::size_t> fold_of; ///< fold label per observation
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

CvResult cross_validate(const RegressionDataset& data, const std::vector<double>& grid, const CvOptions& options,
                        RngStream rng);

/// Geometric grid of `count` values from lambda_max down to ratio * lambda_max,
/// where lambda_max is the smallest penalty zeroing every coefficient (with
/// per-coordinate weights when given, unweighted LASSO otherwise).
std::vector<double> lambda_grid(const RegressionDataset& data, std::size_t count, double ratio,
                                std::span<const double> weights = {});

} // namespace alasso
