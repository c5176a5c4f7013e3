#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mrs/error.hpp"

namespace mrs {

// l1-penalized Poisson regression
//
//   minimize (1/n) sum_i [ -y_i eta_i + exp(eta_i) ] + lambda sum_k w_k |theta_k|
//   eta_i = theta_0 + <theta, x_i>
//
// The intercept theta_0 is never penalized; w_k are 0/1 penalty flags. The
// design is used on its natural scale (no standardization).
class LassoProblem {
public:
    // Throws InvalidArgument on size mismatch, non-finite cells or negative
    // responses. Penalty flags default to all ones.
    LassoProblem(Eigen::MatrixXd design, Eigen::VectorXd response, Eigen::VectorXd penalty_factors = {});

    Eigen::Index n() const noexcept { return design_.rows(); }
    Eigen::Index q() const noexcept { return design_.cols(); }
    const Eigen::MatrixXd& design() const noexcept { return design_; }
    const Eigen::VectorXd& response() const noexcept { return response_; }
    const Eigen::VectorXd& penalty_factors() const noexcept { return penalty_; }
    double response_mean() const noexcept { return response_mean_; }

    // Rows selected by index, in the given order.
    LassoProblem subset(const std::vector<Eigen::Index>& rows) const;

private:
    Eigen::MatrixXd design_;
    Eigen::VectorXd response_;
    Eigen::VectorXd penalty_;
    double response_mean_ = 0.0;
};

struct SolverOptions {
    double inner_tol = 1e-7;      // max |coefficient change| per coordinate sweep
    double outer_rel_tol = 1e-9;  // relative objective change between Newton steps
    int max_outer = 200;
    int max_sweeps = 100000;      // coordinate sweeps per Newton step
    double eta_clamp = 30.0;      // |linear predictor| bound, see DivergenceError
    double kkt_tol = 1e-6;
    bool record_trace = false;
};

struct LassoFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
    std::vector<double> objective_trace;  // filled when SolverOptions::record_trace
};

// Thrown when the Newton iteration exhausts max_outer. Carries the last
// iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, LassoFit last) : Error(what), last_(std::move(last)) {}
    const LassoFit& last_iterate() const noexcept { return last_; }

private:
    LassoFit last_;
};

// The fit terminated with a linear predictor beyond +eta_clamp, or below
// -eta_clamp on a row with a positive count (an unbounded-MLE signature).
class DivergenceError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

// Smallest lambda at which every penalized coefficient is zero.
double lambda_max(const LassoProblem& problem);

double lasso_objective(const LassoProblem& problem, double intercept, const Eigen::VectorXd& coefficients,
                       double lambda);

// Gradient of the smooth part, intercept first.
Eigen::VectorXd smooth_gradient(const LassoProblem& problem, double intercept, const Eigen::VectorXd& coefficients);

// Maximum violation of the subgradient optimality conditions.
double kkt_residual(const LassoProblem& problem, const LassoFit& fit);

LassoFit fit_poisson_lasso(const LassoProblem& problem, double lambda, const SolverOptions& options = {});
LassoFit fit_poisson_lasso(const LassoProblem& problem, double lambda, const SolverOptions& options,
                           const LassoFit& warm_start);

// Log-spaced descending grid from lambda_max down to lambda_max * ratio.
// A zero lambda_max collapses the grid to {0}.
std::vector<double> lambda_grid(double lambda_max, int grid_size, double ratio);

struct LambdaPath {
    std::vector<double> lambdas;
    std::vector<LassoFit> fits;  // fits[i] solves at lambdas[i]
    // Set when a fit failed part-way; `lambdas` is then cut to the fitted prefix.
    std::optional<std::string> truncated;
};

LambdaPath lambda_path(const LassoProblem& problem, int grid_size, double ratio, const SolverOptions& options = {});
// Warm-started fits along an explicit descending grid, stopping at the
// first solver failure.
LambdaPath fit_path(const LassoProblem& problem, const std::vector<double>& grid, const SolverOptions& options = {});

enum class CvCriterion { Deviance, SquaredError };

struct CvOptions {
    int folds = 5;  // folds == n gives leave-one-out
    int grid_size = 50;
    double ratio = 1e-3;
    std::uint64_t seed = 1;
    CvCriterion criterion = CvCriterion::Deviance;
    int max_reshuffles = 10;
};

struct CvResult {
    std::vector<double> lambdas;
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    std::size_t index_min = 0;
    std::size_t index_band_hi = 0;  // largest lambda within min + 2 SE
    std::size_t index_band_lo = 0;  // smallest lambda within min + 2 SE
    LambdaPath path;                // full-data fits on `lambdas`

    double lambda_min() const { return lambdas[index_min]; }
    double lambda_band_hi() const { return lambdas[index_band_hi]; }
    double lambda_band_lo() const { return lambdas[index_band_lo]; }
    const LassoFit& fit_band_hi() const { return path.fits[index_band_hi]; }
    const LassoFit& fit_band_lo() const { return path.fits[index_band_lo]; }
};

// Balanced seeded fold labels in [0, folds).
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed);

// Mean held-out loss per observation.
double holdout_loss(const LassoProblem& test, const LassoFit& fit, CvCriterion criterion);

CvResult cv_select(const LassoProblem& problem, const CvOptions& cv, const SolverOptions& options = {});

} // namespace mrs
