#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace activedp {

inline constexpr double kCovRidge = 1e-6;

/// Correlation-scale covariance of the non-constant columns of a data matrix.
struct CovMatrix {
    Eigen::MatrixXd s;
    /// Original column index of each row/column of `s`.
    std::vector<std::size_t> kept;
    /// Original columns dropped for having (numerically) zero variance.
    std::vector<std::size_t> constant;
};

/// Standardise columns, drop zero-variance ones, S = Z'Z/n plus a 1e-6 ridge
/// on the diagonal. Throws UsageError for fewer than 2 rows.
CovMatrix empirical_cov(const Eigen::MatrixXd& z);

struct GlassoConfig {
    double tol = 1e-5;
    int max_iter = 200;
    int inner_max_sweeps = 1000;
    /// Record the penalised log-likelihood after every sweep (costs one
    /// Cholesky per sweep).
    bool track_objective = false;
};

struct GlassoResult {
    Eigen::MatrixXd theta;  // precision estimate, symmetric positive definite
    Eigen::MatrixXd w;      // covariance estimate maintained by the solver
    bool converged = false;
    int sweeps = 0;
    std::vector<double> objective;  // per sweep when track_objective is set
};

/// Sparse inverse covariance by block coordinate descent over columns, each
/// column a lasso solved by cyclic coordinate descent. Only off-diagonal
/// entries are penalised. On hitting max_iter the last iterate is returned
/// with converged = false.
GlassoResult graphical_lasso(const Eigen::MatrixXd& s, double lambda, const GlassoConfig& cfg = {});

/// log det(theta) - tr(S theta) - lambda * sum_{i != j} |theta_ij|.
/// Returns -inf when theta is not positive definite.
double glasso_objective(const Eigen::MatrixXd& s, double lambda, const Eigen::MatrixXd& theta);

/// Largest violation of the subgradient optimality conditions over the
/// off-diagonal entries. Throws UsageError if theta is not positive definite.
double kkt_residual(const Eigen::MatrixXd& s, double lambda, const Eigen::MatrixXd& theta);

}  // namespace activedp
