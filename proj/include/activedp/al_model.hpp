#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "activedp/featurize.hpp"
#include "activedp/soft_label.hpp"

namespace activedp {

/// Binary L2-regularised logistic regression. Serves as the active-learning
/// model and as the downstream end model.
struct LogRegModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double l2 = 1e-3;
    std::size_t trained_on = 0;

    /// All-zero model; predicts [0.5, 0.5] everywhere.
    static LogRegModel zero(Eigen::Index dim);
};

struct LogRegConfig {
    double l2 = 1e-3;
    int max_iter = 500;
    double tol = 1e-6;
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo = 1e-4;
};

struct LogRegFit {
    LogRegModel model;
    std::vector<double> loss_history;  // objective before the first step and after each accepted step
    int iterations = 0;
    bool converged = false;
};

inline constexpr double kLogitClip = 30.0;

/// mean_i [softplus(z_i) - y_i z_i] + (l2/2) ||w||^2 with z = Xw + b.
double logreg_loss(const FeatureMatrix& x, std::span<const int> y, const Eigen::VectorXd& w, double b, double l2);

/// Gradient of logreg_loss; the last entry is d/db.
Eigen::VectorXd logreg_gradient(const FeatureMatrix& x, std::span<const int> y, const Eigen::VectorXd& w,
                                double b, double l2);

/// Full-batch gradient descent with Armijo backtracking from zero weights.
/// Throws UsageError unless both classes 0 and 1 occur in `y`.
LogRegFit fit_logreg(const FeatureMatrix& x, std::span<const int> y, const LogRegConfig& cfg = {});

std::vector<SoftLabel> predict_proba(const LogRegModel& m, const FeatureMatrix& x);

}  // namespace activedp
