#include "activedp/al_model.hpp"

#include <algorithm>
#include <cmath>

#include "activedp/error.hpp"

namespace activedp {

LogRegModel LogRegModel::zero(Eigen::Index dim) {
    LogRegModel m;
    m.weights = Eigen::VectorXd::Zero(dim);
    return m;
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_inputs(const FeatureMatrix& x, std::span<const int> y, Eigen::Index dim) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw UsageError("logistic regression: row/label mismatch");
    if (x.cols() != dim) throw UsageError("logistic regression: feature dimension mismatch");
    for (int v : y)
        if (v != 0 && v != 1) throw UsageError("logistic regression expects labels in {0,1}");
}

}  // namespace

double logreg_loss(const FeatureMatrix& x, std::span<const int> y, const Eigen::VectorXd& w, double b, double l2) {
    check_inputs(x, y, w.size());
    const Eigen::VectorXd z = (x * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z[i]) - y[static_cast<std::size_t>(i)] * z[i];
    const double n = std::max<double>(1.0, static_cast<double>(y.size()));
    return loss / n + 0.5 * l2 * w.squaredNorm();
}

Eigen::VectorXd logreg_gradient(const FeatureMatrix& x, std::span<const int> y, const Eigen::VectorXd& w,
                                double b, double l2) {
    check_inputs(x, y, w.size());
    const Eigen::VectorXd z = (x * w).array() + b;
    Eigen::VectorXd r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - y[static_cast<std::size_t>(i)];
    const double n = std::max<double>(1.0, static_cast<double>(y.size()));
    Eigen::VectorXd g(w.size() + 1);
    g.head(w.size()) = x.transpose() * r / n + l2 * w;
    g[w.size()] = r.sum() / n;
    return g;
}

LogRegFit fit_logreg(const FeatureMatrix& x, std::span<const int> y, const LogRegConfig& cfg) {
    check_inputs(x, y, x.cols());
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (!has0 || !has1) throw UsageError("logistic regression needs examples of both classes");

    const Eigen::Index d = x.cols();
    LogRegFit fit;
    fit.model = LogRegModel::zero(d);
    fit.model.l2 = cfg.l2;
    fit.model.trained_on = y.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    double loss = logreg_loss(x, y, w, b, cfg.l2);
    fit.loss_history.push_back(loss);
    double step = cfg.initial_step;

    for (int it = 0; it < cfg.max_iter; ++it) {
        const Eigen::VectorXd g = logreg_gradient(x, y, w, b, cfg.l2);
        const double gnorm2 = g.squaredNorm();
        if (std::sqrt(gnorm2) < cfg.tol) {
            fit.converged = true;
            break;
        }
        step = std::min(step * 2.0, 1e6);
        bool accepted = false;
        while (step > 1e-16) {
            const Eigen::VectorXd w_next = w - step * g.head(d);
            const double b_next = b - step * g[d];
            const double next = logreg_loss(x, y, w_next, b_next, cfg.l2);
            if (next <= loss - cfg.armijo * step * gnorm2) {
                w = w_next;
                b = b_next;
                loss = next;
                accepted = true;
                break;
            }
            step *= cfg.shrink;
        }
        if (!accepted) {
            // No decrease representable in floating point: stationary for our purposes.
            fit.converged = true;
            break;
        }
        fit.iterations = it + 1;
        fit.loss_history.push_back(loss);
    }
    fit.model.weights = std::move(w);
    fit.model.bias = b;
    return fit;
}

std::vector<SoftLabel> predict_proba(const LogRegModel& m, const FeatureMatrix& x) {
    if (x.cols() != m.weights.size()) throw UsageError("predict_proba: feature dimension mismatch");
    const Eigen::VectorXd z = (x * m.weights).array() + m.bias;
    std::vector<SoftLabel> out;
    out.reserve(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double p1 = sigmoid(std::clamp(z[i], -kLogitClip, kLogitClip));
        out.push_back(SoftLabel{{1.0 - p1, p1}});
    }
    return out;
}

}  // namespace activedp
