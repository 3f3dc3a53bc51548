#include "activedp/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "activedp/error.hpp"

namespace activedp {

CovMatrix empirical_cov(const Eigen::MatrixXd& z) {
    if (z.rows() < 2) throw UsageError("empirical_cov needs at least 2 rows");
    const double n = static_cast<double>(z.rows());
    CovMatrix out;
    std::vector<Eigen::VectorXd> cols;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double mean = z.col(j).mean();
        Eigen::VectorXd c = z.col(j).array() - mean;
        const double sd = std::sqrt(c.squaredNorm() / n);
        if (sd < 1e-12) {
            out.constant.push_back(static_cast<std::size_t>(j));
            continue;
        }
        out.kept.push_back(static_cast<std::size_t>(j));
        cols.push_back(c / sd);
    }
    const auto p = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd zs(z.rows(), p);
    for (Eigen::Index j = 0; j < p; ++j) zs.col(j) = cols[static_cast<std::size_t>(j)];
    out.s = zs.transpose() * zs / n;
    out.s.diagonal().array() += kCovRidge;
    return out;
}

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double offdiag_abs_sum(const Eigen::MatrixXd& m) {
    return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
}

// Precision matrix implied by the per-column lasso coefficients.
Eigen::MatrixXd precision_from_betas(const Eigen::MatrixXd& w, const Eigen::MatrixXd& beta) {
    const Eigen::Index p = w.rows();
    Eigen::MatrixXd theta(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        // beta(j, j) is always zero, so the full dot product skips the diagonal.
        const double tjj = 1.0 / (w(j, j) - w.col(j).dot(beta.col(j)));
        theta.col(j) = -beta.col(j) * tjj;
        theta(j, j) = tjj;
    }
    return (0.5 * (theta + theta.transpose())).eval();
}

}  // namespace

double glasso_objective(const Eigen::MatrixXd& s, double lambda, const Eigen::MatrixXd& theta) {
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return logdet - (s.cwiseProduct(theta)).sum() - lambda * offdiag_abs_sum(theta);
}

GlassoResult graphical_lasso(const Eigen::MatrixXd& s, double lambda, const GlassoConfig& cfg) {
    const Eigen::Index p = s.rows();
    if (s.cols() != p) throw UsageError("graphical_lasso: S must be square");
    if (!(lambda >= 0.0)) throw UsageError("graphical_lasso: lambda must be non-negative");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw UsageError("graphical_lasso: S must be symmetric");
    if ((s.diagonal().array() <= 0.0).any()) throw UsageError("graphical_lasso: S diagonal must be positive");

    GlassoResult res;
    if (p == 0) {
        res.converged = true;
        return res;
    }
    Eigen::MatrixXd w = s;
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, p);
    double mean_off = p > 1 ? offdiag_abs_sum(s) / static_cast<double>(p * (p - 1)) : 0.0;
    const double threshold = cfg.tol * std::max(mean_off, 1e-12);
    const double inner_tol = cfg.tol / 10.0;

    Eigen::VectorXd r(p);
    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            auto b = beta.col(j);
            // r = W b over all rows; b(j) == 0 so column j of W never contributes.
            r = w * b;
            for (int inner = 0; inner < cfg.inner_max_sweeps; ++inner) {
                double max_step = 0.0;
                for (Eigen::Index k = 0; k < p; ++k) {
                    if (k == j) continue;
                    const double wkk = w(k, k);
                    const double grad = s(k, j) - (r(k) - wkk * b(k));
                    const double next = soft_threshold(grad, lambda) / wkk;
                    const double delta = next - b(k);
                    if (delta != 0.0) {
                        r.noalias() += delta * w.col(k);
                        b(k) = next;
                        max_step = std::max(max_step, std::abs(delta));
                    }
                }
                if (max_step < inner_tol) break;
            }
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k == j) continue;
                max_change = std::max(max_change, std::abs(r(k) - w(k, j)));
                w(k, j) = r(k);
                w(j, k) = r(k);
            }
        }
        res.sweeps = sweep + 1;
        if (cfg.track_objective) res.objective.push_back(glasso_objective(s, lambda, precision_from_betas(w, beta)));
        if (max_change < threshold) {
            res.converged = true;
            break;
        }
    }

    res.theta = precision_from_betas(w, beta);
    if (Eigen::LLT<Eigen::MatrixXd>(res.theta).info() != Eigen::Success) {
        // W stays positive definite throughout; fall back to its inverse.
        res.theta = w.inverse();
        res.theta = (0.5 * (res.theta + res.theta.transpose())).eval();
    }
    res.w = std::move(w);
    return res;
}

double kkt_residual(const Eigen::MatrixXd& s, double lambda, const Eigen::MatrixXd& theta) {
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) throw UsageError("kkt_residual: theta is not positive definite");
    const Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(theta.rows(), theta.cols()));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.rows(); ++i)
        for (Eigen::Index j = 0; j < theta.cols(); ++j) {
            if (i == j) continue;
            const double g = w(i, j) - s(i, j);
            const double t = theta(i, j);
            const double v = std::abs(t) < 1e-10 ? std::max(0.0, std::abs(g) - lambda)
                                                  : std::abs(g - lambda * (t > 0 ? 1.0 : -1.0));
            worst = std::max(worst, v);
        }
    return worst;
}

}  // namespace activedp
