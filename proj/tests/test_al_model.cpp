#include <doctest.h>

#include <cmath>

#include "activedp/al_model.hpp"
#include "activedp/error.hpp"
#include "activedp/rng.hpp"

using namespace activedp;

namespace {

FeatureMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

struct Problem {
    FeatureMatrix x;
    std::vector<int> y;
    Eigen::VectorXd w;
    double b = 0.0;
};

Problem random_problem(std::uint64_t seed, Eigen::Index n = 5, Eigen::Index d = 3) {
    Rng rng(seed);
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = standard_normal(rng);
    Problem p;
    p.x = sparse(m);
    for (Eigen::Index i = 0; i < n; ++i) p.y.push_back(static_cast<int>(uniform_index(rng, 2)));
    p.y[0] = 0;
    p.y[1] = 1;
    p.w.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) p.w(j) = standard_normal(rng);
    p.b = standard_normal(rng);
    return p;
}

}  // namespace

TEST_CASE("gradient matches central differences") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_problem(s);
        const double l2 = 1e-2;
        const auto g = logreg_gradient(p.x, p.y, p.w, p.b, l2);
        const double h = 1e-6;
        Eigen::VectorXd fd(g.size());
        for (Eigen::Index j = 0; j < p.w.size(); ++j) {
            auto wp = p.w, wm = p.w;
            wp(j) += h;
            wm(j) -= h;
            fd(j) = (logreg_loss(p.x, p.y, wp, p.b, l2) - logreg_loss(p.x, p.y, wm, p.b, l2)) / (2 * h);
        }
        fd(p.w.size()) =
            (logreg_loss(p.x, p.y, p.w, p.b + h, l2) - logreg_loss(p.x, p.y, p.w, p.b - h, l2)) / (2 * h);
        CHECK((g - fd).norm() / std::max(1e-12, fd.norm()) < 1e-4);
    }
}

TEST_CASE("loss is monotone under the line search") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_problem(100 + s, 40, 4);
        const auto fit = fit_logreg(p.x, p.y);
        REQUIRE(fit.loss_history.size() >= 2);
        for (std::size_t k = 1; k < fit.loss_history.size(); ++k)
            CHECK(fit.loss_history[k] <= fit.loss_history[k - 1]);
    }
}

TEST_CASE("separable points are fitted") {
    Eigen::MatrixXd m(2, 1);
    m << -1, 1;
    const std::vector<int> y{0, 1};
    const auto fit = fit_logreg(sparse(m), y);
    const auto p = predict_proba(fit.model, sparse(m));
    CHECK(p[0].argmax() == 0);
    CHECK(p[1].argmax() == 1);
}

TEST_CASE("zero iterations give the zero model") {
    Eigen::MatrixXd m(2, 1);
    m << -1, 1;
    const std::vector<int> y{0, 1};
    LogRegConfig cfg;
    cfg.max_iter = 0;
    const auto fit = fit_logreg(sparse(m), y, cfg);
    CHECK(fit.model.weights.norm() == 0.0);
    for (const auto& s : predict_proba(fit.model, sparse(m))) CHECK(s.probs == std::vector<double>{0.5, 0.5});
}

TEST_CASE("sigmoid hand values and logit clipping") {
    LogRegModel m = LogRegModel::zero(1);
    m.weights(0) = 1.0;
    Eigen::MatrixXd x(4, 1);
    x << 0, std::log(3.0), 1e6, -1e6;
    const auto p = predict_proba(m, sparse(x));
    CHECK(p[0].probs[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(p[1].probs[1] - 0.75) < 1e-12);
    CHECK(p[2].probs[1] < 1.0);
    CHECK(p[3].probs[1] > 0.0);
    CHECK(std::isfinite(p[2].probs[0]));
    CHECK(std::abs(p[3].probs[0] + p[3].probs[1] - 1.0) < 1e-15);
}

TEST_CASE("single-class input is rejected") {
    Eigen::MatrixXd m(2, 1);
    m << -1, 1;
    const std::vector<int> y{1, 1};
    CHECK_THROWS_AS(fit_logreg(sparse(m), y), UsageError);
}
