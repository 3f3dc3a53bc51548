#include <doctest.h>

#include "activedp/error.hpp"
#include "activedp/glasso.hpp"
#include "oracles.hpp"

using namespace activedp;

TEST_CASE("lambda = 0 reproduces the inverse") {
    for (Eigen::Index p : {4, 6}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto cov = oracle::random_correlation(p, 10 * static_cast<std::uint64_t>(p) + s);
            GlassoConfig cfg;
            cfg.tol = 1e-8;
            cfg.max_iter = 1000;
            const auto fit = graphical_lasso(cov, 0.0, cfg);
            CHECK(fit.converged);
            const Eigen::MatrixXd inv = cov.fullPivLu().inverse();
            CHECK((fit.theta - inv).cwiseAbs().maxCoeff() < 1e-4);
        }
    }
}

TEST_CASE("identity covariance gives the identity exactly") {
    for (double lambda : {0.0, 0.1, 1.0}) {
        const auto fit = graphical_lasso(Eigen::MatrixXd::Identity(5, 5), lambda);
        CHECK(fit.theta == Eigen::MatrixXd::Identity(5, 5));
    }
}

TEST_CASE("KKT conditions hold and the objective rises every sweep") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(s);
        const auto p = static_cast<Eigen::Index>(3 + uniform_index(rng, 6));
        const double lambda = 0.02 + 0.4 * uniform01(rng);
        const auto cov = oracle::random_correlation(p, 1000 + s);
        GlassoConfig cfg;
        cfg.track_objective = true;
        const auto fit = graphical_lasso(cov, lambda, cfg);
        CHECK(fit.converged);
        CHECK(oracle::glasso_kkt(cov, lambda, fit.theta) < 1e-3);
        CHECK(kkt_residual(cov, lambda, fit.theta) < 1e-3);
        for (std::size_t k = 1; k < fit.objective.size(); ++k)
            CHECK(fit.objective[k] >= fit.objective[k - 1] - 1e-9);
        CHECK((fit.theta - fit.theta.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("larger penalties give sparser precision matrices") {
    const auto cov = oracle::random_correlation(8, 77);
    auto zeros = [](const Eigen::MatrixXd& t) { return (t.array() == 0.0).count(); };
    const auto a = graphical_lasso(cov, 0.01).theta;
    const auto b = graphical_lasso(cov, 0.3).theta;
    const auto c = graphical_lasso(cov, 5.0).theta;
    CHECK(zeros(a) <= zeros(b));
    CHECK(zeros(c) == 8 * 7);  // only the diagonal survives
}

TEST_CASE("empirical covariance standardises and drops constant columns") {
    Eigen::MatrixXd z(4, 3);
    z << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
    const auto cov = empirical_cov(z);
    CHECK(cov.kept == std::vector<std::size_t>{0, 2});
    CHECK(cov.constant == std::vector<std::size_t>{1});
    REQUIRE(cov.s.rows() == 2);
    CHECK(cov.s(0, 0) == doctest::Approx(1.0 + kCovRidge).epsilon(1e-12));
    CHECK(cov.s(0, 1) == doctest::Approx(1.0).epsilon(1e-12));  // perfectly correlated
    CHECK_THROWS_AS(empirical_cov(Eigen::MatrixXd::Ones(1, 2)), UsageError);
}

TEST_CASE("input validation") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.1, 1;
    CHECK_THROWS_AS(graphical_lasso(asym, 0.1), UsageError);
    CHECK_THROWS_AS(graphical_lasso(Eigen::MatrixXd::Identity(2, 2), -1.0), UsageError);
    CHECK(glasso_objective(Eigen::MatrixXd::Identity(2, 2), 0.1, -Eigen::MatrixXd::Identity(2, 2)) ==
          -std::numeric_limits<double>::infinity());
}
