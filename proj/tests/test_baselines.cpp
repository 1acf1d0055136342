#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "flipci/baselines.hpp"
#include "flipci/errors.hpp"
#include "flipci/glm_fit.hpp"
#include "oracles.hpp"

using namespace flipci;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("std_normal_quantile: tabulated values") {
    CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(std_normal_quantile(0.999) == doctest::Approx(3.090232).epsilon(1e-6));
    CHECK(std_normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
    CHECK_THROWS_AS(std_normal_quantile(0.0), InputError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), InputError);
    CHECK_THROWS_AS(std_normal_quantile(-0.2), InputError);
}

TEST_CASE("std_normal_quantile: against the numerical-integration oracle") {
    for (double q : {0.001, 0.1, 0.3, 0.6, 0.9, 0.999}) {
        CHECK(std_normal_quantile(q) ==
              doctest::Approx(oracle::quantile_by_integration(q)).scale(1.0).epsilon(1e-7));
    }
    // symmetry and accuracy deep in the tails
    for (double q : {1e-9, 1e-6, 1e-3}) {
        CHECK(std_normal_quantile(q) == doctest::Approx(-std_normal_quantile(1.0 - q))
                                            .scale(1.0)
                                            .epsilon(1e-8));
        // round-trip through the CDF
        double x = std_normal_quantile(q);
        double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
        CHECK(back == doctest::Approx(q).epsilon(1e-6));
    }
}

TEST_CASE("wald_interval: standard quantile and degenerate alpha") {
    FullFit fit;
    fit.beta_hat = 0.0;
    fit.se_model = 1.0;
    auto ci = wald_interval(fit, 0.05);
    CHECK(ci.lower == doctest::Approx(-1.959964).epsilon(1e-6));
    CHECK(ci.upper == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(ci.method == CiMethod::Wald);

    auto point = wald_interval(fit, 1.0);
    CHECK(point.lower == 0.0);
    CHECK(point.upper == 0.0);
}

TEST_CASE("wald_interval: matches the closed-form least-squares oracle") {
    std::mt19937_64 gen(127);
    auto inst = oracle::random_gaussian_instance(20, 2, gen);
    auto fit = fit_full(Family::gaussian(), inst.y, inst.design);

    MatrixXd X(20, 3);
    X.col(0) = inst.design.x;
    X.rightCols(2) = inst.design.Z;
    auto ols = oracle::ols_closed_form(inst.y, X);
    CHECK(fit.beta_hat == doctest::Approx(ols.beta).epsilon(1e-8));
    CHECK(fit.se_model == doctest::Approx(ols.se_beta).epsilon(1e-8));

    auto ci = wald_interval(fit, 0.05);
    double z = std_normal_quantile(0.975);
    CHECK(ci.lower == doctest::Approx(ols.beta - z * ols.se_beta).epsilon(1e-8));
    CHECK(ci.upper == doctest::Approx(ols.beta + z * ols.se_beta).epsilon(1e-8));
}

TEST_CASE("sandwich: dense oracle on n=5 gaussian and poisson instances") {
    VectorXd y(5), x(5);
    y << 1.2, -0.3, 0.8, 2.1, -1.0;
    x << -2.0, -1.0, 0.0, 1.0, 2.0;
    MatrixXd Z = MatrixXd::Ones(5, 1);
    auto design = DesignSplit::make(x, Z);

    auto gfit = fit_full(Family::gaussian(), y, design);
    auto est = sandwich_se(gfit, design, y, false);
    CHECK(est.kind == CovarianceKind::SandwichHc0);
    CHECK(est.se_beta ==
          doctest::Approx(oracle::dense_sandwich_se(gfit, design, y, false)).epsilon(1e-10));
    auto est1 = sandwich_se(gfit, design, y, true);
    CHECK(est1.kind == CovarianceKind::SandwichHc1);
    CHECK(est1.se_beta ==
          doctest::Approx(oracle::dense_sandwich_se(gfit, design, y, true)).epsilon(1e-10));
    CHECK(est1.se_beta == doctest::Approx(est.se_beta * std::sqrt(5.0 / 3.0)).epsilon(1e-12));

    VectorXd yc(5);
    yc << 1, 0, 2, 4, 3;
    auto pfit = fit_full(Family::poisson(), yc, design);
    auto pest = sandwich_se(pfit, design, yc, false);
    CHECK(pest.se_beta ==
          doctest::Approx(oracle::dense_sandwich_se(pfit, design, yc, false)).epsilon(1e-10));
}

TEST_CASE("sandwich: near the model-based se under correct specification at n=500") {
    std::mt19937_64 gen(131);
    auto inst = oracle::random_gaussian_instance(500, 2, gen);
    auto fit = fit_full(Family::gaussian(), inst.y, inst.design);
    auto est = sandwich_se(fit, inst.design, inst.y, false);
    CHECK(est.se_beta == doctest::Approx(fit.se_model).epsilon(0.10));
}

TEST_CASE("sandwich: equals model covariance for unit residual contributions") {
    // residuals +/-1 exactly, orthogonal to the design, so B = sum x x' = A
    // at unit dispersion and the sandwich collapses to (X'X)^{-1}.
    VectorXd x(4), y(4), r(4);
    x << 1.0, 1.0, 2.0, 2.0;
    r << 1.0, -1.0, 1.0, -1.0;
    MatrixXd Z = MatrixXd::Ones(4, 1);
    y = 0.7 * x + Z.col(0) * 0.2 + r;
    // n = 4 > p + 1 = 2 holds
    auto design = DesignSplit::make(x, Z);
    auto fit = fit_full(Family::gaussian(), y, design);
    REQUIRE((y - fit.mu_hat - r).lpNorm<Eigen::Infinity>() < 1e-10);

    MatrixXd X(4, 2);
    X.col(0) = x;
    X.col(1) = Z.col(0);
    double model_unit_se = std::sqrt((X.transpose() * X).inverse()(0, 0));
    auto est = sandwich_se(fit, design, y, false);
    CHECK(est.se_beta == doctest::Approx(model_unit_se).epsilon(1e-10));
}

TEST_CASE("sandwich vs wald under nuisance heteroskedasticity") {
    // error sd = exp(z) with the covariate pair on a shared heavy-tailed
    // scale: the sandwich tracks the truth at N=100 while the homoskedastic
    // wald undercovers. (With a jointly gaussian pair the projected target
    // is independent of z and wald would stay near nominal.)
    const int reps = 1000, N = 100;
    const double beta = 0.4;
    std::mt19937_64 gen(137);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::chi_squared_distribution<double> chi4(4.0);
    int wald_cov = 0, sand_cov = 0;
    for (int rep = 0; rep < reps; ++rep) {
        VectorXd x(N), y(N);
        MatrixXd Z(N, 2);
        for (int i = 0; i < N; ++i) {
            double s = std::sqrt(chi4(gen) / 2.0);
            double g1 = norm(gen) / s, g2 = norm(gen) / s;
            x[i] = g1;
            double z = 0.2 * g1 + std::sqrt(1.0 - 0.04) * g2;
            Z(i, 0) = 1.0;
            Z(i, 1) = z;
            y[i] = beta * x[i] - 0.5 * z + std::exp(z) * norm(gen);
        }
        auto design = DesignSplit::make(x, Z);
        auto fit = fit_full(Family::gaussian(), y, design);
        if (wald_interval(fit, 0.05).contains(beta)) ++wald_cov;
        if (sandwich_interval(fit, design, y, 0.05).contains(beta)) ++sand_cov;
    }
    CHECK(double(sand_cov) / reps >= 0.93);
    CHECK(double(wald_cov) / reps < 0.93);
}

TEST_CASE("interval symmetry and width monotone in alpha") {
    std::mt19937_64 gen(139);
    auto inst = oracle::random_gaussian_instance(30, 2, gen);
    auto fit = fit_full(Family::gaussian(), inst.y, inst.design);
    double prev_width = std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.05, 0.1, 0.5}) {
        auto w = wald_interval(fit, alpha);
        auto s = sandwich_interval(fit, inst.design, inst.y, alpha);
        CHECK(w.upper - fit.beta_hat == doctest::Approx(fit.beta_hat - w.lower).epsilon(1e-12));
        CHECK(s.upper - fit.beta_hat == doctest::Approx(fit.beta_hat - s.lower).epsilon(1e-12));
        CHECK(w.width() < prev_width);
        prev_width = w.width();
    }
}

TEST_CASE("method names round-trip") {
    for (CiMethod m : {CiMethod::FlipEquitailed, CiMethod::FlipSymmetric, CiMethod::Wald,
                       CiMethod::Sandwich}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(parse_method("equitailed") == CiMethod::FlipEquitailed);
    CHECK_THROWS_AS(parse_method("bootstrap"), InputError);
}
