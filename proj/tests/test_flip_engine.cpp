#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "flipci/errors.hpp"
#include "flipci/flip_engine.hpp"
#include "flipci/glm_fit.hpp"
#include "oracles.hpp"

using namespace flipci;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("generate_flips: exhaustive n=3 enumerates all sign vectors") {
    auto ens = generate_flips(3, 8, 0);
    CHECK(ens.exhaustive());
    CHECK(ens.w() == 8);
    CHECK(ens.row(0).isApprox(VectorXd::Ones(3)));
    // all rows distinct
    for (int g = 0; g < 8; ++g)
        for (int h = g + 1; h < 8; ++h) CHECK((ens.row(g) - ens.row(h)).norm() > 0.5);
}

TEST_CASE("generate_flips: identical seeds regenerate bit-identically") {
    auto a = generate_flips(10, 500, 7);
    auto b = generate_flips(10, 500, 7);
    CHECK(a.matrix() == b.matrix());
    auto c = generate_flips(10, 500, 8);
    CHECK(a.matrix() != c.matrix());
    CHECK(a.row(0).isApprox(VectorXd::Ones(10)));
    for (int g = 0; g < 500; ++g)
        for (int i = 0; i < 10; ++i) CHECK(std::abs(a.matrix()(g, i)) == 1.0);
}

TEST_CASE("generate_flips: w beyond the group size is an error") {
    CHECK_THROWS_AS(generate_flips(2, 5, 1), InputError);
    CHECK_THROWS_AS(generate_flips(3, 1, 1), InputError);
}

namespace {
struct Fixture {
    VectorXd y;
    DesignSplit design;
    NullFit fit;
};

Fixture small_gaussian_fixture() {
    VectorXd y(3), x(3);
    y << 1.0, 2.0, 4.0;
    x << 0.0, 1.0, 2.0;
    MatrixXd Z = MatrixXd::Ones(3, 1);
    auto design = DesignSplit::make(x, Z);
    auto fit = fit_null(Family::gaussian(), y, design, 0.0);
    return {y, design, fit};
}
}  // namespace

TEST_CASE("effective_score: antisymmetry under flip negation is exact") {
    auto fx = small_gaussian_fixture();
    VectorXd f(3);
    f << 1.0, -1.0, 1.0;
    double plus = effective_score(fx.fit, fx.design, fx.y, f);
    double minus = effective_score(fx.fit, fx.design, fx.y, -f);
    CHECK(minus == -plus);

    VectorXd ones = VectorXd::Ones(3);
    CHECK(effective_score(fx.fit, fx.design, fx.y, -ones) ==
          -effective_score(fx.fit, fx.design, fx.y, ones));
}

TEST_CASE("effective_score: zero at the joint MLE under the identity flip") {
    std::mt19937_64 gen(41);
    for (int rep = 0; rep < 5; ++rep) {
        auto inst = oracle::random_gaussian_instance(25, 2, gen);
        auto full = fit_full(Family::gaussian(), inst.y, inst.design);
        auto null = fit_null(Family::gaussian(), inst.y, inst.design, full.beta_hat);
        double s = effective_score(null, inst.design, inst.y, VectorXd::Ones(25));
        CHECK(std::abs(s) < 1e-10);
    }
}

TEST_CASE("effective_score and flip_variance match the dense-H oracle") {
    auto fx = small_gaussian_fixture();
    VectorXd f(3);
    f << 1.0, -1.0, 1.0;
    CHECK(effective_score(fx.fit, fx.design, fx.y, f) ==
          doctest::Approx(oracle::dense_effective_score(fx.fit, fx.design, fx.y, f))
              .epsilon(1e-12));
    CHECK(flip_variance(fx.fit, fx.design, fx.y, f) ==
          doctest::Approx(oracle::dense_flip_variance(fx.fit, fx.design, f)).epsilon(1e-12));

    std::mt19937_64 gen(43);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int rep = 0; rep < 10; ++rep) {
        auto inst = oracle::random_poisson_instance(20, 3, gen);
        auto null = fit_null(Family::poisson(), inst.y, inst.design, 0.1);
        VectorXd flip(20);
        for (int i = 0; i < 20; ++i) flip[i] = coin(gen) ? 1.0 : -1.0;
        double eff = effective_score(null, inst.design, inst.y, flip);
        double var = flip_variance(null, inst.design, inst.y, flip);
        CHECK(eff == doctest::Approx(oracle::dense_effective_score(null, inst.design, inst.y,
                                                                   flip))
                         .epsilon(1e-10));
        CHECK(var ==
              doctest::Approx(oracle::dense_flip_variance(null, inst.design, flip)).epsilon(1e-10));
    }
}

TEST_CASE("flip_variance: identity collapses by projection idempotency") {
    auto fx = small_gaussian_fixture();
    VectorXd ones = VectorXd::Ones(3);
    // direct evaluation of n^{-1} x' W^{1/2} (I-H) W^{1/2} x
    MatrixXd H = oracle::dense_hat(fx.fit.w_diag, fx.design.Z);
    MatrixXd Wh = fx.fit.w_diag.array().sqrt().matrix().asDiagonal();
    VectorXd wx = Wh * fx.design.x;
    double expected = wx.dot((MatrixXd::Identity(3, 3) - H) * wx) / 3.0;
    CHECK(flip_variance(fx.fit, fx.design, fx.y, ones) == doctest::Approx(expected).epsilon(1e-12));
    // sign cancellation
    CHECK(flip_variance(fx.fit, fx.design, fx.y, -ones) ==
          doctest::Approx(flip_variance(fx.fit, fx.design, fx.y, ones)).epsilon(1e-14));
}

TEST_CASE("pvalue_from_stats: counting rule") {
    VectorXd stats(4);
    stats << 5.0, 1.0, 2.0, 3.0;
    CHECK(pvalue_from_stats(stats, Alternative::Greater) == doctest::Approx(0.25));
    VectorXd low(4);
    low << -5.0, 1.0, 2.0, 3.0;
    CHECK(pvalue_from_stats(low, Alternative::Less) == doctest::Approx(0.25));
    VectorXd tied = VectorXd::Constant(6, 1.7);
    CHECK(pvalue_from_stats(tied, Alternative::Greater) == 1.0);
    CHECK(pvalue_from_stats(tied, Alternative::Less) == 1.0);
    VectorXd two(2);
    two << 1.0, 1.0;
    CHECK(pvalue_from_stats(two, Alternative::Greater) == 1.0);  // tie saturation
    CHECK_THROWS_AS(pvalue_from_stats(VectorXd::Ones(1), Alternative::Greater), InputError);
}

TEST_CASE("pvalue bounds: 1/w <= p <= 1 and determinism") {
    std::mt19937_64 gen(47);
    auto inst = oracle::random_gaussian_instance(20, 2, gen);
    auto ens = generate_flips(20, 100, 3);
    auto r1 = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                             Alternative::Greater, ens, true);
    auto r2 = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                             Alternative::Greater, ens, true);
    CHECK(r1.p_value >= 1.0 / 100);
    CHECK(r1.p_value <= 1.0);
    CHECK(r1.p_value == r2.p_value);
    CHECK(r1.stats == r2.stats);
}

TEST_CASE("sign_flip_test: exhaustive ensemble matches the enumeration oracle") {
    std::mt19937_64 gen(53);
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 6;
        auto inst = oracle::random_gaussian_instance(n, 2, gen);
        auto ens = generate_flips(n, 1 << n, 0);
        for (bool standardized : {false, true}) {
            auto res = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                                      Alternative::Greater, ens, standardized);
            auto null = fit_null(Family::gaussian(), inst.y, inst.design, 0.0);
            double expected =
                oracle::enumerated_pvalue(null, inst.design, inst.y, standardized, true);
            CHECK(res.p_value == expected);
        }
    }
}

TEST_CASE("sign_flip_test: ensemble size must match the design") {
    std::mt19937_64 gen(59);
    auto inst = oracle::random_gaussian_instance(15, 2, gen);
    auto ens = generate_flips(14, 50, 1);
    CHECK_THROWS_AS(sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                                   Alternative::Greater, ens, true),
                    InputError);
}

TEST_CASE("Monte-Carlo validity: rejection rate tracks alpha under the null") {
    const int reps = 2000, n = 30, w = 200;
    const double alpha = 0.05;
    std::mt19937_64 gen(61);
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto inst = oracle::random_gaussian_instance(n, 2, gen, /*beta=*/0.0);
        auto ens = generate_flips(n, w, 1000 + rep);
        auto res = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                                  Alternative::Greater, ens, true);
        if (res.p_value <= alpha) ++rejections;
    }
    double rate = double(rejections) / reps;
    CHECK(rate > 0.04);
    CHECK(rate < 0.06);
}

TEST_CASE("exchangeability: observed and flipped statistics share a distribution") {
    const int reps = 400, n = 40, w = 5;
    std::mt19937_64 gen(67);
    std::vector<double> observed, flipped;
    for (int rep = 0; rep < reps; ++rep) {
        auto inst = oracle::random_gaussian_instance(n, 2, gen, /*beta=*/0.3);
        auto ens = generate_flips(n, w, 2000 + rep);
        auto res = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.3,
                                  Alternative::Greater, ens, true);
        observed.push_back(res.stats[0]);
        flipped.push_back(res.stats[2]);
    }
    CHECK(oracle::ks_two_sample_pvalue(observed, flipped) > 0.01);
}

TEST_CASE("standardized and effective statistics rank the observation alike at large n") {
    // the per-flip variances agree asymptotically, so the two statistics
    // order the observed value identically once n is large
    const int datasets = 200, n = 400, w = 200;
    std::mt19937_64 gen(71);
    int agree = 0;
    for (int d = 0; d < datasets; ++d) {
        auto inst = oracle::random_gaussian_instance(n, 2, gen, 0.2);
        auto ens = generate_flips(n, w, 3000 + d);
        auto eff = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                                  Alternative::Greater, ens, false);
        auto std_ = sign_flip_test(Family::gaussian(), inst.y, inst.design, 0.0,
                                   Alternative::Greater, ens, true);
        if (eff.p_value == std_.p_value) ++agree;
    }
    CHECK(agree >= datasets * 99 / 100);
}

TEST_CASE("finite-sample monotonicity of effective p-values below the estimate") {
    std::mt19937_64 gen(73);
    for (int rep = 0; rep < 10; ++rep) {
        auto inst = oracle::random_gaussian_instance(30, 2, gen);
        auto full = fit_full(Family::gaussian(), inst.y, inst.design);
        auto ens = generate_flips(30, 128, 4000 + rep);
        double prev = -1.0;
        for (int k = 0; k < 12; ++k) {
            double beta0 = full.beta_hat - 1.2 + 0.1 * k;
            auto res = sign_flip_test(Family::gaussian(), inst.y, inst.design, beta0,
                                      Alternative::Greater, ens, false);
            CHECK(res.p_value >= prev);
            prev = res.p_value;
        }
    }
}
