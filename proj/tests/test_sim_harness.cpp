#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flipci/errors.hpp"
#include "flipci/sim_harness.hpp"

using namespace flipci;

TEST_CASE("scenario ids round-trip and unknown ids fail") {
    for (const auto& name : scenario_names()) CHECK(scenario_name(parse_scenario(name)) == name);
    CHECK_THROWS_AS(parse_scenario("bogus"), InputError);
}

TEST_CASE("generate_dataset: covariate correlation matches the target law") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    auto data = generate_dataset(sc, 100000, 42);
    double mx = data.x.mean();
    double mz = data.Z.col(1).mean();
    double sx = std::sqrt((data.x.array() - mx).square().mean());
    double sz = std::sqrt((data.Z.col(1).array() - mz).square().mean());
    double corr = ((data.x.array() - mx) * (data.Z.col(1).array() - mz)).mean() / (sx * sz);
    CHECK(corr == doctest::Approx(0.2).scale(1.0).epsilon(0.01));
    CHECK(sx == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sz == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("generate_dataset: negbin with huge theta is poisson-like") {
    Scenario sc;
    sc.id = ScenarioId::NegbinAsPois;
    sc.negbin_theta = 1e8;
    auto data = generate_dataset(sc, 100000, 7);
    double m = data.y.mean();
    double v = (data.y.array() - m).square().mean();
    // dispersion index of the mixture (mean ~ exp(-0.5 z)) stays near the
    // poisson value; compare against the poisson generator itself
    Scenario pois;
    pois.id = ScenarioId::PoisCorrect;
    auto pdata = generate_dataset(pois, 100000, 7);
    double pm = pdata.y.mean();
    double pv = (pdata.y.array() - pm).square().mean();
    CHECK(v / m == doctest::Approx(pv / pm).epsilon(0.05));
}

TEST_CASE("generate_dataset: hetero-target with lambda=0 collapses to lm-correct") {
    Scenario hetero;
    hetero.id = ScenarioId::HeteroTarget;
    hetero.hetero_lambda = 0.0;
    Scenario lm;
    lm.id = ScenarioId::LmCorrect;
    auto a = generate_dataset(hetero, 500, 99);
    auto b = generate_dataset(lm, 500, 99);
    CHECK(a.y == b.y);
    CHECK(a.x == b.x);
}

TEST_CASE("generate_dataset: hetero-nuisance covariates keep the 0.2 correlation") {
    Scenario sc;
    sc.id = ScenarioId::HeteroNuisance;
    auto data = generate_dataset(sc, 200000, 13);
    double mx = data.x.mean(), mz = data.Z.col(1).mean();
    double sx = std::sqrt((data.x.array() - mx).square().mean());
    double sz = std::sqrt((data.Z.col(1).array() - mz).square().mean());
    double corr = ((data.x.array() - mx) * (data.Z.col(1).array() - mz)).mean() / (sx * sz);
    CHECK(corr == doctest::Approx(0.2).scale(1.0).epsilon(0.02));
    CHECK(sx == doctest::Approx(1.0).epsilon(0.05));
    // heavier tails than the gaussian pair (shared scale)
    double kurt = (data.x.array() - mx).pow(4).mean() / (sx * sx * sx * sx);
    CHECK(kurt > 3.5);
}

TEST_CASE("generate_dataset: bernoulli responses are binary, counts integral") {
    Scenario sc;
    sc.id = ScenarioId::LogitCorrect;
    auto data = generate_dataset(sc, 200, 5);
    for (int i = 0; i < 200; ++i) CHECK((data.y[i] == 0.0 || data.y[i] == 1.0));
    sc.id = ScenarioId::PoisCorrect;
    auto counts = generate_dataset(sc, 200, 5);
    for (int i = 0; i < 200; ++i) {
        CHECK(counts.y[i] >= 0.0);
        CHECK(counts.y[i] == std::floor(counts.y[i]));
    }
}

TEST_CASE("nominal_band: the 1000-rep band at alpha=0.05") {
    auto band = nominal_band(1000, 0.05);
    CHECK(band.first == doctest::Approx(0.9365).epsilon(5e-5));
    CHECK(band.second == doctest::Approx(0.9635).epsilon(5e-5));
}

TEST_CASE("run_scenario: single replication gives a valid aggregate") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    auto summary = run_scenario(sc, 40, 1, 0.05, 100, 3);
    CHECK(summary.reps == 1);
    CHECK(summary.failures == 0);
    for (const auto& m : summary.methods) {
        CHECK((m.coverage == 0.0 || m.coverage == 1.0));
    }
}

TEST_CASE("run_scenario: determinism and coverage/width bookkeeping") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    std::vector<RepResult> log_a, log_b;
    auto a = run_scenario(sc, 30, 40, 0.05, 120, 11, 1, &log_a);
    auto b = run_scenario(sc, 30, 40, 0.05, 120, 11, 1, &log_b);
    for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
        CHECK(a.methods[m].coverage == b.methods[m].coverage);
        CHECK(a.methods[m].median_width == b.methods[m].median_width);
        CHECK(a.methods[m].inf_count == b.methods[m].inf_count);
    }
    REQUIRE(log_a.size() == 40);
    for (std::size_t r = 0; r < log_a.size(); ++r) {
        for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
            const auto& pm = log_a[r].methods[m];
            CHECK(pm.width >= 0.0);
            CHECK(pm.covered == (pm.lower <= 0.0 && 0.0 <= pm.upper));
            CHECK(pm.lower == log_b[r].methods[m].lower);
        }
    }
}

TEST_CASE("run_scenario: parallel run matches the serial one") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    auto serial = run_scenario(sc, 25, 16, 0.05, 80, 21, 1);
    auto parallel = run_scenario(sc, 25, 16, 0.05, 80, 21, 4);
    for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
        CHECK(serial.methods[m].coverage == parallel.methods[m].coverage);
        CHECK(serial.methods[m].median_width == parallel.methods[m].median_width);
    }
}

TEST_CASE("run_scenario: wald narrower than flip-equitailed when the model is right") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    auto summary = run_scenario(sc, 40, 60, 0.05, 200, 31);
    CHECK(summary.methods[2].median_width <= summary.methods[0].median_width);  // wald vs flip-eq
}

TEST_CASE("summary CSV rows carry the documented schema") {
    Scenario sc;
    sc.id = ScenarioId::LmCorrect;
    auto summary = run_scenario(sc, 25, 5, 0.05, 60, 41);
    CHECK(summary_csv_header() == "scenario,N,method,coverage,medianWidth,infCount,failures");
    auto rows = summary_csv_rows(summary);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("lm-correct,25,flip-equitailed,", 0) == 0);
    CHECK(rows[2].rfind("lm-correct,25,wald,", 0) == 0);
}

TEST_CASE("monotonicity_experiment: logistic n=50 is typically monotone") {
    auto res = monotonicity_experiment(50, 12345, 20);
    REQUIRE(res.curve.size() == 20);
    CHECK(res.violations == 0);
    // the curve lives on [beta_hat - 1, beta_hat]
    CHECK(res.curve.front().beta0 == doctest::Approx(res.beta_hat - 1.0));
    CHECK(res.curve.back().beta0 == doctest::Approx(res.beta_hat));
}

TEST_CASE("monotonicity_experiment: gaussian effective curves are exactly monotone") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        auto res = monotonicity_experiment(30, seed, 25, Family::gaussian(), false, 150);
        CHECK(res.violations == 0);
    }
}
