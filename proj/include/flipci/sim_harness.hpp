#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flipci/baselines.hpp"
#include "flipci/ci_inversion.hpp"
#include "flipci/design.hpp"
#include "flipci/family.hpp"

namespace flipci {

enum class ScenarioId {
    LmCorrect,
    LogitCorrect,
    PoisCorrect,
    NegbinAsPois,
    HeteroTarget,
    HeteroNuisance,
};

std::string scenario_name(ScenarioId id);
ScenarioId parse_scenario(const std::string& name);
std::vector<std::string> scenario_names();

// One data-generating configuration. The coefficient and covariate values
// default to the logistic-example design reused across every setting; the
// misspecification strengths are config-exposed, not canonical.
struct Scenario {
    ScenarioId id = ScenarioId::LmCorrect;
    double true_beta = 0.0;
    double true_gamma = -0.5;
    double covariate_correlation = 0.2;
    double hetero_lambda = 1.0;  // hetero-* only
    double negbin_theta = 1.0;   // negbin-as-pois only

    // Family used to FIT the data (the misspecified settings fit gaussian
    // or poisson regardless of the generator).
    Family fit_family() const;
};

struct SimDataset {
    Eigen::VectorXd y;
    Eigen::VectorXd x;
    Eigen::MatrixXd Z;  // [intercept, z]

    DesignSplit design() const { return DesignSplit::make(x, Z); }
};

SimDataset generate_dataset(const Scenario& scenario, int N, std::uint64_t seed);

inline constexpr std::array<CiMethod, 4> kSimMethods = {
    CiMethod::FlipEquitailed, CiMethod::FlipSymmetric, CiMethod::Wald, CiMethod::Sandwich};

struct RepResult {
    struct PerMethod {
        bool covered = false;
        double width = 0.0;  // +inf allowed
        double lower = 0.0;
        double upper = 0.0;
    };
    std::array<PerMethod, 4> methods;  // indexed like kSimMethods
};

struct MethodSummary {
    double coverage = 0.0;      // over successful replications
    double median_width = 0.0;  // over finite widths; NaN when none
    int inf_count = 0;
};

struct Summary {
    ScenarioId scenario = ScenarioId::LmCorrect;
    int N = 0;
    int reps = 0;
    std::array<MethodSummary, 4> methods;
    int failures = 0;
    std::pair<double, double> nominal_band;
};

// (1-alpha) -/+ z_{0.975} * sqrt((1-alpha) * alpha / reps).
std::pair<double, double> nominal_band(int reps, double alpha);

Summary run_scenario(const Scenario& scenario, int N, int reps, double alpha, int w,
                     std::uint64_t seed, int threads = 1,
                     std::vector<RepResult>* rep_log = nullptr);

std::string summary_csv_header();
std::vector<std::string> summary_csv_rows(const Summary& summary);

struct MonotonicityResult {
    double beta_hat = 0.0;
    std::vector<CurvePoint> curve;
    int violations = 0;  // adjacent decreases along the ascending grid
};

// p-value curve on an equispaced grid over [beta_hat - 1, beta_hat] for one
// simulated dataset; the default logistic/standardized setting reproduces
// the monotone/non-monotone contrast, the gaussian effective variant is
// exactly monotone.
MonotonicityResult monotonicity_experiment(int n, std::uint64_t seed, int grid_size,
                                           const Family& family = Family::bernoulli(),
                                           bool standardized = true, int w = 200);

}  // namespace flipci
