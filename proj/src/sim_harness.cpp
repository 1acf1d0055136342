#include "flipci/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "flipci/csv.hpp"
#include "flipci/errors.hpp"
#include "flipci/glm_fit.hpp"
#include "flipci/parallel.hpp"
#include "flipci/rng.hpp"

namespace flipci {

std::string scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::LmCorrect: return "lm-correct";
        case ScenarioId::LogitCorrect: return "logit-correct";
        case ScenarioId::PoisCorrect: return "pois-correct";
        case ScenarioId::NegbinAsPois: return "negbin-as-pois";
        case ScenarioId::HeteroTarget: return "hetero-target";
        case ScenarioId::HeteroNuisance: return "hetero-nuisance";
    }
    return "lm-correct";
}

std::vector<std::string> scenario_names() {
    return {"lm-correct",     "logit-correct", "pois-correct",
            "negbin-as-pois", "hetero-target", "hetero-nuisance"};
}

ScenarioId parse_scenario(const std::string& name) {
    for (ScenarioId id :
         {ScenarioId::LmCorrect, ScenarioId::LogitCorrect, ScenarioId::PoisCorrect,
          ScenarioId::NegbinAsPois, ScenarioId::HeteroTarget, ScenarioId::HeteroNuisance}) {
        if (scenario_name(id) == name) return id;
    }
    std::string valid;
    for (const auto& s : scenario_names()) valid += " " + s;
    throw InputError("unknown scenario '" + name + "'; valid ids:" + valid);
}

Family Scenario::fit_family() const {
    switch (id) {
        case ScenarioId::LmCorrect:
        case ScenarioId::HeteroTarget:
        case ScenarioId::HeteroNuisance:
            return Family::gaussian();
        case ScenarioId::LogitCorrect:
            return Family::bernoulli();
        case ScenarioId::PoisCorrect:
        case ScenarioId::NegbinAsPois:
            return Family::poisson();
    }
    return Family::gaussian();
}

SimDataset generate_dataset(const Scenario& scenario, int N, std::uint64_t seed) {
    if (N < 10) throw InputError("need N >= 10");
    if (!(std::abs(scenario.covariate_correlation) < 1.0))
        throw InputError("|covariate correlation| must be < 1");

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::chi_squared_distribution<double> chi4(4.0);

    const double rho = scenario.covariate_correlation;
    const double rho_c = std::sqrt(1.0 - rho * rho);
    // hetero-nuisance draws the covariate pair on a shared chi^2_4 scale
    // (elliptical t_4, same correlation, unit variances): with a gaussian
    // pair the projected target is independent of z, so a z-driven error
    // variance would leave the target's classical interval untouched and
    // the setting would not discriminate the methods.
    const bool shared_scale = scenario.id == ScenarioId::HeteroNuisance;

    SimDataset data;
    data.x.resize(N);
    data.Z.resize(N, 2);
    data.y.resize(N);
    Eigen::VectorXd eta(N);
    for (int i = 0; i < N; ++i) {
        double g1 = norm(gen);
        double g2 = norm(gen);
        if (shared_scale) {
            double s = std::sqrt(chi4(gen) / 4.0) * std::sqrt(2.0);
            g1 /= s;
            g2 /= s;
        }
        data.x[i] = g1;
        double z = rho * g1 + rho_c * g2;
        data.Z(i, 0) = 1.0;
        data.Z(i, 1) = z;
        eta[i] = scenario.true_beta * data.x[i] + scenario.true_gamma * z;
    }

    switch (scenario.id) {
        case ScenarioId::LmCorrect:
            for (int i = 0; i < N; ++i) data.y[i] = eta[i] + norm(gen);
            break;
        case ScenarioId::LogitCorrect: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int i = 0; i < N; ++i)
                data.y[i] = unif(gen) < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;
            break;
        }
        case ScenarioId::PoisCorrect:
            for (int i = 0; i < N; ++i) {
                std::poisson_distribution<long> pois(std::exp(eta[i]));
                data.y[i] = double(pois(gen));
            }
            break;
        case ScenarioId::NegbinAsPois:
            // Gamma-Poisson mixture with size theta and mean exp(eta).
            for (int i = 0; i < N; ++i) {
                std::gamma_distribution<double> gamma(scenario.negbin_theta,
                                                      std::exp(eta[i]) / scenario.negbin_theta);
                std::poisson_distribution<long> pois(std::max(gamma(gen), 1e-12));
                data.y[i] = double(pois(gen));
            }
            break;
        case ScenarioId::HeteroTarget:
            for (int i = 0; i < N; ++i)
                data.y[i] = eta[i] + std::exp(scenario.hetero_lambda * data.x[i]) * norm(gen);
            break;
        case ScenarioId::HeteroNuisance:
            for (int i = 0; i < N; ++i)
                data.y[i] = eta[i] + std::exp(scenario.hetero_lambda * data.Z(i, 1)) * norm(gen);
            break;
    }
    return data;
}

std::pair<double, double> nominal_band(int reps, double alpha) {
    if (reps < 1) throw InputError("reps must be >= 1");
    double level = 1.0 - alpha;
    double half = std_normal_quantile(0.975) * std::sqrt(level * alpha / double(reps));
    return {level - half, level + half};
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

RepResult run_replication(const Scenario& scenario, int N, double alpha, int w,
                          std::uint64_t rep_seed) {
    SimDataset data = generate_dataset(scenario, N, derive_seed(rep_seed, "data"));
    DesignSplit design = data.design();
    Family family = scenario.fit_family();

    CiConfig config;
    config.level = 1.0 - alpha;
    config.w = w;
    config.seed = derive_seed(rep_seed, "flips");

    FullFit full = fit_full(family, data.y, design);

    RepResult rep;
    for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
        ConfidenceInterval ci;
        switch (kSimMethods[m]) {
            case CiMethod::FlipEquitailed:
                config.method = CiMethod::FlipEquitailed;
                ci = confint(family, data.y, design, config);
                break;
            case CiMethod::FlipSymmetric:
                config.method = CiMethod::FlipSymmetric;
                ci = confint(family, data.y, design, config);
                break;
            case CiMethod::Wald:
                ci = wald_interval(full, alpha);
                break;
            case CiMethod::Sandwich:
                ci = sandwich_interval(full, design, data.y, alpha);
                break;
        }
        rep.methods[m].covered = ci.contains(scenario.true_beta);
        rep.methods[m].width = ci.width();
        rep.methods[m].lower = ci.lower;
        rep.methods[m].upper = ci.upper;
    }
    return rep;
}

}  // namespace

Summary run_scenario(const Scenario& scenario, int N, int reps, double alpha, int w,
                     std::uint64_t seed, int threads, std::vector<RepResult>* rep_log) {
    if (reps < 1) throw InputError("reps must be >= 1");

    std::vector<std::optional<RepResult>> results(reps);
    parallel_for(reps, threads, [&](int r) {
        try {
            results[r] = run_replication(scenario, N, alpha, w, derive_seed(seed, unsigned(r)));
        } catch (const Error&) {
            results[r] = std::nullopt;  // counted as a failure below
        }
    });

    Summary summary;
    summary.scenario = scenario.id;
    summary.N = N;
    summary.reps = reps;
    summary.nominal_band = nominal_band(reps, alpha);

    int failures = 0;
    std::array<int, 4> covered{};
    std::array<int, 4> inf_count{};
    std::array<std::vector<double>, 4> widths;
    int successes = 0;
    for (const auto& opt : results) {
        if (!opt) {
            ++failures;
            continue;
        }
        ++successes;
        for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
            const auto& pm = opt->methods[m];
            covered[m] += pm.covered;
            if (std::isfinite(pm.width))
                widths[m].push_back(pm.width);
            else
                ++inf_count[m];
        }
        if (rep_log) rep_log->push_back(*opt);
    }
    summary.failures = failures;
    if (failures > reps / 100)
        throw NumericalError("more than 1% of replications failed (" + std::to_string(failures) +
                             "/" + std::to_string(reps) + ")");
    for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
        summary.methods[m].coverage = successes ? double(covered[m]) / double(successes) : 0.0;
        summary.methods[m].median_width = median(widths[m]);
        summary.methods[m].inf_count = inf_count[m];
    }
    return summary;
}

std::string summary_csv_header() {
    return "scenario,N,method,coverage,medianWidth,infCount,failures";
}

std::vector<std::string> summary_csv_rows(const Summary& summary) {
    std::vector<std::string> rows;
    for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
        rows.push_back(scenario_name(summary.scenario) + "," + std::to_string(summary.N) + "," +
                       method_name(kSimMethods[m]) + "," +
                       fmt_double(summary.methods[m].coverage) + "," +
                       fmt_double(summary.methods[m].median_width) + "," +
                       std::to_string(summary.methods[m].inf_count) + "," +
                       std::to_string(summary.failures));
    }
    return rows;
}

MonotonicityResult monotonicity_experiment(int n, std::uint64_t seed, int grid_size,
                                           const Family& family, bool standardized, int w) {
    if (n < 10) throw InputError("need n >= 10");
    if (grid_size < 2) throw InputError("grid_size must be >= 2");

    Scenario scenario;
    scenario.id = family.kind == FamilyKind::GaussianIdentity ? ScenarioId::LmCorrect
                                                              : ScenarioId::LogitCorrect;
    SimDataset data = generate_dataset(scenario, n, derive_seed(seed, "data"));
    DesignSplit design = data.design();

    FullFit full = fit_full(family, data.y, design);
    FlipEnsemble ensemble =
        FlipEnsemble::generate(n, w, derive_seed(seed, "ensemble"));

    std::vector<double> grid(grid_size);
    for (int k = 0; k < grid_size; ++k)
        grid[k] = full.beta_hat - 1.0 + double(k) / double(grid_size - 1);

    MonotonicityResult res;
    res.beta_hat = full.beta_hat;
    res.curve = pvalue_curve(family, data.y, design, grid, Alternative::Greater, ensemble,
                             standardized);
    for (std::size_t k = 1; k < res.curve.size(); ++k) {
        double prev = res.curve[k - 1].p;
        double cur = res.curve[k].p;
        if (!std::isnan(prev) && !std::isnan(cur) && cur < prev) ++res.violations;
    }
    return res;
}

}  // namespace flipci
