// flipci: robust confidence intervals for a GLM coefficient by inverting
// sign-flip score tests, with Wald/sandwich baselines, a coverage simulation
// harness and a batch differential-expression pipeline.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flipci/baselines.hpp"
#include "flipci/ci_inversion.hpp"
#include "flipci/csv.hpp"
#include "flipci/deg_pipeline.hpp"
#include "flipci/errors.hpp"
#include "flipci/flip_engine.hpp"
#include "flipci/glm_fit.hpp"
#include "flipci/sim_harness.hpp"

namespace {

using namespace flipci;

struct LoadedData {
    Eigen::VectorXd y;
    DesignSplit design;
};

// Data CSV: header y,x[,z1..zp]; an all-ones intercept column is prepended
// to the nuisance block.
LoadedData load_data(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "y" || table.header[1] != "x")
        throw InputError("data header must start with y,x");
    const Eigen::Index n = Eigen::Index(table.rows.size());
    const Eigen::Index pz = Eigen::Index(table.header.size()) - 2;
    LoadedData data;
    data.y.resize(n);
    Eigen::VectorXd x(n);
    Eigen::MatrixXd Z(n, pz + 1);
    Z.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[std::size_t(i)];
        data.y[i] = parse_double_cell(row[0], std::size_t(i) + 2, 1);
        x[i] = parse_double_cell(row[1], std::size_t(i) + 2, 2);
        for (Eigen::Index j = 0; j < pz; ++j)
            Z(i, j + 1) = parse_double_cell(row[std::size_t(j) + 2], std::size_t(i) + 2,
                                            std::size_t(j) + 3);
    }
    data.design = DesignSplit::make(std::move(x), std::move(Z));
    return data;
}

std::string onoff(bool b) { return b ? "1" : "0"; }

void echo(std::ostream& os, const std::vector<std::string>& lines) {
    for (const auto& line : lines) os << "# " << line << "\n";
}

int cmd_test(const std::string& data_path, double beta0, const std::string& alternative,
             const std::string& family_name, double theta, int w, std::uint64_t seed,
             bool effective) {
    LoadedData data = load_data(data_path);
    Family family = Family::parse(family_name, theta);
    Alternative alt = alternative == "less" ? Alternative::Less : Alternative::Greater;
    if (alternative != "less" && alternative != "greater")
        throw InputError("alternative must be 'greater' or 'less'");

    FlipEnsemble ensemble = FlipEnsemble::generate(data.design.n(), w, seed);
    ScoreTestResult res =
        sign_flip_test(family, data.y, data.design, beta0, alt, ensemble, !effective);

    echo(std::cout, {"flipci test",
                     "data=" + data_path + " family=" + family.name() +
                         " beta0=" + fmt_double(beta0) + " alternative=" + alternative +
                         " w=" + std::to_string(w) + " seed=" + std::to_string(seed) +
                         " standardized=" + onoff(!effective)});
    std::cout << "beta0=" << fmt_double(beta0) << "\n"
              << "statistic=" << fmt_double(res.stats[0]) << "\n"
              << "p_value=" << fmt_double(res.p_value) << "\n";
    return 0;
}

int cmd_confint(const std::string& data_path, double level, const std::string& method_name_str,
                const std::string& family_name, double theta, int w, std::uint64_t seed,
                bool effective, double tol_fraction, int threads) {
    (void)threads;  // the two sides run sequentially; flips are already cheap
    LoadedData data = load_data(data_path);
    Family family = Family::parse(family_name, theta);
    CiMethod method = parse_method(method_name_str);

    ConfidenceInterval ci;
    if (method == CiMethod::Wald || method == CiMethod::Sandwich) {
        FullFit full = fit_full(family, data.y, data.design);
        ci = method == CiMethod::Wald
                 ? wald_interval(full, 1.0 - level)
                 : sandwich_interval(full, data.design, data.y, 1.0 - level);
    } else {
        CiConfig config;
        config.level = level;
        config.method = method;
        config.w = w;
        config.seed = seed;
        config.standardized = !effective;
        config.tol_fraction = tol_fraction;
        ci = confint(family, data.y, data.design, config);
    }

    echo(std::cout, {"flipci confint",
                     "data=" + data_path + " family=" + family.name() +
                         " level=" + fmt_double(level) + " method=" + method_name(method) +
                         " w=" + std::to_string(w) + " seed=" + std::to_string(seed) +
                         " standardized=" + onoff(!effective) +
                         " tolFraction=" + fmt_double(tol_fraction)});
    std::cout << "method=" << method_name(ci.method) << "\n"
              << "lower=" << fmt_double(ci.lower) << "\n"
              << "upper=" << fmt_double(ci.upper) << "\n"
              << "width=" << fmt_double(ci.width()) << "\n"
              << "p_evaluations=" << ci.p_evaluations << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_name_str, int N, int reps, double alpha, int w,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& replog_path, int threads, double hetero_lambda,
                 double negbin_theta) {
    Scenario scenario;
    scenario.id = parse_scenario(scenario_name_str);
    scenario.hetero_lambda = hetero_lambda;
    scenario.negbin_theta = negbin_theta;

    std::vector<RepResult> rep_log;
    Summary summary = run_scenario(scenario, N, reps, alpha, w, seed, threads,
                                   replog_path.empty() ? nullptr : &rep_log);

    std::vector<std::string> config_lines = {
        "flipci simulate",
        "scenario=" + scenario_name_str + " N=" + std::to_string(N) +
            " reps=" + std::to_string(reps) + " alpha=" + fmt_double(alpha) +
            " w=" + std::to_string(w) + " seed=" + std::to_string(seed) +
            " heteroLambda=" + fmt_double(hetero_lambda) +
            " negbinTheta=" + fmt_double(negbin_theta) +
            " nominalBand=(" + fmt_double(summary.nominal_band.first) + "," +
            fmt_double(summary.nominal_band.second) + ")"};

    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write '" + out_path + "'");
    echo(out, config_lines);
    out << summary_csv_header() << "\n";
    for (const auto& row : summary_csv_rows(summary)) out << row << "\n";
    out.close();

    if (!replog_path.empty()) {
        std::ofstream log(replog_path);
        if (!log) throw InputError("cannot write '" + replog_path + "'");
        echo(log, config_lines);
        log << "rep,method,lower,upper,covered,width\n";
        for (std::size_t r = 0; r < rep_log.size(); ++r) {
            for (std::size_t m = 0; m < kSimMethods.size(); ++m) {
                const auto& pm = rep_log[r].methods[m];
                log << r << "," << method_name(kSimMethods[m]) << "," << fmt_double(pm.lower)
                    << "," << fmt_double(pm.upper) << "," << (pm.covered ? 1 : 0) << ","
                    << fmt_double(pm.width) << "\n";
            }
        }
    }

    echo(std::cout, config_lines);
    std::cout << summary_csv_header() << "\n";
    for (const auto& row : summary_csv_rows(summary)) std::cout << row << "\n";
    return 0;
}

int cmd_deg(const std::string& counts_path, const std::string& covariates_path,
            const std::string& out_path, const std::string& summary_path, std::uint64_t seed,
            std::optional<double> theta, double level, int w, bool symmetric, int threads) {
    DegConfig config;
    config.level = level;
    config.w = w;
    config.seed = seed;
    config.theta = theta;
    config.include_symmetric = symmetric;
    config.threads = threads;

    std::vector<std::string> config_lines = {
        "flipci deg",
        "counts=" + counts_path + " covariates=" + covariates_path +
            " level=" + fmt_double(level) + " w=" + std::to_string(w) +
            " seed=" + std::to_string(seed) +
            " theta=" + (theta ? fmt_double(*theta) : std::string("auto")) +
            " symmetric=" + onoff(symmetric)};

    PipelineSummary summary =
        run_pipeline(counts_path, covariates_path, out_path, summary_path, config, config_lines);

    echo(std::cout, config_lines);
    std::cout << "genes_total=" << summary.genes_total << "\n"
              << "genes_ok=" << summary.genes_ok << "\n"
              << "genes_skipped=" << summary.genes_skipped << "\n";
    if (summary.skip_warning)
        std::cout << "warning=more than 20% of genes were skipped\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sign-flip score test confidence intervals for GLMs"};
    app.require_subcommand(1);

    std::string data_path, family_name = "gaussian", alternative = "greater";
    std::string method = "equitailed";
    std::string scenario = "lm-correct", out_path = "summary.csv", replog_path;
    std::string counts_path, covariates_path, results_path = "deg_results.csv",
                deg_summary_path = "deg_summary.csv";
    double beta0 = 0.0, level = 0.95, alpha = 0.05, theta = 1.0;
    double tol_fraction = 1.0 / 1024.0, hetero_lambda = 1.0, negbin_theta = 1.0;
    std::uint64_t seed = 1;
    int w = 1000, N = 50, reps = 1000, threads = 1;
    bool effective = false, symmetric = false;
    std::optional<double> deg_theta;

    auto* test = app.add_subcommand("test", "One sign-flip score test of beta = beta0");
    test->add_option("--data", data_path, "CSV with columns y,x[,z1..zp]")->required();
    test->add_option("--beta0", beta0, "Null value of the target coefficient");
    test->add_option("--alternative", alternative, "greater|less");
    test->add_option("--family", family_name, "gaussian|bernoulli|poisson|negbin");
    test->add_option("--theta", theta, "Negative binomial size parameter");
    test->add_option("--w", w, "Number of sign flips");
    test->add_option("--seed", seed, "RNG seed");
    test->add_flag("--effective", effective, "Use the unstandardized effective score");

    auto* ci = app.add_subcommand("confint", "Confidence interval for the target coefficient");
    ci->add_option("--data", data_path, "CSV with columns y,x[,z1..zp]")->required();
    ci->add_option("--level", level, "Confidence level");
    ci->add_option("--method", method, "equitailed|symmetric|wald|sandwich");
    ci->add_option("--family", family_name, "gaussian|bernoulli|poisson|negbin");
    ci->add_option("--theta", theta, "Negative binomial size parameter");
    ci->add_option("--w", w, "Number of sign flips");
    ci->add_option("--seed", seed, "RNG seed");
    ci->add_option("--tol-fraction", tol_fraction, "Bisection tolerance as a fraction of epsilon");
    ci->add_option("--threads", threads, "Worker thread bound");
    ci->add_flag("--effective", effective, "Use the unstandardized effective score");

    auto* sim = app.add_subcommand("simulate", "Coverage study over repeated datasets");
    sim->add_option("--scenario", scenario,
                    "lm-correct|logit-correct|pois-correct|negbin-as-pois|hetero-target|"
                    "hetero-nuisance");
    sim->add_option("--N", N, "Observations per replication");
    sim->add_option("--reps", reps, "Number of replications");
    sim->add_option("--alpha", alpha, "1 - confidence level");
    sim->add_option("--w", w, "Number of sign flips");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out_path, "Summary CSV path");
    sim->add_option("--replog", replog_path, "Optional per-replication CSV path");
    sim->add_option("--threads", threads, "Worker thread bound");
    sim->add_option("--hetero-lambda", hetero_lambda, "Heteroskedasticity strength");
    sim->add_option("--negbin-theta", negbin_theta, "Generator size for negbin-as-pois");

    auto* deg = app.add_subcommand("deg", "Per-gene differential-expression intervals");
    deg->add_option("--counts", counts_path, "Expression CSV (gene_id,<samples...>)")->required();
    deg->add_option("--covariates", covariates_path, "Covariates CSV")->required();
    deg->add_option("--out", results_path, "Per-gene results CSV path");
    deg->add_option("--summary", deg_summary_path, "Summary CSV path");
    deg->add_option("--seed", seed, "RNG seed");
    deg->add_option("--theta", deg_theta, "Fixed negbin size (default: per-gene moments)");
    deg->add_option("--level", level, "Confidence level");
    deg->add_option("--w", w, "Number of sign flips");
    deg->add_flag("--symmetric", symmetric, "Also compute symmetric flip intervals");
    deg->add_option("--threads", threads, "Worker thread bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (test->parsed())
            return cmd_test(data_path, beta0, alternative, family_name, theta, w, seed, effective);
        if (ci->parsed())
            return cmd_confint(data_path, level, method, family_name, theta, w, seed, effective,
                               tol_fraction, threads);
        if (sim->parsed())
            return cmd_simulate(scenario, N, reps, alpha, w, seed, out_path, replog_path, threads,
                                hetero_lambda, negbin_theta);
        if (deg->parsed())
            return cmd_deg(counts_path, covariates_path, results_path, deg_summary_path, seed,
                           deg_theta, level, w, symmetric, threads);
    } catch (const flipci::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const flipci::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
