#include "flipci/deg_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "flipci/csv.hpp"
#include "flipci/errors.hpp"
#include "flipci/glm_fit.hpp"
#include "flipci/parallel.hpp"
#include "flipci/rng.hpp"

namespace flipci {

std::string gene_model_name(GeneModel model) {
    return model == GeneModel::Poisson ? "poisson" : "negbin";
}

ExpressionMatrix load_expression(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() < 2)
        throw InputError("expression file needs a gene_id column and at least one sample");

    ExpressionMatrix expr;
    expr.sample_ids.assign(table.header.begin() + 1, table.header.end());
    const std::size_t n_samples = expr.sample_ids.size();
    expr.counts.resize(Eigen::Index(table.rows.size()), Eigen::Index(n_samples));

    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (!seen.insert(row[0]).second)
            throw InputError("duplicate gene id '" + row[0] + "'");
        expr.gene_ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c)
            expr.counts(Eigen::Index(r), Eigen::Index(c - 1)) =
                double(parse_count_cell(row[c], r + 2, c + 1));
    }
    return expr;
}

SampleCovariates load_covariates(const std::string& path) {
    CsvTable table = read_csv(path);
    const auto& h = table.header;
    bool has_offset = h.size() == 5 && h[4] == "log_offset";
    if (!((h.size() == 4 || has_offset) && h[0] == "sample_id" && h[1] == "stage" &&
          h[2] == "gender" && h[3] == "age"))
        throw InputError("covariates header must be sample_id,stage,gender,age[,log_offset]");

    const Eigen::Index n = Eigen::Index(table.rows.size());
    SampleCovariates cov;
    cov.stage.resize(n);
    cov.gender.resize(n);
    cov.age.resize(n);
    if (has_offset) cov.log_offset = Eigen::VectorXd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[std::size_t(i)];
        cov.sample_ids.push_back(row[0]);
        cov.stage[i] = parse_double_cell(row[1], std::size_t(i) + 2, 2);
        cov.gender[i] = parse_double_cell(row[2], std::size_t(i) + 2, 3);
        cov.age[i] = parse_double_cell(row[3], std::size_t(i) + 2, 4);
        if (has_offset) (*cov.log_offset)[i] = parse_double_cell(row[4], std::size_t(i) + 2, 5);
        if (cov.stage[i] != 0.0 && cov.stage[i] != 1.0)
            throw InputError("stage must be 0 or 1 (sample '" + row[0] + "')");
        if (cov.gender[i] != 0.0 && cov.gender[i] != 1.0)
            throw InputError("gender must be 0 or 1 (sample '" + row[0] + "')");
    }
    return cov;
}

SampleCovariates align_covariates(const SampleCovariates& cov,
                                  const std::vector<std::string>& sample_ids) {
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t i = 0; i < cov.sample_ids.size(); ++i) {
        if (!index.emplace(cov.sample_ids[i], Eigen::Index(i)).second)
            throw InputError("duplicate sample id '" + cov.sample_ids[i] + "' in covariates");
    }

    const Eigen::Index n = Eigen::Index(sample_ids.size());
    SampleCovariates out;
    out.stage.resize(n);
    out.gender.resize(n);
    out.age.resize(n);
    if (cov.log_offset) out.log_offset = Eigen::VectorXd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto it = index.find(sample_ids[std::size_t(i)]);
        if (it == index.end())
            throw InputError("sample '" + sample_ids[std::size_t(i)] + "' missing from covariates");
        out.sample_ids.push_back(sample_ids[std::size_t(i)]);
        out.stage[i] = cov.stage[it->second];
        out.gender[i] = cov.gender[it->second];
        out.age[i] = cov.age[it->second];
        if (cov.log_offset) (*out.log_offset)[i] = (*cov.log_offset)[it->second];
    }
    return out;
}

std::optional<double> overlap(const ConfidenceInterval& a, const ConfidenceInterval& b) {
    if (!a.finite() || !b.finite()) return std::nullopt;
    double inter = std::min(a.upper, b.upper) - std::max(a.lower, b.lower);
    double denom = (a.upper - a.lower) + (b.upper - b.lower);
    if (denom == 0.0) return (a.lower == b.lower && a.upper == b.upper) ? 1.0 : 0.0;
    return 2.0 * std::max(0.0, inter) / denom;
}

namespace {

double moment_theta(const Eigen::VectorXd& counts) {
    const double n = double(counts.size());
    double mean = counts.mean();
    double var = (counts.array() - mean).square().sum() / (n - 1.0);
    if (var <= mean || mean <= 0.0) return 1e8;  // no overdispersion signal
    return std::clamp(mean * mean / (var - mean), 1e-2, 1e8);
}

DesignSplit gene_design(const SampleCovariates& cov) {
    const Eigen::Index n = cov.stage.size();
    double age_mean = cov.age.mean();
    double age_sd = std::sqrt((cov.age.array() - age_mean).square().sum() / double(n - 1));
    Eigen::MatrixXd Z(n, 3);
    Z.col(0).setOnes();
    Z.col(1) = cov.gender;
    if (age_sd > 1e-12)
        Z.col(2) = (cov.age.array() - age_mean) / age_sd;
    else
        Z.col(2).setZero();
    Eigen::VectorXd offset =
        cov.log_offset ? *cov.log_offset : Eigen::VectorXd::Zero(n);
    return DesignSplit::make(cov.stage, Z, offset);
}

}  // namespace

GeneResult analyze_gene(const std::string& gene_id, const Eigen::VectorXd& counts,
                        const SampleCovariates& covariates, const DegConfig& config) {
    const Eigen::Index n = counts.size();
    if (n != covariates.stage.size())
        throw InputError("gene '" + gene_id + "': counts and covariates lengths differ");
    int n0 = int((covariates.stage.array() == 0.0).count());
    int n1 = int(n) - n0;
    if (n0 < 10 || n1 < 10) throw InputError("need at least 10 samples per stage group");

    GeneResult result;
    result.gene_id = gene_id;
    if ((counts.array() == 0.0).all()) {
        result.status = "skipped(all-zero)";
        return result;
    }

    DesignSplit design = gene_design(covariates);
    result.theta_used = config.theta ? *config.theta : moment_theta(counts);

    CiConfig ci_config;
    ci_config.level = config.level;
    ci_config.w = config.w;
    ci_config.seed = derive_seed(config.seed, gene_id);
    ci_config.tol_fraction = config.tol_fraction;

    for (GeneModel model : {GeneModel::Poisson, GeneModel::Negbin}) {
        Family family = model == GeneModel::Poisson ? Family::poisson()
                                                    : Family::negbin(result.theta_used);
        try {
            FullFit full = fit_full(family, counts, design);
            ci_config.method = CiMethod::FlipEquitailed;
            result.intervals[{model, CiMethod::FlipEquitailed}] =
                confint(family, counts, design, ci_config);
            if (config.include_symmetric) {
                ci_config.method = CiMethod::FlipSymmetric;
                result.intervals[{model, CiMethod::FlipSymmetric}] =
                    confint(family, counts, design, ci_config);
            }
            result.intervals[{model, CiMethod::Wald}] = wald_interval(full, 1.0 - config.level);
            result.intervals[{model, CiMethod::Sandwich}] =
                sandwich_interval(full, design, counts, 1.0 - config.level);
        } catch (const Error&) {
            result.status = "skipped(fit-failure:" + gene_model_name(model) + ")";
        }
    }

    if (result.status == "ok") {
        std::vector<CiMethod> methods = {CiMethod::FlipEquitailed, CiMethod::Wald,
                                         CiMethod::Sandwich};
        if (config.include_symmetric) methods.insert(methods.begin() + 1, CiMethod::FlipSymmetric);
        for (CiMethod method : methods) {
            result.overlaps[method] = overlap(result.intervals.at({GeneModel::Poisson, method}),
                                              result.intervals.at({GeneModel::Negbin, method}));
        }
    }
    return result;
}

namespace {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    double h = q * double(v.size() - 1);
    std::size_t lo = std::size_t(std::floor(h));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

std::string quantile_row(const std::string& metric, const std::string& model,
                         const std::string& method, const std::vector<double>& values) {
    std::string row = metric + "," + model + "," + method;
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) row += "," + fmt_double(quantile(values, q));
    double mean = values.empty()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    row += "," + fmt_double(mean) + "," + std::to_string(values.size());
    return row;
}

}  // namespace

PipelineSummary run_pipeline(const std::string& expression_path,
                             const std::string& covariates_path, const std::string& results_path,
                             const std::string& summary_path, const DegConfig& config,
                             const std::vector<std::string>& echo_lines) {
    ExpressionMatrix expr = load_expression(expression_path);
    SampleCovariates cov = align_covariates(load_covariates(covariates_path), expr.sample_ids);

    const int n_genes = int(expr.gene_ids.size());
    if (n_genes > 0) {
        int n0 = int((cov.stage.array() == 0.0).count());
        int n1 = int(cov.stage.size()) - n0;
        if (n0 < 10 || n1 < 10) throw InputError("need at least 10 samples per stage group");
    }

    PipelineSummary summary;
    summary.genes_total = n_genes;
    summary.results.resize(n_genes);
    parallel_for(n_genes, config.threads, [&](int g) {
        summary.results[g] = analyze_gene(expr.gene_ids[std::size_t(g)],
                                          expr.counts.row(g).transpose(), cov, config);
    });
    for (const auto& r : summary.results) {
        if (r.status == "ok")
            ++summary.genes_ok;
        else
            ++summary.genes_skipped;
    }
    summary.skip_warning = n_genes > 0 && summary.genes_skipped * 5 > n_genes;

    std::vector<CiMethod> methods = {CiMethod::FlipEquitailed, CiMethod::Wald,
                                     CiMethod::Sandwich};
    if (config.include_symmetric) methods.insert(methods.begin() + 1, CiMethod::FlipSymmetric);

    // --- results CSV: interval rows then overlap rows, in input gene order.
    std::ofstream out(results_path);
    if (!out) throw InputError("cannot write results file '" + results_path + "'");
    for (const auto& line : echo_lines) out << "# " << line << "\n";
    out << "gene_id,model,method,lower,upper,width,status\n";
    for (const auto& r : summary.results) {
        for (GeneModel model : {GeneModel::Poisson, GeneModel::Negbin}) {
            for (CiMethod method : methods) {
                auto it = r.intervals.find({model, method});
                out << r.gene_id << "," << gene_model_name(model) << "," << method_name(method);
                if (it != r.intervals.end()) {
                    out << "," << fmt_double(it->second.lower) << ","
                        << fmt_double(it->second.upper) << "," << fmt_double(it->second.width())
                        << ",ok\n";
                } else {
                    out << ",,,," << r.status << "\n";
                }
            }
        }
        for (CiMethod method : methods) {
            auto it = r.overlaps.find(method);
            out << r.gene_id << ",overlap," << method_name(method) << ",,,";
            if (it != r.overlaps.end() && it->second)
                out << fmt_double(*it->second) << ",ok\n";
            else
                out << "," << (r.status == "ok" ? "undefined" : r.status) << "\n";
        }
    }
    out.close();

    // --- summary CSV: amplitude and overlap quantiles plus log-ratio means.
    std::ofstream sum(summary_path);
    if (!sum) throw InputError("cannot write summary file '" + summary_path + "'");
    for (const auto& line : echo_lines) sum << "# " << line << "\n";
    sum << "metric,model,method,q10,q25,q50,q75,q90,mean,count\n";
    for (GeneModel model : {GeneModel::Poisson, GeneModel::Negbin}) {
        for (CiMethod method : methods) {
            std::vector<double> widths;
            for (const auto& r : summary.results) {
                auto it = r.intervals.find({model, method});
                if (it != r.intervals.end() && it->second.finite())
                    widths.push_back(it->second.width());
            }
            sum << quantile_row("amplitude", gene_model_name(model), method_name(method), widths)
                << "\n";
        }
    }
    for (CiMethod method : methods) {
        std::vector<double> overlaps;
        for (const auto& r : summary.results) {
            auto it = r.overlaps.find(method);
            if (it != r.overlaps.end() && it->second) overlaps.push_back(*it->second);
        }
        sum << quantile_row("overlap", "", method_name(method), overlaps) << "\n";
    }
    for (GeneModel model : {GeneModel::Poisson, GeneModel::Negbin}) {
        std::vector<double> log_ratios;
        for (const auto& r : summary.results) {
            auto flip = r.intervals.find({model, CiMethod::FlipEquitailed});
            auto sand = r.intervals.find({model, CiMethod::Sandwich});
            if (flip != r.intervals.end() && sand != r.intervals.end() &&
                flip->second.finite() && sand->second.finite() && sand->second.width() > 0.0)
                log_ratios.push_back(std::log(flip->second.width() / sand->second.width()));
        }
        double mean = log_ratios.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : std::accumulate(log_ratios.begin(), log_ratios.end(),
                                                           0.0) /
                                               double(log_ratios.size());
        sum << "log_ratio_flip_sandwich," << gene_model_name(model) << ",," << ",,,,,"
            << fmt_double(mean) << "," << log_ratios.size() << "\n";
    }
    sum << "genes_total,,,,,,,,," << summary.genes_total << "\n";
    sum << "genes_ok,,,,,,,,," << summary.genes_ok << "\n";
    sum << "genes_skipped,,,,,,,,," << summary.genes_skipped << "\n";
    sum << "skip_warning,,,,,,,,," << (summary.skip_warning ? 1 : 0) << "\n";
    return summary;
}

}  // namespace flipci
