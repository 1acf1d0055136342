#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flipci/baselines.hpp"
#include "flipci/ci_inversion.hpp"

namespace flipci {

struct ExpressionMatrix {
    std::vector<std::string> gene_ids;
    std::vector<std::string> sample_ids;
    Eigen::MatrixXd counts;  // genes x samples, non-negative integers
};

// CSV with header `gene_id,<sample1>,...` and integer cells.
ExpressionMatrix load_expression(const std::string& path);

struct SampleCovariates {
    std::vector<std::string> sample_ids;
    Eigen::VectorXd stage;   // binary: 1 = advanced pathological stage
    Eigen::VectorXd gender;  // binary
    Eigen::VectorXd age;     // years
    std::optional<Eigen::VectorXd> log_offset;
};

// CSV with header `sample_id,stage,gender,age[,log_offset]`.
SampleCovariates load_covariates(const std::string& path);

// Reorders covariate rows to match the expression sample columns; every
// sample must appear exactly once.
SampleCovariates align_covariates(const SampleCovariates& cov,
                                  const std::vector<std::string>& sample_ids);

struct DegConfig {
    double level = 0.95;
    int w = 1000;
    std::uint64_t seed = 1;
    std::optional<double> theta;  // fixed negbin size; method-of-moments per gene when absent
    bool include_symmetric = false;
    double tol_fraction = 1.0 / 1024.0;
    int threads = 1;
};

enum class GeneModel { Poisson, Negbin };
std::string gene_model_name(GeneModel model);

struct GeneResult {
    std::string gene_id;
    std::string status = "ok";  // ok | skipped(<reason>)
    // Present entries only for fitted model/method combinations.
    std::map<std::pair<GeneModel, CiMethod>, ConfidenceInterval> intervals;
    // Cross-model stability per method; absent when either interval is
    // infinite or a model was skipped.
    std::map<CiMethod, std::optional<double>> overlaps;
    double theta_used = 0.0;
};

// Interval overlap of Eq-style 2*max(0, min(U) - max(L)) / (widthA + widthB);
// nullopt when either interval is infinite. Two identical zero-width
// intervals count as 1.
std::optional<double> overlap(const ConfidenceInterval& a, const ConfidenceInterval& b);

GeneResult analyze_gene(const std::string& gene_id, const Eigen::VectorXd& counts,
                        const SampleCovariates& covariates, const DegConfig& config);

struct PipelineSummary {
    int genes_total = 0;
    int genes_ok = 0;
    int genes_skipped = 0;
    bool skip_warning = false;  // more than 20% of genes skipped
    std::vector<GeneResult> results;
};

// Runs the per-gene analysis over the whole matrix and writes the results
// and summary CSVs. Deterministic for a fixed (inputs, config) pair.
PipelineSummary run_pipeline(const std::string& expression_path,
                             const std::string& covariates_path,
                             const std::string& results_path, const std::string& summary_path,
                             const DegConfig& config,
                             const std::vector<std::string>& echo_lines = {});

}  // namespace flipci
