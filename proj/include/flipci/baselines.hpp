#pragma once

#include <Eigen/Dense>
#include <string>

#include "flipci/design.hpp"
#include "flipci/glm_fit.hpp"

namespace flipci {

enum class Side { Lower, Upper };

enum class CiMethod { FlipEquitailed, FlipSymmetric, Wald, Sandwich };

std::string method_name(CiMethod method);
CiMethod parse_method(const std::string& name);

struct ConfidenceInterval {
    double lower = 0.0;  // -inf allowed
    double upper = 0.0;  // +inf allowed
    double level = 0.95;
    CiMethod method = CiMethod::Wald;
    long p_evaluations = 0;

    double width() const { return upper - lower; }
    bool finite() const;
    bool contains(double value) const { return lower <= value && value <= upper; }
};

enum class CovarianceKind { Model, SandwichHc0, SandwichHc1 };

struct CovarianceEstimate {
    CovarianceKind kind = CovarianceKind::Model;
    double se_beta = 0.0;
};

// Inverse standard normal CDF; absolute error below 1e-8 across (1e-10, 1-1e-10).
double std_normal_quantile(double q);

ConfidenceInterval wald_interval(const FullFit& fit, double alpha);

// Robust covariance A^{-1} B A^{-1} with A the full-model Fisher information
// and B the outer-product sum of per-observation score contributions.
CovarianceEstimate sandwich_se(const FullFit& fit, const DesignSplit& design,
                               const Eigen::VectorXd& y, bool small_sample);

ConfidenceInterval sandwich_interval(const FullFit& fit, const DesignSplit& design,
                                     const Eigen::VectorXd& y, double alpha,
                                     bool small_sample = false);

}  // namespace flipci
