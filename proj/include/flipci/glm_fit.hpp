#pragma once

#include <Eigen/Dense>

#include "flipci/design.hpp"
#include "flipci/family.hpp"

namespace flipci {

// Null model: nuisance coefficients fitted with the target effect fixed at
// beta0 via an offset. Diagonal quantities are evaluated at the converged
// fit and include the estimated dispersion (w = d^2 / v).
struct NullFit {
    double beta0 = 0.0;
    Eigen::VectorXd gamma_hat;
    Eigen::VectorXd eta_hat;
    Eigen::VectorXd mu_hat;
    Eigen::VectorXd d_diag;
    Eigen::VectorXd v_diag;
    Eigen::VectorXd w_diag;
    double dispersion_hat = 1.0;
    bool converged = false;
    int iterations = 0;
};

// Joint fit of (beta, gamma); carries the model-based standard error of
// beta_hat from the inverse Fisher information.
struct FullFit {
    double beta_hat = 0.0;
    Eigen::VectorXd gamma_hat;
    double se_model = 0.0;
    Eigen::VectorXd eta_hat;
    Eigen::VectorXd mu_hat;
    Eigen::VectorXd d_diag;
    Eigen::VectorXd v_diag;
    Eigen::VectorXd w_diag;
    double dispersion_hat = 1.0;
    bool converged = false;
    int iterations = 0;
};

inline constexpr int kIrlsMaxIter = 50;
inline constexpr double kIrlsTol = 1e-8;  // relative deviance change

FullFit fit_full(const Family& family, const Eigen::VectorXd& y, const DesignSplit& design,
                 int max_iter = kIrlsMaxIter, double tol = kIrlsTol);

NullFit fit_null(const Family& family, const Eigen::VectorXd& y, const DesignSplit& design,
                 double beta0, int max_iter = kIrlsMaxIter, double tol = kIrlsTol);

// Pearson dispersion for gaussian fits; 1 for the fixed-dispersion families.
double estimate_dispersion(const Family& family, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu_hat, double residual_dof);

}  // namespace flipci
