#pragma once

#include <Eigen/Dense>
#include <string>

namespace flipci {

enum class FamilyKind {
    GaussianIdentity,
    BernoulliLogit,
    PoissonLog,
    NegbinLog,
};

enum class DispersionShape {
    Fixed,        // phi = 1 (bernoulli, poisson)
    Estimated,    // Pearson estimate (gaussian)
    NegbinTheta,  // phi = 1, overdispersion carried by theta in v(mu)
};

// Distribution/link bundle. Mean, variance and dmu/deta functions for the
// four supported exponential-dispersion families, all with canonical links.
// The linear predictor is clamped to [-30, 30] before exponentiation so
// extreme offsets degrade to saturated fits instead of overflowing.
struct Family {
    FamilyKind kind = FamilyKind::GaussianIdentity;
    DispersionShape dispersion_shape = DispersionShape::Estimated;
    double theta = 1.0;  // negative binomial size parameter; ignored otherwise

    static Family gaussian();
    static Family bernoulli();
    static Family poisson();
    static Family negbin(double theta);

    static constexpr double kEtaClamp = 30.0;

    double clamp_eta(double eta) const;
    double inverse_link(double eta) const;  // applied to clamped eta
    double link(double mu) const;
    double mean_derivative(double eta) const;  // dmu/deta at clamped eta
    double variance(double mu) const;          // v(mu), unit dispersion

    // Deviance of the fit, used as the IRLS convergence criterion.
    double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const;

    // Starting means for IRLS.
    Eigen::VectorXd initial_mu(const Eigen::VectorXd& y) const;

    // Throws InputError when y is outside the family support.
    void check_support(const Eigen::VectorXd& y) const;

    bool fixed_dispersion() const { return dispersion_shape != DispersionShape::Estimated; }

    std::string name() const;
    static Family parse(const std::string& name, double theta = 1.0);
};

struct WorkingQuantities {
    Eigen::VectorXd mu;      // inverse-link(eta)
    Eigen::VectorXd d_diag;  // dmu/deta
    Eigen::VectorXd v_diag;  // v(mu) * dispersion
    Eigen::VectorXd w_diag;  // d^2 / v
    int clamped = 0;         // count of eta entries hit by the overflow guard
};

WorkingQuantities working_quantities(const Family& family, const Eigen::VectorXd& eta,
                                     double dispersion);

}  // namespace flipci
