#include "flipci/family.hpp"

#include <algorithm>
#include <cmath>

#include "flipci/errors.hpp"

namespace flipci {

Family Family::gaussian() { return {FamilyKind::GaussianIdentity, DispersionShape::Estimated, 1.0}; }
Family Family::bernoulli() { return {FamilyKind::BernoulliLogit, DispersionShape::Fixed, 1.0}; }
Family Family::poisson() { return {FamilyKind::PoissonLog, DispersionShape::Fixed, 1.0}; }

Family Family::negbin(double theta) {
    if (!(theta > 0.0)) throw InputError("negbin theta must be positive");
    return {FamilyKind::NegbinLog, DispersionShape::NegbinTheta, theta};
}

double Family::clamp_eta(double eta) const {
    if (kind == FamilyKind::GaussianIdentity) return eta;
    return std::clamp(eta, -kEtaClamp, kEtaClamp);
}

double Family::inverse_link(double eta) const {
    eta = clamp_eta(eta);
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            return eta;
        case FamilyKind::BernoulliLogit:
            return 1.0 / (1.0 + std::exp(-eta));
        case FamilyKind::PoissonLog:
        case FamilyKind::NegbinLog:
            return std::exp(eta);
    }
    return eta;
}

double Family::link(double mu) const {
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            return mu;
        case FamilyKind::BernoulliLogit:
            return std::log(mu / (1.0 - mu));
        case FamilyKind::PoissonLog:
        case FamilyKind::NegbinLog:
            return std::log(mu);
    }
    return mu;
}

double Family::mean_derivative(double eta) const {
    eta = clamp_eta(eta);
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            return 1.0;
        case FamilyKind::BernoulliLogit: {
            double mu = 1.0 / (1.0 + std::exp(-eta));
            return mu * (1.0 - mu);
        }
        case FamilyKind::PoissonLog:
        case FamilyKind::NegbinLog:
            return std::exp(eta);
    }
    return 1.0;
}

double Family::variance(double mu) const {
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            return 1.0;
        case FamilyKind::BernoulliLogit:
            return mu * (1.0 - mu);
        case FamilyKind::PoissonLog:
            return mu;
        case FamilyKind::NegbinLog:
            return mu + mu * mu / theta;
    }
    return 1.0;
}

namespace {
inline double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }
}  // namespace

double Family::deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const {
    const auto n = y.size();
    double dev = 0.0;
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            for (Eigen::Index i = 0; i < n; ++i) {
                double r = y[i] - mu[i];
                dev += r * r;
            }
            break;
        case FamilyKind::BernoulliLogit:
            for (Eigen::Index i = 0; i < n; ++i) {
                dev += 2.0 * (xlogy(y[i], y[i] / mu[i]) +
                              xlogy(1.0 - y[i], (1.0 - y[i]) / (1.0 - mu[i])));
            }
            break;
        case FamilyKind::PoissonLog:
            for (Eigen::Index i = 0; i < n; ++i) {
                dev += 2.0 * (xlogy(y[i], y[i] / mu[i]) - (y[i] - mu[i]));
            }
            break;
        case FamilyKind::NegbinLog:
            for (Eigen::Index i = 0; i < n; ++i) {
                dev += 2.0 * (xlogy(y[i], y[i] / mu[i]) -
                              (y[i] + theta) * std::log((y[i] + theta) / (mu[i] + theta)));
            }
            break;
    }
    return dev;
}

Eigen::VectorXd Family::initial_mu(const Eigen::VectorXd& y) const {
    switch (kind) {
        case FamilyKind::GaussianIdentity:
            return y;
        case FamilyKind::BernoulliLogit:
            return (y.array() + 0.5) / 2.0;
        case FamilyKind::PoissonLog:
        case FamilyKind::NegbinLog:
            return y.array() + 0.1;
    }
    return y;
}

void Family::check_support(const Eigen::VectorXd& y) const {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) throw InputError("response contains a non-finite value");
        switch (kind) {
            case FamilyKind::GaussianIdentity:
                break;
            case FamilyKind::BernoulliLogit:
                if (y[i] != 0.0 && y[i] != 1.0)
                    throw InputError("bernoulli response must be 0 or 1");
                break;
            case FamilyKind::PoissonLog:
            case FamilyKind::NegbinLog:
                if (y[i] < 0.0 || y[i] != std::floor(y[i]))
                    throw InputError("count response must be a non-negative integer");
                break;
        }
    }
}

std::string Family::name() const {
    switch (kind) {
        case FamilyKind::GaussianIdentity: return "gaussian";
        case FamilyKind::BernoulliLogit: return "bernoulli";
        case FamilyKind::PoissonLog: return "poisson";
        case FamilyKind::NegbinLog: return "negbin";
    }
    return "gaussian";
}

Family Family::parse(const std::string& name, double theta) {
    if (name == "gaussian" || name == "gaussian-identity") return gaussian();
    if (name == "bernoulli" || name == "bernoulli-logit" || name == "binomial") return bernoulli();
    if (name == "poisson" || name == "poisson-log") return poisson();
    if (name == "negbin" || name == "negbin-log" || name == "nb") return negbin(theta);
    throw InputError("unknown family '" + name + "'");
}

WorkingQuantities working_quantities(const Family& family, const Eigen::VectorXd& eta,
                                     double dispersion) {
    const auto n = eta.size();
    WorkingQuantities q;
    q.mu.resize(n);
    q.d_diag.resize(n);
    q.v_diag.resize(n);
    q.w_diag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(eta[i])) throw NumericalError("non-finite linear predictor");
        if (family.clamp_eta(eta[i]) != eta[i]) ++q.clamped;
        q.mu[i] = family.inverse_link(eta[i]);
        q.d_diag[i] = family.mean_derivative(eta[i]);
        q.v_diag[i] = family.variance(q.mu[i]) * dispersion;
        q.w_diag[i] = q.d_diag[i] * q.d_diag[i] / q.v_diag[i];
    }
    return q;
}

}  // namespace flipci
