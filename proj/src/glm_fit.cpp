#include "flipci/glm_fit.hpp"

#include <cmath>
#include <sstream>

#include "flipci/errors.hpp"

namespace flipci {

namespace {

struct IrlsResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd eta;  // includes the offset
    Eigen::VectorXd mu;
    bool converged = false;
    int iterations = 0;
};

// IRLS for y ~ X with a fixed additive offset. Weights use unit dispersion;
// a scalar dispersion does not move the weighted least-squares optimum.
IrlsResult irls(const Family& family, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& offset, int max_iter, double tol) {
    const Eigen::Index n = y.size();
    const Eigen::Index k = X.cols();

    IrlsResult res;
    res.mu = family.initial_mu(y);
    res.eta.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) res.eta[i] = family.link(res.mu[i]);
    res.coef = Eigen::VectorXd::Zero(k);

    double dev = family.deviance(y, res.mu);
    for (int iter = 1; iter <= max_iter; ++iter) {
        WorkingQuantities wq = working_quantities(family, res.eta, 1.0);
        Eigen::VectorXd sqrt_w = wq.w_diag.array().sqrt();
        // working response: z = (eta - offset) + (y - mu) / d
        Eigen::VectorXd z = (res.eta - offset).array() +
                            (y - wq.mu).array() / wq.d_diag.array();

        Eigen::MatrixXd Xw = sqrt_w.asDiagonal() * X;
        Eigen::VectorXd zw = sqrt_w.array() * z.array();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
        qr.setThreshold(1e-12);
        Eigen::VectorXd coef = qr.solve(zw);
        if (!coef.allFinite()) throw NumericalError("IRLS produced non-finite coefficients");

        res.coef = coef;
        res.eta = X * coef + offset;
        for (Eigen::Index i = 0; i < n; ++i) res.mu[i] = family.inverse_link(res.eta[i]);

        double dev_new = family.deviance(y, res.mu);
        double rel = std::abs(dev_new - dev) / (0.1 + std::abs(dev_new));
        dev = dev_new;
        res.iterations = iter;
        if (iter >= 2 && rel < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// Saturation means the linear predictor hit the overflow clamp, i.e. the
// fitted mean is numerically at a support boundary.
bool all_saturated(const Family& family, const Eigen::VectorXd& eta) {
    switch (family.kind) {
        case FamilyKind::GaussianIdentity:
            return false;
        case FamilyKind::BernoulliLogit:
            return (eta.array().abs() >= Family::kEtaClamp).all();
        case FamilyKind::PoissonLog:
        case FamilyKind::NegbinLog:
            return (eta.array() <= -Family::kEtaClamp).all();
    }
    return false;
}

bool any_saturated(const Eigen::VectorXd& eta) {
    return (eta.array().abs() >= Family::kEtaClamp).any();
}

void check_termination(const Family& family, const IrlsResult& res, const char* what) {
    if (res.converged) return;
    if (family.kind == FamilyKind::BernoulliLogit && any_saturated(res.eta)) {
        throw DegenerateModelError(std::string(what) +
                                   ": separation detected (diverging coefficients with "
                                   "saturated fitted probabilities)");
    }
    std::ostringstream msg;
    msg << what << ": IRLS did not converge in " << res.iterations
        << " iterations; last coefficients:";
    for (Eigen::Index j = 0; j < res.coef.size(); ++j) msg << ' ' << res.coef[j];
    throw NonConvergenceError(msg.str(), res.iterations);
}

double floored_dispersion(const Family& family, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& mu, double dof) {
    return std::max(estimate_dispersion(family, y, mu, dof), 1e-12);
}

}  // namespace

double estimate_dispersion(const Family& family, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu_hat, double residual_dof) {
    if (residual_dof < 1.0) throw InputError("residual dof must be >= 1");
    if (family.dispersion_shape != DispersionShape::Estimated) return 1.0;
    double pearson = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double r = y[i] - mu_hat[i];
        pearson += r * r / family.variance(mu_hat[i]);
    }
    return pearson / residual_dof;
}

FullFit fit_full(const Family& family, const Eigen::VectorXd& y, const DesignSplit& design,
                 int max_iter, double tol) {
    family.check_support(y);
    if (y.size() != design.n()) throw InputError("y length differs from design");

    const Eigen::Index n = design.n();
    const Eigen::Index p = design.p();
    Eigen::MatrixXd X(n, p + 1);
    X.col(0) = design.x;
    X.rightCols(p) = design.Z;

    IrlsResult res = irls(family, y, X, design.offset, max_iter, tol);
    check_termination(family, res, "fit_full");

    FullFit fit;
    fit.beta_hat = res.coef[0];
    fit.gamma_hat = res.coef.tail(p);
    fit.eta_hat = res.eta;
    fit.mu_hat = res.mu;
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    fit.dispersion_hat = floored_dispersion(family, y, res.mu, double(n - p - 1));

    WorkingQuantities wq = working_quantities(family, res.eta, fit.dispersion_hat);
    fit.d_diag = wq.d_diag;
    fit.v_diag = wq.v_diag;
    fit.w_diag = wq.w_diag;

    // se(beta) = sqrt(phi * [(X' Wu X)^{-1}]_bb) with unit-dispersion weights,
    // via the triangular factor of the weighted QR.
    WorkingQuantities wu = working_quantities(family, res.eta, 1.0);
    Eigen::VectorXd sqrt_w = wu.w_diag.array().sqrt();
    Eigen::MatrixXd Xw = sqrt_w.asDiagonal() * X;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    qr.setThreshold(1e-12);
    if (qr.rank() < p + 1) throw NumericalError("fit_full: weighted design is singular");
    Eigen::VectorXd e0 = qr.colsPermutation().transpose() * Eigen::VectorXd::Unit(p + 1, 0);
    Eigen::VectorXd u = qr.matrixR()
                            .topLeftCorner(p + 1, p + 1)
                            .triangularView<Eigen::Upper>()
                            .transpose()
                            .solve(e0);
    fit.se_model = std::sqrt(fit.dispersion_hat * u.squaredNorm());
    return fit;
}

NullFit fit_null(const Family& family, const Eigen::VectorXd& y, const DesignSplit& design,
                 double beta0, int max_iter, double tol) {
    family.check_support(y);
    if (y.size() != design.n()) throw InputError("y length differs from design");
    if (!std::isfinite(beta0)) throw InputError("beta0 must be finite");

    const Eigen::Index n = design.n();
    const Eigen::Index p = design.p();
    Eigen::VectorXd offset = design.offset + beta0 * design.x;

    IrlsResult res = irls(family, y, design.Z, offset, max_iter, tol);
    check_termination(family, res, "fit_null");
    if (all_saturated(family, res.eta))
        throw DegenerateModelError("fit_null: offset pushes every fitted mean to a support boundary");

    NullFit fit;
    fit.beta0 = beta0;
    fit.gamma_hat = res.coef;
    fit.eta_hat = res.eta;
    fit.mu_hat = res.mu;
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    fit.dispersion_hat = floored_dispersion(family, y, res.mu, double(n - p));

    WorkingQuantities wq = working_quantities(family, res.eta, fit.dispersion_hat);
    fit.d_diag = wq.d_diag;
    fit.v_diag = wq.v_diag;
    fit.w_diag = wq.w_diag;
    return fit;
}

}  // namespace flipci
