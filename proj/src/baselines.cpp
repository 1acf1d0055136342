#include "flipci/baselines.hpp"

#include <cmath>

#include "flipci/errors.hpp"

namespace flipci {

std::string method_name(CiMethod method) {
    switch (method) {
        case CiMethod::FlipEquitailed: return "flip-equitailed";
        case CiMethod::FlipSymmetric: return "flip-symmetric";
        case CiMethod::Wald: return "wald";
        case CiMethod::Sandwich: return "sandwich";
    }
    return "wald";
}

CiMethod parse_method(const std::string& name) {
    if (name == "equitailed" || name == "flip-equitailed") return CiMethod::FlipEquitailed;
    if (name == "symmetric" || name == "flip-symmetric") return CiMethod::FlipSymmetric;
    if (name == "wald") return CiMethod::Wald;
    if (name == "sandwich") return CiMethod::Sandwich;
    throw InputError("unknown interval method '" + name + "'");
}

bool ConfidenceInterval::finite() const {
    return std::isfinite(lower) && std::isfinite(upper);
}

double std_normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw InputError("quantile argument must be in (0, 1)");

    // Acklam's rational approximation, then one Newton step against the
    // erfc-based CDF to push the error to machine level.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (q < plow) {
        double u = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (q <= 1.0 - plow) {
        double u = q - 0.5;
        double t = u * u;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    } else {
        double u = std::sqrt(-2.0 * std::log(1.0 - q));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }

    static const double inv_sqrt2 = 0.7071067811865475244;
    static const double inv_sqrt2pi = 0.3989422804014326779;
    double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x -= (cdf - q) / pdf;
    return x;
}

ConfidenceInterval wald_interval(const FullFit& fit, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha must be in (0, 1]");
    double z = (alpha == 1.0) ? 0.0 : std_normal_quantile(1.0 - alpha / 2.0);
    ConfidenceInterval ci;
    ci.lower = fit.beta_hat - z * fit.se_model;
    ci.upper = fit.beta_hat + z * fit.se_model;
    ci.level = 1.0 - alpha;
    ci.method = CiMethod::Wald;
    return ci;
}

CovarianceEstimate sandwich_se(const FullFit& fit, const DesignSplit& design,
                               const Eigen::VectorXd& y, bool small_sample) {
    const Eigen::Index n = design.n();
    const Eigen::Index k = design.p() + 1;
    Eigen::MatrixXd X(n, k);
    X.col(0) = design.x;
    X.rightCols(design.p()) = design.Z;

    // A = X' W X; B = sum_i s_i^2 x_i x_i' with s_i = (d_i / v_i)(y_i - mu_i).
    // The scalar dispersion in W and s cancels in A^{-1} B A^{-1}.
    Eigen::MatrixXd A = X.transpose() * fit.w_diag.asDiagonal() * X;
    Eigen::VectorXd s = fit.d_diag.array() / fit.v_diag.array() * (y - fit.mu_hat).array();
    Eigen::MatrixXd Xs = s.asDiagonal() * X;
    Eigen::MatrixXd B = Xs.transpose() * Xs;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw NumericalError("sandwich covariance: information matrix is singular");
    Eigen::MatrixXd cov = lu.solve(lu.solve(B).transpose());

    CovarianceEstimate est;
    est.kind = small_sample ? CovarianceKind::SandwichHc1 : CovarianceKind::SandwichHc0;
    est.se_beta = std::sqrt(cov(0, 0));
    if (small_sample) est.se_beta *= std::sqrt(double(n) / double(n - k));
    return est;
}

ConfidenceInterval sandwich_interval(const FullFit& fit, const DesignSplit& design,
                                     const Eigen::VectorXd& y, double alpha,
                                     bool small_sample) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha must be in (0, 1]");
    CovarianceEstimate est = sandwich_se(fit, design, y, small_sample);
    double z = (alpha == 1.0) ? 0.0 : std_normal_quantile(1.0 - alpha / 2.0);
    ConfidenceInterval ci;
    ci.lower = fit.beta_hat - z * est.se_beta;
    ci.upper = fit.beta_hat + z * est.se_beta;
    ci.level = 1.0 - alpha;
    ci.method = CiMethod::Sandwich;
    return ci;
}

}  // namespace flipci
