#include "flipci/design.hpp"

#include <cmath>

#include "flipci/errors.hpp"

namespace flipci {

DesignSplit DesignSplit::make(Eigen::VectorXd x, Eigen::MatrixXd Z, Eigen::VectorXd offset) {
    const Eigen::Index n = x.size();
    const Eigen::Index p = Z.cols();
    if (n == 0 || p == 0) throw InputError("empty design");
    if (Z.rows() != n) throw InputError("x and Z row counts differ");
    if (offset.size() == 0) offset = Eigen::VectorXd::Zero(n);
    if (offset.size() != n) throw InputError("offset length differs from n");
    if (n <= p + 1) throw InputError("need n > p + 1 observations");
    if (!x.allFinite() || !Z.allFinite() || !offset.allFinite())
        throw InputError("design contains non-finite values");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw InputError("nuisance matrix Z is rank deficient");

    // x must carry information beyond Z, otherwise beta is unidentified.
    Eigen::VectorXd fitted = qr.solve(x);
    double resid = (x - Z * fitted).norm();
    if (resid <= 1e-10 * std::max(1.0, x.norm()))
        throw InputError("target covariate x lies in the column span of Z");

    return DesignSplit{std::move(x), std::move(Z), std::move(offset)};
}

}  // namespace flipci
