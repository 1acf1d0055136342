#pragma once

#include <Eigen/Dense>

namespace flipci {

// Covariates split into the scalar target x and the nuisance block Z
// (first column all-ones intercept by convention). An optional fixed offset
// is carried for pipelines that supply one (e.g. log library sizes); it is
// zero by default and additive to every linear predictor.
struct DesignSplit {
    Eigen::VectorXd x;
    Eigen::MatrixXd Z;
    Eigen::VectorXd offset;

    Eigen::Index n() const { return x.size(); }
    Eigen::Index p() const { return Z.cols(); }

    // Validates dimensions, Z column rank (relative tolerance 1e-10) and
    // that x is not in the column span of Z. Throws InputError.
    static DesignSplit make(Eigen::VectorXd x, Eigen::MatrixXd Z,
                            Eigen::VectorXd offset = Eigen::VectorXd());
};

}  // namespace flipci
