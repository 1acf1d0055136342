#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "flipci/design.hpp"
#include "flipci/family.hpp"
#include "flipci/glm_fit.hpp"

namespace flipci {

// Shared set of sign-flip vectors. Row 0 is always the identity flip so the
// first statistic is the observed one. Rows are drawn from a counter-based
// generator, so the same (n, w, seed) regenerates bit-identically; when
// w == 2^n all sign vectors are enumerated in lexicographic order instead.
class FlipEnsemble {
public:
    static FlipEnsemble generate(Eigen::Index n, Eigen::Index w, std::uint64_t seed);

    Eigen::Index n() const { return flips_.cols(); }
    Eigen::Index w() const { return flips_.rows(); }
    std::uint64_t seed() const { return seed_; }
    bool exhaustive() const { return exhaustive_; }

    // Row g as a vector of +1/-1 entries.
    Eigen::VectorXd row(Eigen::Index g) const { return flips_.row(g).transpose(); }
    const Eigen::MatrixXd& matrix() const { return flips_; }

private:
    Eigen::MatrixXd flips_;  // w x n, entries in {-1, +1}
    std::uint64_t seed_ = 0;
    bool exhaustive_ = false;
};

enum class Alternative { Greater, Less };

struct ScoreTestResult {
    double beta0 = 0.0;
    Alternative alternative = Alternative::Greater;
    bool standardized = true;
    Eigen::VectorXd stats;  // stats[0] is the observed statistic
    double p_value = 1.0;
};

// Per-fit quantities shared by every flip: with b = (I-H) W^{1/2} x and
// r = V^{-1/2} (y - mu), the flipped effective score is n^{-1/2} b' F r and
// its variance is n^{-1} (b'b - |Q' F b|^2), where Q spans W^{1/2} Z. The
// hat matrix is never formed.
class ScoreContext {
public:
    ScoreContext(const NullFit& fit, const DesignSplit& design, const Eigen::VectorXd& y);

    double effective(const Eigen::VectorXd& flip) const;
    // Throws ZeroVarianceError below the 1e-14 floor.
    double variance(const Eigen::VectorXd& flip) const;
    double standardized(const Eigen::VectorXd& flip) const;

private:
    Eigen::VectorXd proj_x_;   // b
    Eigen::VectorXd resid_;    // r
    Eigen::VectorXd br_;       // b .* r
    Eigen::MatrixXd q_basis_;  // thin Q of W^{1/2} Z
    double bb_ = 0.0;          // b'b, flip-invariant
    double inv_sqrt_n_ = 0.0;
};

FlipEnsemble generate_flips(Eigen::Index n, Eigen::Index w, std::uint64_t seed);

double effective_score(const NullFit& fit, const DesignSplit& design, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& flip);

double flip_variance(const NullFit& fit, const DesignSplit& design, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& flip);

// Tie-inclusive tail count: greater -> #{stats[g] >= stats[0]} / w,
// less -> #{stats[g] <= stats[0]} / w. Consistent with rejecting when the
// observed statistic exceeds the (1-alpha) order statistic, and never below 1/w.
double pvalue_from_stats(const Eigen::VectorXd& stats, Alternative alternative);

// Fits the null model once, evaluates the statistic under every flip in the
// ensemble, and returns the one-sided p-value.
ScoreTestResult sign_flip_test(const Family& family, const Eigen::VectorXd& y,
                               const DesignSplit& design, double beta0,
                               Alternative alternative, const FlipEnsemble& ensemble,
                               bool standardized = true);

}  // namespace flipci
