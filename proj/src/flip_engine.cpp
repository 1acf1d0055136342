#include "flipci/flip_engine.hpp"

#include <cmath>

#include "flipci/errors.hpp"
#include "flipci/rng.hpp"

namespace flipci {

FlipEnsemble FlipEnsemble::generate(Eigen::Index n, Eigen::Index w, std::uint64_t seed) {
    if (n < 1) throw InputError("flip ensemble needs n >= 1");
    if (w < 2) throw InputError("flip ensemble needs w >= 2");
    bool exhaustive = false;
    if (n < 63) {
        const std::uint64_t total = std::uint64_t{1} << n;
        if (std::uint64_t(w) > total)
            throw InputError("flip count w exceeds the 2^n possible sign vectors");
        exhaustive = (std::uint64_t(w) == total);
    }

    FlipEnsemble ens;
    ens.seed_ = seed;
    ens.exhaustive_ = exhaustive;
    ens.flips_.resize(w, n);
    if (exhaustive) {
        // Lexicographic enumeration with +1 ordered before -1; row 0 is all +1.
        for (Eigen::Index g = 0; g < w; ++g)
            for (Eigen::Index i = 0; i < n; ++i)
                ens.flips_(g, i) = ((std::uint64_t(g) >> (n - 1 - i)) & 1u) ? -1.0 : 1.0;
    } else {
        ens.flips_.row(0).setOnes();
        for (Eigen::Index g = 1; g < w; ++g)
            for (Eigen::Index i = 0; i < n; ++i)
                ens.flips_(g, i) = flip_sign(seed, std::uint64_t(g), std::uint64_t(i));
    }
    return ens;
}

FlipEnsemble generate_flips(Eigen::Index n, Eigen::Index w, std::uint64_t seed) {
    return FlipEnsemble::generate(n, w, seed);
}

namespace {
void check_flip(const Eigen::VectorXd& flip, Eigen::Index n) {
    if (flip.size() != n) throw InputError("flip vector length differs from n");
    for (Eigen::Index i = 0; i < n; ++i)
        if (flip[i] != 1.0 && flip[i] != -1.0)
            throw InputError("flip entries must be +1 or -1");
}
}  // namespace

ScoreContext::ScoreContext(const NullFit& fit, const DesignSplit& design,
                           const Eigen::VectorXd& y) {
    const Eigen::Index n = design.n();
    if (fit.eta_hat.size() != n || y.size() != n)
        throw InputError("fit, design and y dimensions disagree");

    Eigen::VectorXd sqrt_w = fit.w_diag.array().sqrt();
    Eigen::MatrixXd Zw = sqrt_w.asDiagonal() * design.Z;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Zw);
    q_basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, design.p());

    Eigen::VectorXd wx = sqrt_w.array() * design.x.array();
    proj_x_ = wx - q_basis_ * (q_basis_.transpose() * wx);
    resid_ = (y - fit.mu_hat).array() / fit.v_diag.array().sqrt();
    br_ = proj_x_.array() * resid_.array();
    bb_ = proj_x_.squaredNorm();
    inv_sqrt_n_ = 1.0 / std::sqrt(double(n));
}

double ScoreContext::effective(const Eigen::VectorXd& flip) const {
    return inv_sqrt_n_ * br_.dot(flip);
}

double ScoreContext::variance(const Eigen::VectorXd& flip) const {
    Eigen::VectorXd d = flip.array() * proj_x_.array();
    double v = (bb_ - (q_basis_.transpose() * d).squaredNorm()) / double(proj_x_.size());
    if (v < 1e-14)
        throw ZeroVarianceError("flip variance below 1e-14: statistic undefined "
                                "(degenerate design or offset)");
    return v;
}

double ScoreContext::standardized(const Eigen::VectorXd& flip) const {
    return effective(flip) / std::sqrt(variance(flip));
}

double effective_score(const NullFit& fit, const DesignSplit& design, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& flip) {
    check_flip(flip, design.n());
    return ScoreContext(fit, design, y).effective(flip);
}

double flip_variance(const NullFit& fit, const DesignSplit& design, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& flip) {
    check_flip(flip, design.n());
    return ScoreContext(fit, design, y).variance(flip);
}

double pvalue_from_stats(const Eigen::VectorXd& stats, Alternative alternative) {
    const Eigen::Index w = stats.size();
    if (w < 2) throw InputError("p-value needs at least two statistics");
    const double observed = stats[0];
    Eigen::Index count = 0;
    if (alternative == Alternative::Greater) {
        for (Eigen::Index g = 0; g < w; ++g) count += (stats[g] >= observed);
    } else {
        for (Eigen::Index g = 0; g < w; ++g) count += (stats[g] <= observed);
    }
    return double(count) / double(w);
}

ScoreTestResult sign_flip_test(const Family& family, const Eigen::VectorXd& y,
                               const DesignSplit& design, double beta0,
                               Alternative alternative, const FlipEnsemble& ensemble,
                               bool standardized) {
    if (ensemble.n() != design.n())
        throw InputError("ensemble observation count differs from design");

    NullFit fit = fit_null(family, y, design, beta0);
    ScoreContext ctx(fit, design, y);

    const Eigen::Index w = ensemble.w();
    ScoreTestResult res;
    res.beta0 = beta0;
    res.alternative = alternative;
    res.standardized = standardized;
    res.stats.resize(w);
    for (Eigen::Index g = 0; g < w; ++g) {
        Eigen::VectorXd flip = ensemble.row(g);
        res.stats[g] = standardized ? ctx.standardized(flip) : ctx.effective(flip);
    }
    res.p_value = pvalue_from_stats(res.stats, alternative);
    return res;
}

}  // namespace flipci
