#include "flipci/ci_inversion.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "flipci/errors.hpp"
#include "flipci/glm_fit.hpp"

namespace flipci {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void CiConfig::validate() const {
    if (!(level > 0.5 && level < 1.0)) throw InputError("level must be in (0.5, 1)");
    if (!(tol_fraction > 0.0 && tol_fraction < 1.0))
        throw InputError("tolFraction must be in (0, 1)");
    if (max_expansion_multiples < 1) throw InputError("maxExpansionMultiples must be >= 1");
    if (!(epsilon_floor > 0.0)) throw InputError("epsilonFloor must be positive");
    if (!(epsilon_scale_divisor > 0.0)) throw InputError("epsilonScaleDivisor must be positive");
    if (w < 2) throw InputError("flip count w must be >= 2");
}

double PValueFunction::operator()(double beta0) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(beta0);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double p = fn_(beta0);
    ++evaluations_;
    cache_.emplace(key, p);
    return p;
}

double initial_epsilon(double beta_hat, double sigma_hat, double alpha, double scale_divisor,
                       double floor) {
    if (!(sigma_hat >= 0.0)) throw InputError("sigma_hat must be non-negative");
    double wald_half = std_normal_quantile(1.0 - alpha / 2.0) * sigma_hat;
    return std::max({wald_half, std::abs(beta_hat) / scale_divisor, floor});
}

StartSearch find_start(PValueFunction& fp, double beta_hat, double epsilon, double alpha_half,
                       Side side, int max_steps) {
    const double dir = (side == Side::Lower) ? -1.0 : 1.0;
    for (int i = 1; i <= max_steps; ++i) {
        double beta = beta_hat + dir * double(i) * epsilon;
        double p = fp(beta);
        if (std::isnan(p)) return {true, 0.0};  // degenerate null model: stop expanding
        if (p < alpha_half) return {false, beta};
    }
    return {true, 0.0};
}

double bisect_equitailed_bound(PValueFunction& fp, double start_outside, double epsilon,
                               double tol, double alpha_half, Side side) {
    const double toward = (side == Side::Lower) ? 1.0 : -1.0;
    double bound = start_outside;
    double beta = start_outside;
    double step = epsilon;
    double move_dir = toward;
    while (true) {
        step /= 2.0;
        beta += move_dir * step;
        double p = fp(beta);
        bool rejected = std::isnan(p) || p < alpha_half;
        if (rejected) bound = beta;
        if (step < tol) return bound;
        move_dir = rejected ? toward : -toward;
    }
}

double bisect_symmetric(PValueFunction& fp_minus, PValueFunction& fp_plus, double beta_hat,
                        double epsilon, double tol, double alpha, int max_steps) {
    // Expansion: widen by epsilon until the combined one-sided p drops below alpha.
    double delta_start = 0.0;
    bool found = false;
    for (int i = 1; i <= max_steps; ++i) {
        double delta = double(i) * epsilon;
        double pl = fp_minus(beta_hat - delta);
        double pu = fp_plus(beta_hat + delta);
        if (std::isnan(pl) || std::isnan(pu)) return kInf;  // degenerate direction
        if (pl + pu < alpha) {
            delta_start = delta;
            found = true;
            break;
        }
    }
    if (!found) return kInf;

    double delta_c = delta_start;  // conservative: known rejected width
    double delta = delta_start;
    double step = epsilon;
    double move_dir = -1.0;  // first move narrows the interval
    while (true) {
        step /= 2.0;
        delta += move_dir * step;
        double pl = fp_minus(beta_hat - delta);
        double pu = fp_plus(beta_hat + delta);
        double psum = (std::isnan(pl) ? 0.0 : pl) + (std::isnan(pu) ? 0.0 : pu);
        bool rejected = psum < alpha;
        if (rejected) delta_c = delta;
        if (step < tol) return delta_c;
        move_dir = rejected ? -1.0 : 1.0;
    }
}

namespace {

// Model-backed one-sided p-value closure. A degenerate null model at a test
// point maps to NaN; everything else propagates.
std::function<double(double)> make_pvalue_fn(const Family& family, const Eigen::VectorXd& y,
                                             const DesignSplit& design, Alternative alt,
                                             const FlipEnsemble& ensemble, bool standardized) {
    return [&family, &y, &design, alt, &ensemble, standardized](double beta0) -> double {
        try {
            return sign_flip_test(family, y, design, beta0, alt, ensemble, standardized).p_value;
        } catch (const DegenerateModelError&) {
            return kNaN;
        } catch (const ZeroVarianceError&) {
            return kNaN;
        }
    };
}

}  // namespace

ConfidenceInterval confint(const Family& family, const Eigen::VectorXd& y,
                           const DesignSplit& design, const CiConfig& config) {
    config.validate();
    if (config.method != CiMethod::FlipEquitailed && config.method != CiMethod::FlipSymmetric)
        throw InputError("confint inverts flip tests; use wald_interval/sandwich_interval "
                         "for the parametric baselines");

    const double alpha = 1.0 - config.level;
    FullFit full = fit_full(family, y, design);
    double epsilon = initial_epsilon(full.beta_hat, full.se_model, alpha,
                                     config.epsilon_scale_divisor, config.epsilon_floor);
    double tol = epsilon * config.tol_fraction;

    FlipEnsemble ensemble = FlipEnsemble::generate(design.n(), config.w, config.seed);
    PValueFunction fp_minus(
        make_pvalue_fn(family, y, design, Alternative::Greater, ensemble, config.standardized));
    PValueFunction fp_plus(
        make_pvalue_fn(family, y, design, Alternative::Less, ensemble, config.standardized));

    ConfidenceInterval ci;
    ci.level = config.level;
    ci.method = config.method;

    if (config.method == CiMethod::FlipEquitailed) {
        const double alpha_half = alpha / 2.0;
        StartSearch lo = find_start(fp_minus, full.beta_hat, epsilon, alpha_half, Side::Lower,
                                    config.max_expansion_multiples);
        ci.lower = lo.unbounded
                       ? -kInf
                       : bisect_equitailed_bound(fp_minus, lo.start, epsilon, tol, alpha_half,
                                                 Side::Lower);
        StartSearch hi = find_start(fp_plus, full.beta_hat, epsilon, alpha_half, Side::Upper,
                                    config.max_expansion_multiples);
        ci.upper = hi.unbounded
                       ? kInf
                       : bisect_equitailed_bound(fp_plus, hi.start, epsilon, tol, alpha_half,
                                                 Side::Upper);
    } else {
        double delta = bisect_symmetric(fp_minus, fp_plus, full.beta_hat, epsilon, tol, alpha,
                                        config.max_expansion_multiples);
        ci.lower = std::isinf(delta) ? -kInf : full.beta_hat - delta;
        ci.upper = std::isinf(delta) ? kInf : full.beta_hat + delta;
    }
    ci.p_evaluations = fp_minus.evaluations() + fp_plus.evaluations();
    return ci;
}

std::vector<CurvePoint> pvalue_curve(const Family& family, const Eigen::VectorXd& y,
                                     const DesignSplit& design,
                                     const std::vector<double>& grid, Alternative side,
                                     const FlipEnsemble& ensemble, bool standardized) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("grid must be sorted ascending");

    std::vector<CurvePoint> curve;
    curve.reserve(grid.size());
    for (double beta0 : grid) {
        CurvePoint pt;
        pt.beta0 = beta0;
        try {
            pt.p = sign_flip_test(family, y, design, beta0, side, ensemble, standardized).p_value;
        } catch (const DegenerateModelError&) {
            pt.p = kNaN;
        } catch (const ZeroVarianceError&) {
            pt.p = kNaN;
        } catch (const NonConvergenceError&) {
            pt.p = kNaN;
        }
        curve.push_back(pt);
    }
    return curve;
}

}  // namespace flipci
