#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "flipci/baselines.hpp"
#include "flipci/design.hpp"
#include "flipci/family.hpp"
#include "flipci/flip_engine.hpp"

namespace flipci {

struct CiConfig {
    double level = 0.95;
    CiMethod method = CiMethod::FlipEquitailed;
    double tol_fraction = 1.0 / 1024.0;  // tolerance as a fraction of the initial epsilon
    int max_expansion_multiples = 10;
    double epsilon_floor = 0.2;
    double epsilon_scale_divisor = 100.0;
    int w = 1000;
    std::uint64_t seed = 1;
    bool standardized = true;

    void validate() const;
};

// Memoized one-sided p-value function of beta0. Evaluations are cached on
// the exact bit pattern of beta0; the bisection grid is dyadic in the
// initial epsilon, so revisited points hit the cache. The underlying
// callable may return NaN to signal a degenerate null model at that point.
class PValueFunction {
public:
    explicit PValueFunction(std::function<double(double)> fn) : fn_(std::move(fn)) {}

    double operator()(double beta0);
    long evaluations() const { return evaluations_; }

private:
    std::function<double(double)> fn_;
    std::unordered_map<std::uint64_t, double> cache_;
    long evaluations_ = 0;
};

// epsilon = max{ z_{1-alpha/2} * sigma, |beta|/divisor, floor }.
double initial_epsilon(double beta_hat, double sigma_hat, double alpha,
                       double scale_divisor = 100.0, double floor = 0.2);

struct StartSearch {
    bool unbounded = false;
    double start = 0.0;  // first walk point with p < alpha/2, when bounded
};

// Walks beta_hat -/+ i*epsilon for i = 1..max_steps looking for a rejected
// point to bracket the bisection. Exhausting the walk, or hitting a
// degenerate null model (NaN), declares the bound infinite on this side.
StartSearch find_start(PValueFunction& fp, double beta_hat, double epsilon, double alpha_half,
                       Side side, int max_steps = 10);

// Halving search on [start_outside, start_outside + epsilon toward the
// estimate]. Returns the most-extreme-toward-the-estimate visited point with
// p < alpha_half (conservative: the bound itself is a rejected point).
double bisect_equitailed_bound(PValueFunction& fp, double start_outside, double epsilon,
                               double tol, double alpha_half, Side side);

// Half-width delta with fp_minus(beta-delta) + fp_plus(beta+delta) crossing
// alpha, conservative from above; +inf when no rejected width is found
// within max_steps * epsilon.
double bisect_symmetric(PValueFunction& fp_minus, PValueFunction& fp_plus, double beta_hat,
                        double epsilon, double tol, double alpha, int max_steps = 10);

// Full interval construction: fit, epsilon heuristic, start search and
// bisection per side, with one flip ensemble shared by every test.
ConfidenceInterval confint(const Family& family, const Eigen::VectorXd& y,
                           const DesignSplit& design, const CiConfig& config);

struct CurvePoint {
    double beta0 = 0.0;
    double p = 0.0;  // NaN when the fit failed at this point
};

// Shared-ensemble p-value function on a grid (ascending beta0).
std::vector<CurvePoint> pvalue_curve(const Family& family, const Eigen::VectorXd& y,
                                     const DesignSplit& design,
                                     const std::vector<double>& grid, Alternative side,
                                     const FlipEnsemble& ensemble, bool standardized = true);

}  // namespace flipci
