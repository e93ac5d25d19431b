#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pilab/rng.hpp"

namespace pilab::theory {

// Stylized newsvendor world: nonperishable, zero lead time, scalar state z.
// Demand d = f_D(x) + eps with x ~ U[0,1], z ~ U[0, Dbar], eps a truncated
// normal keeping d in [0, Dbar]. Negative orders are allowed here.
struct NewsvendorWorld {
    double b = 10.0, h = 1.0;
    double Q = 20.0;          // uniform bound on hypotheses (clipped at eval)
    double Dbar = 4.0;
    double noise_sd = 0.25;
    double noise_lo = -1.0, noise_hi = 1.0;

    double f_mean(double x) const { return 2.0 * x + 1.0; }
    double noise_quantile(double p) const;   // truncated-normal inverse CDF
    double sample_noise(Rng& rng) const;
    double loss(double order_upto_minus_z, double z, double d) const;  // f(x,z) value
    // globally optimal policy g*(x,z) = f_D(x) + F_eps^{-1}(b/(b+h)) - z
    double optimal_offset() const { return noise_quantile(b / (b + h)); }
};

struct DataPoint {
    double x, z, d;
};

std::vector<DataPoint> sample_world(const NewsvendorWorld& w, int n, Rng& rng);

// (i, j) exponents of the monomials x^i z^j with i + j <= A, fixed order.
std::vector<std::pair<int, int>> monomials(int degree);

struct PolyHypothesis {
    int degree = 1;
    bool constrained = false;  // f(x,z) = sum_k alpha_k x^k - z
    double clip = 20.0;
    std::vector<double> coef;
    double eval(double x, double z) const;       // clipped to [-clip, clip]
    double eval_raw(double x, double z) const;   // unclipped (training path)
};

struct ErmOptions {
    int max_iters = 100000;
    double tol = 1e-6;
    double step0 = 2.0;     // normalized-subgradient scale, eta_t = step0/sqrt(t)
    int check_every = 50;
    int patience = 30;      // plateau checks before stopping
};

struct ErmResult {
    PolyHypothesis f;
    double emp_risk = 0.0;
    int iters = 0;
    bool converged = false;
};

// ERM over the full polynomial class (subgradient descent with weighted iterate
// averaging; the newsvendor loss is convex piecewise-linear in the coefficients).
ErmResult erm_full(std::span<const DataPoint> data, int degree, const NewsvendorWorld& w,
                   const ErmOptions& opt = {});
// ERM over the constrained class v(x) - z.
ErmResult erm_constrained(std::span<const DataPoint> data, int degree, const NewsvendorWorld& w,
                          const ErmOptions& opt = {});

double empirical_risk(const PolyHypothesis& f, std::span<const DataPoint> data,
                      const NewsvendorWorld& w);
// Monte-Carlo population risk on a shared test draw.
double population_risk(const PolyHypothesis& f, std::span<const DataPoint> test,
                       const NewsvendorWorld& w);
double optimal_risk(std::span<const DataPoint> test, const NewsvendorWorld& w);

struct RiskPoint {
    int n = 0;
    double full_mean = 0.0, full_sd = 0.0;
    double cons_mean = 0.0, cons_sd = 0.0;
    std::vector<double> full_risks, cons_risks;  // per seed
};

struct RiskCurves {
    int degree = 0;
    double optimal = 0.0;       // MC risk of g*
    double sample_ratio = 0.0;  // pseudo-dimension note: 2/(2+A)
    std::vector<RiskPoint> points;
};

RiskCurves excess_risk_experiment(const NewsvendorWorld& w, int degree,
                                  std::span<const int> n_grid, int n_seeds, int m_test,
                                  uint64_t seed, const ErmOptions& opt = {});

void write_curves_csv(const RiskCurves& c, const std::string& path);

}  // namespace pilab::theory
